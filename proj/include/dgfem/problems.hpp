#pragma once

// Benchmark library: quadrant-checkerboard coefficients with a root-found
// singular exponent and an exact radially-truncated singular solution, the
// sign-changing flux field with its dominating companion, and manufactured
// smooth problems.

#include <functional>
#include <optional>
#include <string>

#include "dgfem/degiorgi.hpp"
#include "dgfem/fem.hpp"
#include "dgfem/mesh.hpp"

namespace dgfem {

struct BenchmarkProblem {
  std::string name;
  Box<2> box{};
  CoefficientField<2> coefficient;
  LoadData<2> load;
  std::optional<double> reference_exponent;
  std::function<double(const Vec<2>&)> exact_solution;  // empty when unknown
  int alignment = 1;  // cells per side must be a multiple of this
};

// ---------------------------------------------------------------------------
// quadrant checkerboard
//
// Coefficient s on the quadrants with x y > 0 and 1 elsewhere.  The singular
// exponent g solves the characteristic equation  s tan^2(g pi / 4) = 1.

inline double kellogg_exponent(double ratio) {
  if (!(ratio > 0.0)) fail(ErrorKind::invalid_data, "ratio must be positive");
  auto characteristic = [&](double g) { return ratio * std::pow(std::tan(g * M_PI / 4.0), 2) - 1.0; };
  double lo = 1e-9, hi = 2.0 - 1e-9;
  if (characteristic(lo) > 0.0 || characteristic(hi) < 0.0)
    fail(ErrorKind::invalid_data, "characteristic equation has no root in (0, 2)");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (characteristic(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double kellogg_ratio_for_exponent(double gamma) {
  if (!(gamma > 0.0) || !(gamma < 2.0)) fail(ErrorKind::invalid_data, "exponent must be in (0, 2)");
  double lo = 1e-8, hi = 1e8;  // exponent is decreasing in the ratio
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (kellogg_exponent(mid) > gamma ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

// Angular profile of the singular harmonic r^g mu(theta); continuous with
// coefficient-weighted flux continuity across the quadrant interfaces.
inline std::function<double(double)> kellogg_angular_profile(double gamma) {
  const double rho = M_PI / 4.0;
  const double sigma = M_PI / 4.0 - M_PI / (2.0 * gamma);
  return [gamma, rho, sigma](double theta) {
    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) theta += 2.0 * M_PI;
    if (theta <= M_PI / 2.0)
      return std::cos((M_PI / 2.0 - sigma) * gamma) * std::cos((theta - M_PI / 2.0 + rho) * gamma);
    if (theta <= M_PI)
      return std::cos(rho * gamma) * std::cos((theta - M_PI + sigma) * gamma);
    if (theta <= 3.0 * M_PI / 2.0)
      return std::cos(sigma * gamma) * std::cos((theta - M_PI - rho) * gamma);
    return std::cos((M_PI / 2.0 - rho) * gamma) * std::cos((theta - 3.0 * M_PI / 2.0 - sigma) * gamma);
  };
}

namespace detail {

// quintic transition and its radial derivatives
inline double cut_s(double t) { return quintic_step(t); }
inline double cut_s1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -30.0 * t * t * (1.0 - t) * (1.0 - t);
}
inline double cut_s2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

}  // namespace detail

// Exact solution value of the radially truncated singular function and the
// matching source.  The truncation keeps the exact solution zero on the
// boundary of (-1,1)^2 while leaving the pure r^g profile intact for
// r <= plateau.
struct KelloggFields {
  double ratio = 1.0;
  double gamma = 1.0;
  double plateau = 0.45;
  double support = 0.9;
  std::function<double(double)> mu;

  double coefficient_at(const Vec<2>& x) const { return x[0] * x[1] > 0.0 ? ratio : 1.0; }

  double solution(const Vec<2>& x) const {
    const double r = norm(x);
    if (r >= support) return 0.0;
    const double theta = std::atan2(x[1], x[0]);
    const double w = detail::cut_s((r - plateau) / (support - plateau));
    return w * std::pow(r, gamma) * mu(theta);
  }

  double source(const Vec<2>& x) const {
    const double r = norm(x);
    if (r <= plateau || r >= support) return 0.0;
    const double width = support - plateau;
    const double t = (r - plateau) / width;
    const double w1 = detail::cut_s1(t) / width;
    const double w2 = detail::cut_s2(t) / (width * width);
    const double theta = std::atan2(x[1], x[0]);
    // minus coefficient times the piecewise Laplacian of w r^g mu
    return -coefficient_at(x) * mu(theta) * std::pow(r, gamma - 1.0) *
           ((w2 + w1 / r) * r + 2.0 * gamma * w1);
  }
};

inline KelloggFields kellogg_fields(double ratio) {
  KelloggFields f;
  f.ratio = ratio;
  f.gamma = kellogg_exponent(ratio);
  f.mu = kellogg_angular_profile(f.gamma);
  return f;
}

inline BenchmarkProblem checkerboard(double ratio) {
  if (!(ratio > 0.0)) fail(ErrorKind::invalid_data, "ratio must be positive");
  BenchmarkProblem p;
  p.name = "checkerboard";
  p.box = {{-1.0, -1.0}, {1.0, 1.0}};
  const auto fields = kellogg_fields(ratio);
  p.coefficient = CoefficientField<2>::scalar(
      [fields](const Vec<2>& x) { return fields.coefficient_at(x); }, std::min(1.0, ratio),
      std::max(1.0, ratio));
  p.load.delta = 0.5;
  p.load.f = [fields](const Vec<2>& x) { return fields.source(x); };
  p.reference_exponent = fields.gamma;
  p.exact_solution = [fields](const Vec<2>& x) { return fields.solution(x); };
  p.alignment = 2;
  return p;
}

// ---------------------------------------------------------------------------
// sign-changing flux with a dominating companion field

inline BenchmarkProblem sign_changing_flux() {
  BenchmarkProblem p;
  p.name = "sign-changing-flux";
  p.box = {{-2.0, -2.0}, {2.0, 2.0}};
  p.coefficient = CoefficientField<2>::identity();
  p.load.delta = 0.5;
  p.load.F = [](const Vec<2>& x) {
    return std::abs(x[0]) >= 1.0 ? Vec<2>{-1.0, 0.0} : Vec<2>{1.0, 0.0};
  };
  p.load.G = [](const Vec<2>& x) {
    if (x[0] <= -1.0) return Vec<2>{3.0, 0.0};
    if (x[0] < 1.0) return Vec<2>{1.0, 0.0};
    return Vec<2>{-1.0, 0.0};
  };
  p.alignment = 4;  // interfaces at x = -1, 0, 1 must be mesh lines
  return p;
}

// ---------------------------------------------------------------------------
// manufactured smooth problems

inline BenchmarkProblem manufactured(std::function<double(const Vec<2>&)> exact,
                                     std::function<Vec<2>(const Vec<2>&)> exact_gradient,
                                     std::function<double(const Vec<2>&)> source,
                                     CoefficientField<2> coefficient,
                                     Box<2> box = {{0.0, 0.0}, {1.0, 1.0}}) {
  // finite-difference consistency of the supplied derivatives
  const double h = 1e-5;
  for (double sx : {0.21, 0.47, 0.73}) {
    for (double sy : {0.31, 0.59, 0.83}) {
      const Vec<2> x = {box.lo[0] + sx * (box.hi[0] - box.lo[0]),
                        box.lo[1] + sy * (box.hi[1] - box.lo[1])};
      const Vec<2> g = exact_gradient(x);
      for (int d = 0; d < 2; ++d) {
        Vec<2> xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        const double fd = (exact(xp) - exact(xm)) / (2.0 * h);
        if (std::abs(fd - g[d]) > 1e-4 * (1.0 + std::abs(g[d])))
          fail(ErrorKind::invalid_data, "gradient callback disagrees with finite differences");
      }
      // divergence consistency: -div(A grad u) vs the supplied source
      auto flux = [&](const Vec<2>& y) { return matvec<2>(coefficient.evaluate(y), exact_gradient(y)); };
      double div = 0.0;
      for (int d = 0; d < 2; ++d) {
        Vec<2> xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        div += (flux(xp)[d] - flux(xm)[d]) / (2.0 * h);
      }
      if (std::abs(-div - source(x)) > 1e-4 * (1.0 + std::abs(source(x))))
        fail(ErrorKind::invalid_data, "source callback disagrees with -div(A grad u)");
    }
  }
  BenchmarkProblem p;
  p.name = "manufactured";
  p.box = box;
  p.coefficient = std::move(coefficient);
  p.load.delta = 0.5;
  p.load.f = std::move(source);
  p.exact_solution = std::move(exact);
  return p;
}

inline BenchmarkProblem manufactured_polynomial() {
  return manufactured(
      [](const Vec<2>& x) { return x[0] * (1 - x[0]) * x[1] * (1 - x[1]); },
      [](const Vec<2>& x) {
        return Vec<2>{(1 - 2 * x[0]) * x[1] * (1 - x[1]), x[0] * (1 - x[0]) * (1 - 2 * x[1])};
      },
      [](const Vec<2>& x) { return 2 * x[1] * (1 - x[1]) + 2 * x[0] * (1 - x[0]); },
      CoefficientField<2>::identity());
}

// mesh generator honoring the problem's interface alignment
inline Triangulation<2> problem_mesh(const BenchmarkProblem& p, int cells_per_side) {
  if (cells_per_side % p.alignment != 0)
    fail(ErrorKind::invalid_data, "cells per side must be a multiple of " + std::to_string(p.alignment));
  return kuhn_triangulate<2>(cells_per_side, p.box);
}

}  // namespace dgfem
