#pragma once

// Level-set iteration machinery: closed-form iteration lemmas as numeric
// checks, interpolated radial cutoffs, local sup bounds, neighbor-value
// bounds, oscillation decay studies, Hoelder seminorm estimation and a
// damped fixed-point driver for scalar quasilinear problems.

#include <algorithm>
#include <functional>
#include <vector>

#include "dgfem/conditions.hpp"
#include "dgfem/fem.hpp"
#include "dgfem/inequalities.hpp"
#include "dgfem/mesh.hpp"

namespace dgfem {

// ---------------------------------------------------------------------------
// iteration lemmas

struct GeometricIterationParams {
  double C = 1.0;
  double b = 2.0;
  double alpha = 1.0;
};

struct IterationCheck {
  bool hypothesis_ok = true;
  int first_violation = -1;    // index where the recurrence hypothesis failed
  bool start_small_enough = false;
  bool bounded = true;         // sequence stays below the closed-form bound
  std::vector<double> bounds;  // closed-form bound per index
};

// a_{k+1} <= C b^k a_k^{1+alpha} with small a_0 forces geometric decay
inline IterationCheck fast_geometric_bound(const GeometricIterationParams& p,
                                           const std::vector<double>& a) {
  IterationCheck out;
  const double slack = 1.0 + 1e-12;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    const double cap = p.C * std::pow(p.b, static_cast<double>(k)) * std::pow(a[k], 1.0 + p.alpha);
    if (a[k + 1] > cap * slack + 1e-300) {
      out.hypothesis_ok = false;
      out.first_violation = static_cast<int>(k + 1);
      break;
    }
  }
  const double threshold =
      std::pow(p.C, -1.0 / p.alpha) * std::pow(p.b, -1.0 / (p.alpha * p.alpha));
  out.start_small_enough = !a.empty() && a[0] <= threshold * slack;
  out.bounds.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    out.bounds[k] = std::pow(p.C, -1.0 / p.alpha) *
                    std::pow(p.b, -(1.0 + static_cast<double>(k) * p.alpha) / (p.alpha * p.alpha));
  if (out.hypothesis_ok && out.start_small_enough)
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k] > out.bounds[k] * slack + 1e-300) out.bounded = false;
  return out;
}

// a_{k+1}^2 <= c_k (a_k - a_{k+1}) forces a_{k+1} <= sqrt(max c) sqrt(a_1) / sqrt(k);
// sequences are passed starting at a_1
inline IterationCheck telescoping_bound(const std::vector<double>& c, const std::vector<double>& a) {
  IterationCheck out;
  const double slack = 1.0 + 1e-12;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    if (k >= c.size()) break;
    const double cap = c[k] * (a[k] - a[k + 1]);
    if (a[k + 1] * a[k + 1] > cap * slack + 1e-300) {
      out.hypothesis_ok = false;
      out.first_violation = static_cast<int>(k + 1);
      break;
    }
  }
  out.start_small_enough = true;
  out.bounds.assign(a.size(), std::numeric_limits<double>::infinity());
  if (out.hypothesis_ok && !a.empty()) {
    double cmax = 0.0;
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
      cmax = std::max(cmax, k < c.size() ? c[k] : 0.0);
      out.bounds[k + 1] = std::sqrt(cmax) * std::sqrt(std::max(a[0], 0.0)) /
                          std::sqrt(static_cast<double>(k + 1));
      if (a[k + 1] > out.bounds[k + 1] * slack + 1e-300) out.bounded = false;
    }
  }
  return out;
}

struct CAlphaParams {
  double sigma = 0.5;
  double alpha1 = 1.0;
  double alpha2 = 0.5;
  double kappa = 0.0;
  double C = 0.0;
};

struct CAlphaFit {
  bool monotone_ok = true;
  bool hypothesis_ok = true;    // single-step inequality on sigma-pairs
  bool kappa_small_enough = true;
  double kappa0 = 0.0;
  double derived_constant = 0.0;   // envelope constant from the chain argument
  double measured_constant = 0.0;  // tightest constant realized by the samples
  bool envelope_ok = true;
};

// phi sampled at ascending radii; the grid should be geometric with ratio
// sigma so single steps can be checked directly
inline CAlphaFit calpha_iteration_fit(const std::vector<double>& radii,
                                      const std::vector<double>& phi, const CAlphaParams& p) {
  if (radii.size() != phi.size() || radii.size() < 2)
    fail(ErrorKind::invalid_data, "need matching radius/value samples");
  CAlphaFit out;
  for (std::size_t i = 0; i + 1 < phi.size(); ++i)
    if (phi[i] > phi[i + 1] * (1.0 + 1e-12)) out.monotone_ok = false;
  if (!out.monotone_ok) fail(ErrorKind::invalid_data, "samples must be nondecreasing in the radius");

  const double alpha_mid = 0.5 * (p.alpha1 + p.alpha2);
  out.kappa0 = std::pow(p.sigma, alpha_mid) - std::pow(p.sigma, p.alpha1);
  out.kappa_small_enough = p.kappa <= out.kappa0 * (1.0 + 1e-12);

  const double slack = 1.0 + 1e-12;
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = 0; j < radii.size(); ++j) {
      if (std::abs(radii[i] - p.sigma * radii[j]) > 1e-9 * radii[j]) continue;
      const double cap = (std::pow(p.sigma, p.alpha1) + p.kappa) * phi[j] +
                         p.C * std::pow(radii[j], p.alpha2);
      if (phi[i] > cap * slack + 1e-300) out.hypothesis_ok = false;
    }

  const double s_a2 = std::pow(p.sigma, -p.alpha2);
  out.derived_constant =
      std::max(s_a2, s_a2 * s_a2 / (1.0 - std::pow(p.sigma, alpha_mid - p.alpha2)));
  if (out.hypothesis_ok && out.kappa_small_enough) {
    for (std::size_t i = 0; i < radii.size(); ++i)
      for (std::size_t j = 0; j < radii.size(); ++j) {
        if (radii[i] > radii[j]) continue;
        const double envelope = out.derived_constant *
                                (std::pow(radii[i] / radii[j], p.alpha2) * phi[j] +
                                 p.C * std::pow(radii[i], p.alpha2));
        if (phi[i] > envelope * slack + 1e-300) out.envelope_ok = false;
        if (envelope > 0.0)
          out.measured_constant =
              std::max(out.measured_constant, phi[i] / (envelope / out.derived_constant));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// cutoffs
//
// Radial bump with a quintic C^2 transition: value 1 inside the plateau
// radius (1 + 2^{-(k+1)}) R, value 0 outside (1 + 2^{-k}) R, interpolated
// into the finite element space.  Smooth gradient certified by
// |grad| <= (15/8) 2^{k+1} / R.

inline double quintic_step(double t) {  // 1 -> 0 transition on [0, 1], C^2
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

template <int N>
inline double distance_to_boundary(const Triangulation<N>& mesh, const VecArg<N>& x) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.boundary_facets) {
    if constexpr (N == 2) {
      d = std::min(d, dist(closest_point_on_segment<2>(mesh.nodes[static_cast<std::size_t>(f[0])].coords,
                                                       mesh.nodes[static_cast<std::size_t>(f[1])].coords, x),
                           x));
    } else {
      const std::array<Vec<3>, 3> tri = {mesh.nodes[static_cast<std::size_t>(f[0])].coords,
                                         mesh.nodes[static_cast<std::size_t>(f[1])].coords,
                                         mesh.nodes[static_cast<std::size_t>(f[2])].coords};
      d = std::min(d, dist(closest_point_on_triangle_3d(tri, x), x));
    }
  }
  return d;
}

template <int N>
struct Cutoff {
  FeFunction<N> eta;
  double plateau_radius = 0.0;
  double support_radius = 0.0;
  double smooth_gradient_bound = 0.0;
};

template <int N>
inline Cutoff<N> build_cutoff(const Triangulation<N>& mesh, const VecArg<N>& center, double radius,
                              int k, bool allow_boundary = false) {
  const int elem = mesh.element_containing(center);
  if (elem < 0) fail(ErrorKind::geometry, "cutoff center lies outside the mesh");
  if (radius < mesh.elements[static_cast<std::size_t>(elem)].diameter)
    fail(ErrorKind::geometry, "cutoff radius below the local mesh size");
  if (!allow_boundary && distance_to_boundary(mesh, center) < 2.0 * radius * (1.0 - 1e-12))
    fail(ErrorKind::geometry, "cutoff ball escapes the domain; use the boundary variant");

  Cutoff<N> out;
  out.plateau_radius = (1.0 + std::pow(2.0, -(k + 1))) * radius;
  out.support_radius = (1.0 + std::pow(2.0, -k)) * radius;
  const double width = out.support_radius - out.plateau_radius;
  out.smooth_gradient_bound = (15.0 / 8.0) / width;
  out.eta = interpolate(mesh, [&](const Vec<N>& x) {
    return quintic_step((dist(x, center) - out.plateau_radius) / width);
  });
  return out;
}

template <int N>
struct CutoffAudit {
  bool values_in_range = true;
  bool sandwich_ok = true;        // eta_{k+1} positive forces eta_k = 1 on the element
  double gradient_constant = 0.0; // max |grad eta_k| R / 2^k over elements
  double pair_constant = 0.0;     // constant in the weighted-mean bound (4)
};

template <int N>
inline CutoffAudit<N> audit_cutoff_pair(const FeFunction<N>& eta_k, const FeFunction<N>& eta_k1,
                                        int k, double radius) {
  const auto& mesh = *eta_k.mesh;
  CutoffAudit<N> out;
  for (double v : eta_k.values) out.values_in_range &= v >= 0.0 && v <= 1.0;
  for (double v : eta_k1.values) out.values_in_range &= v >= 0.0 && v <= 1.0;
  for (const auto& e : mesh.elements) {
    const auto vk = eta_k.on_element(e.id);
    const auto vk1 = eta_k1.on_element(e.id);
    double max_k = 0.0, max_k1 = 0.0;
    for (int i = 0; i <= N; ++i) {
      max_k = std::max(max_k, vk[i]);
      max_k1 = std::max(max_k1, vk1[i]);
    }
    if (max_k1 > 0.0 && max_k < 1.0) out.sandwich_ok = false;
    const double grad_k = norm(eta_k.gradient_on(e.id));
    out.gradient_constant = std::max(out.gradient_constant, grad_k * radius / std::pow(2.0, k));
    const double grad_k1 = norm(eta_k1.gradient_on(e.id));
    if (max_k1 > 0.0) {
      // weighted-mean comparison with the constant-1 probe
      const double lhs = grad_k1 * grad_k1;
      const double rhs = std::pow(2.0, 2 * (k + 1)) / (radius * radius) *
                         (integrate_p1_power<N>(e.volume, vk, 2) / e.volume);
      if (rhs > 0.0) out.pair_constant = std::max(out.pair_constant, lhs / rhs);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// truncation iteration state

template <int N>
struct DeGiorgiState {
  Vec<N> center{};
  double radius = 0.0;
  double lambda_inf = 0.0;
  double mu = 0.0;  // 1 - tau^n / 4 for the measured path constant
  std::vector<double> lambda;      // lambda_k
  std::vector<double> level_measure;  // |A_k|
  std::vector<double> energy;      // a_k, means over Omega(B(x0, 2R))
  std::vector<double> shrink_radius;  // R_k solving the data-smallness equation
  std::vector<FeFunction<N>> cutoffs;
};

template <int N>
inline DeGiorgiState<N> run_truncation_iteration(const FeFunction<N>& u, double c,
                                                 const VecArg<N>& center, double radius,
                                                 const LoadNorms& norms, double delta, double tau,
                                                 int path_len, int k_max, double big_q) {
  const auto& mesh = *u.mesh;
  DeGiorgiState<N> state;
  state.center = center;
  state.radius = radius;

  const auto omega_2b = neighborhood(mesh, BallRegion<N>{center, 2.0 * radius});
  double region_vol = 0.0;
  double mean_trunc_sq = 0.0;
  for (int e : omega_2b) {
    const auto& el = mesh.elements[static_cast<std::size_t>(e)];
    std::array<double, N + 1> tv{};
    const auto uv = u.on_element(e);
    for (int i = 0; i <= N; ++i) tv[i] = std::max(uv[i] - c, 0.0);
    mean_trunc_sq += integrate_p1_product<N>(el.volume, tv, tv);
    region_vol += el.volume;
  }
  if (region_vol > 0.0) mean_trunc_sq /= region_vol;
  const double data_sq = norms.G_p * norms.G_p + norms.f_q * norms.f_q;
  state.lambda_inf =
      std::sqrt(std::max(std::pow(radius, 2.0 * delta) * data_sq, mean_trunc_sq));
  const double tau_n = std::pow(tau, path_len);
  state.mu = 1.0 - tau_n / 4.0;

  const double data = norms.G_p + norms.f_q;
  for (int k = 0; k <= k_max; ++k) {
    state.lambda.push_back((1.0 - std::pow(2.0, -k)) * state.lambda_inf);
    const auto cut = build_cutoff(mesh, center, radius, k, /*allow_boundary=*/true);
    state.cutoffs.push_back(cut.eta);
    if (data > 0.0 && tau_n > 0.0)
      state.shrink_radius.push_back(
          std::pow(tau_n / 4.0 * std::pow(1.0 - state.mu, k) / data, 1.0 / delta) / (2.0 * big_q));
    else
      state.shrink_radius.push_back(std::numeric_limits<double>::infinity());
  }
  for (int k = 0; k <= k_max; ++k) {
    double a_k = 0.0, measure = 0.0;
    for (int e : omega_2b) {
      const auto& el = mesh.elements[static_cast<std::size_t>(e)];
      const auto uv = u.on_element(e);
      const auto ev = state.cutoffs[static_cast<std::size_t>(k)].on_element(e);
      std::array<double, N + 1> tv{};
      bool trunc_pos = false, eta_pos = false;
      for (int i = 0; i <= N; ++i) {
        tv[i] = std::max(uv[i] - state.lambda[static_cast<std::size_t>(k)] - c, 0.0);
        trunc_pos |= tv[i] > 0.0;
        eta_pos |= ev[i] > 0.0;
      }
      a_k += integrate_p1_pair_power<N>(el.volume, ev, 2, tv, 2);
      if (trunc_pos && eta_pos) measure += el.volume;
    }
    state.energy.push_back(region_vol > 0.0 ? a_k / region_vol : 0.0);
    state.level_measure.push_back(measure);
  }
  return state;
}

// ---------------------------------------------------------------------------
// local sup bound

// The boundary variant admits balls touching the boundary; it requires the
// function to vanish on the boundary nodes of the doubled neighborhood.
template <int N>
inline InequalityRecord local_sup_bound_check(const FeFunction<N>& u, const VecArg<N>& center,
                                              double radius, double c, const LoadNorms& norms,
                                              double delta, int level = 0,
                                              bool boundary_variant = false) {
  const auto& mesh = *u.mesh;
  const int elem = mesh.element_containing(center);
  if (elem < 0) fail(ErrorKind::geometry, "center lies outside the mesh");
  if (radius < mesh.elements[static_cast<std::size_t>(elem)].diameter)
    fail(ErrorKind::geometry, "radius below the local mesh size");
  if (!boundary_variant) {
    if (distance_to_boundary(mesh, center) < 2.0 * radius * (1.0 - 1e-12))
      fail(ErrorKind::geometry, "ball of twice the radius escapes the domain");
  } else {
    for (int e : neighborhood(mesh, BallRegion<N>{center, 2.0 * radius}))
      for (int vid : mesh.elements[static_cast<std::size_t>(e)].vertices)
        if (mesh.nodes[static_cast<std::size_t>(vid)].on_boundary &&
            std::abs(u.values[static_cast<std::size_t>(vid)]) > 0.0)
          fail(ErrorKind::invalid_operand,
               "boundary variant requires zero values on the nearby boundary");
  }

  double sup_sq = 0.0;
  for (int e : prime_neighborhood(mesh, BallRegion<N>{center, radius}))
    for (int vid : mesh.elements[static_cast<std::size_t>(e)].vertices) {
      const double t = std::max(u.values[static_cast<std::size_t>(vid)] - c, 0.0);
      sup_sq = std::max(sup_sq, t * t);
    }

  double mean_sq = 0.0, vol = 0.0;
  for (int e : neighborhood(mesh, BallRegion<N>{center, 2.0 * radius})) {
    const auto& el = mesh.elements[static_cast<std::size_t>(e)];
    const auto uv = u.on_element(e);
    std::array<double, N + 1> tv{};
    for (int i = 0; i <= N; ++i) tv[i] = std::max(uv[i] - c, 0.0);
    mean_sq += integrate_p1_product<N>(el.volume, tv, tv);
    vol += el.volume;
  }
  if (vol > 0.0) mean_sq /= vol;

  InequalityRecord rec;
  rec.name = "local_sup_bound";
  rec.level = level;
  rec.lhs = sup_sq;
  rec.rhs = mean_sq + (norms.G_p * norms.G_p + norms.f_q * norms.f_q) *
                          std::pow(radius, 2.0 * delta);
  rec.ratio = detail::safe_ratio(rec.lhs, rec.rhs);
  rec.param_json = detail::ParamJson().add("R", radius).add("c", c).str();
  return rec;
}

// ---------------------------------------------------------------------------
// neighbor-value bound
//
// For a subsolution with values in [0, 1] and an interior simplex, rolling
// the per-step coupling inequality along an acute path yields an exact upper
// bound at the far vertex.

template <int N>
struct NeighborValueRecord {
  bool pass = false;
  double value = 0.0;           // v(x_j)
  double rolled_bound = 0.0;    // exact bound from per-step ratios
  double paper_form_bound = 0.0;  // 1 - tau^n + tau^n v(x_i) + data term
  double tau = 0.0;
  int path_length = 0;
  double measured_data_constant = 0.0;
};

template <int N>
inline NeighborValueRecord<N> neighbor_value_bound_check(const FeFunction<N>& v,
                                                         const StiffnessSystem<N>& sys,
                                                         const LoadNorms& norms, double delta,
                                                         int element, int node_i, int node_j,
                                                         double tol = 1e-9) {
  const auto& mesh = *v.mesh;
  const auto& el = mesh.elements[static_cast<std::size_t>(element)];
  for (int vid : el.vertices)
    if (mesh.nodes[static_cast<std::size_t>(vid)].on_boundary)
      fail(ErrorKind::invalid_operand, "element touches the boundary");
  for (double val : v.values)
    if (val < -1e-12 || val > 1.0 + 1e-12)
      fail(ErrorKind::invalid_operand, "values must lie in [0, 1]");

  const auto path = acute_path(mesh, sys.matrix, element, node_i, node_j);
  NeighborValueRecord<N> rec;
  if (!path.found) return rec;  // contradiction: surfaced as failure
  rec.tau = path.tau;
  rec.path_length = static_cast<int>(path.steps.size());

  double bound = v.values[static_cast<std::size_t>(node_i)];
  double product = 1.0;
  for (const auto& s : path.steps) {
    const double diag = sys.matrix.coeff(s.to_node, s.to_node);
    const double load_term = diag > 0.0 ? sys.rhs[static_cast<std::size_t>(s.to_node)] / diag : 0.0;
    bound = 1.0 - s.dest_ratio * (1.0 - bound) + load_term;
    product *= s.dest_ratio;
  }
  rec.value = v.values[static_cast<std::size_t>(node_j)];
  rec.rolled_bound = bound;
  rec.pass = rec.value <= bound + tol * (1.0 + std::abs(bound));

  const double tau_n = std::pow(rec.tau, std::max(rec.path_length, 1));
  const double data = norms.F_p + norms.f_q;
  const double h_delta = std::pow(el.diameter, delta);
  rec.paper_form_bound = 1.0 - tau_n + tau_n * v.values[static_cast<std::size_t>(node_i)];
  if (data > 0.0 && h_delta > 0.0)
    rec.measured_data_constant =
        std::max(0.0, rec.value - rec.paper_form_bound) / (data * h_delta);
  (void)product;
  return rec;
}

// ---------------------------------------------------------------------------
// oscillation

template <int N>
inline double oscillation(const FeFunction<N>& u, const std::vector<int>& elems) {
  if (elems.empty()) fail(ErrorKind::undefined_oscillation, "empty region");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int e : elems)
    for (int vid : u.mesh->elements[static_cast<std::size_t>(e)].vertices) {
      const double val = u.values[static_cast<std::size_t>(vid)];
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
  return hi - lo;
}

template <int N>
inline double oscillation(const FeFunction<N>& u, const BallRegion<N>& ball, int lattice = 14) {
  const auto& mesh = *u.mesh;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  bool any = false;
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    if (distance_point_simplex<N>(pts, ball.center) > ball.radius) continue;
    bool fully_inside = true;
    for (int i = 0; i <= N; ++i)
      fully_inside &= dist(pts[i], ball.center) <= ball.radius;
    const auto uv = u.on_element(e.id);
    if (fully_inside) {
      for (int i = 0; i <= N; ++i) {
        lo = std::min(lo, uv[i]);
        hi = std::max(hi, uv[i]);
        any = true;
      }
      continue;
    }
    // clipped element: vertices inside plus a dense barycentric sample
    for (int i = 0; i <= N; ++i)
      if (dist(pts[i], ball.center) <= ball.radius) {
        lo = std::min(lo, uv[i]);
        hi = std::max(hi, uv[i]);
        any = true;
      }
    detail::for_each_composition<N>(lattice, [&](const std::array<int, N + 1>& alpha) {
      std::array<double, N + 1> bary{};
      double val = 0.0;
      for (int i = 0; i <= N; ++i) {
        bary[i] = static_cast<double>(alpha[i]) / lattice;
        val += bary[i] * uv[i];
      }
      if (dist(bary_to_point<N>(pts, bary), ball.center) <= ball.radius) {
        lo = std::min(lo, val);
        hi = std::max(hi, val);
        any = true;
      }
    });
  }
  if (!any) fail(ErrorKind::undefined_oscillation, "region does not meet the mesh");
  return hi - lo;
}

struct OscillationReport {
  std::vector<double> radii;
  std::vector<double> osc_ball;        // osc over B(x0, R)
  std::vector<double> osc_prime;       // osc over Omega'(B(x0, R))
  std::vector<double> theta_steps;     // single-step contraction factors
  double theta_median = 0.0;
  double alpha = 0.0;          // fitted decay exponent
  double fit_constant = 0.0;   // osc ~ fit_constant * R^alpha
  int fit_points = 0;
};

namespace detail {

inline std::pair<double, double> fit_loglog(const std::vector<double>& x,
                                            const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return {0.0, 0.0};
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return {0.0, 0.0};
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return {slope, std::exp(intercept)};
}

}  // namespace detail

// Dyadic-type oscillation decay study around a center.  The exponent is
// fitted on radii within [fit_lo, fit_hi]; single-step contraction factors
// compare osc over Omega'(B(R)) with osc over B(2 Q R).
template <int N>
inline OscillationReport oscillation_decay_study(const FeFunction<N>& u, const VecArg<N>& center,
                                                 const std::vector<double>& radii_desc,
                                                 double big_q, double fit_lo, double fit_hi) {
  const auto& mesh = *u.mesh;
  OscillationReport rep;
  for (double r : radii_desc) {
    rep.radii.push_back(r);
    rep.osc_ball.push_back(oscillation(u, BallRegion<N>{center, r}));
    const auto prime = prime_neighborhood(mesh, BallRegion<N>{center, r});
    rep.osc_prime.push_back(prime.empty() ? 0.0 : oscillation(u, prime));
    const double big = 2.0 * big_q * r;
    if (distance_to_boundary(mesh, center) >= big) {
      const double osc_big = oscillation(u, BallRegion<N>{center, big});
      if (osc_big > 0.0) rep.theta_steps.push_back(1.0 - rep.osc_prime.back() / osc_big);
    }
  }
  if (!rep.theta_steps.empty()) {
    auto t = rep.theta_steps;
    std::nth_element(t.begin(), t.begin() + static_cast<long>(t.size() / 2), t.end());
    rep.theta_median = t[t.size() / 2];
  }
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    if (rep.radii[i] >= fit_lo && rep.radii[i] <= fit_hi && rep.osc_ball[i] > 0.0) {
      fx.push_back(rep.radii[i]);
      fy.push_back(rep.osc_ball[i]);
    }
  rep.fit_points = static_cast<int>(fx.size());
  const auto [slope, constant] = detail::fit_loglog(fx, fy);
  rep.alpha = slope;
  rep.fit_constant = constant;
  return rep;
}

// ---------------------------------------------------------------------------
// Hoelder seminorm estimate
//
// Lower estimate of sup |u(x) - u(y)| / |x - y|^alpha over a deterministic
// pair sample: a node subsample (all pairs), every mesh edge, and
// barycenter-vertex pairs.  Extrema of P1 functions sit at nodes, so node
// pairs carry the sup up to clipping effects.

enum class SeminormMode { interior, global };

template <int N>
inline double holder_seminorm(const FeFunction<N>& u, double alpha,
                              SeminormMode mode = SeminormMode::global, int max_sample = 1400) {
  if (!(alpha > 0.0) || alpha > 1.0) fail(ErrorKind::invalid_data, "exponent must be in (0, 1]");
  const auto& mesh = *u.mesh;
  double best = 0.0;
  auto consider = [&](const Vec<N>& xa, double va, const Vec<N>& xb, double vb) {
    const double d = dist(xa, xb);
    if (d <= 0.0) return;
    best = std::max(best, std::abs(va - vb) / std::pow(d, alpha));
  };
  auto admissible = [&](int node) {
    return mode == SeminormMode::global || !mesh.nodes[static_cast<std::size_t>(node)].on_boundary;
  };

  std::vector<int> sample;
  const std::size_t stride = std::max<std::size_t>(1, mesh.nodes.size() / static_cast<std::size_t>(max_sample));
  for (std::size_t i = 0; i < mesh.nodes.size(); i += stride)
    if (admissible(static_cast<int>(i))) sample.push_back(static_cast<int>(i));
  for (std::size_t a = 0; a < sample.size(); ++a)
    for (std::size_t b = a + 1; b < sample.size(); ++b)
      consider(mesh.nodes[static_cast<std::size_t>(sample[a])].coords, u.values[static_cast<std::size_t>(sample[a])],
               mesh.nodes[static_cast<std::size_t>(sample[b])].coords, u.values[static_cast<std::size_t>(sample[b])]);

  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    const auto uv = u.on_element(e.id);
    Vec<N> bary{};
    double bval = 0.0;
    for (int i = 0; i <= N; ++i) {
      bary = bary + (1.0 / (N + 1)) * pts[i];
      bval += uv[i] / (N + 1);
    }
    bool el_admissible = true;
    if (mode == SeminormMode::interior)
      for (int vid : e.vertices) el_admissible &= !mesh.nodes[static_cast<std::size_t>(vid)].on_boundary;
    if (!el_admissible) continue;
    for (int i = 0; i <= N; ++i) {
      if (!admissible(e.vertices[i])) continue;
      consider(pts[i], uv[i], bary, bval);
      for (int j = i + 1; j <= N; ++j)
        if (admissible(e.vertices[j])) consider(pts[i], uv[i], pts[j], uv[j]);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// quasilinear driver: damped fixed point over frozen scalar coefficients

template <int N>
struct QuasilinearResult {
  FeFunction<N> solution;
  CoefficientField<N> frozen;  // coefficient of the final linear solve
  int iterations = 0;
  double nonlinear_residual = 0.0;
  std::vector<double> change_history;
};

template <int N>
inline CoefficientField<N> coefficient_from_element_values(const Triangulation<N>&,
                                                           std::vector<double> values, double lo,
                                                           double hi) {
  CoefficientField<N> field;
  field.ellipticity = lo;
  field.bound = hi;
  field.per_element = std::move(values);
  field.evaluate = [](const Vec<N>&) { return identity_matrix<N>(); };  // unused with per_element
  return field;
}

template <int N>
inline QuasilinearResult<N> solve_quasilinear(
    const Triangulation<N>& mesh,
    const std::function<double(const Vec<N>&, double, const Vec<N>&)>& coeff, double lo, double hi,
    const LoadData<N>& load, double damping = 0.5, double tol = 1e-8, int max_iterations = 200) {
  if (!(lo > 0.0) || hi < lo) fail(ErrorKind::invalid_data, "invalid coefficient bounds");
  QuasilinearResult<N> out;
  FeFunction<N> u(mesh);

  auto freeze = [&](const FeFunction<N>& w) {
    std::vector<double> vals(mesh.elements.size(), lo);
    for (const auto& e : mesh.elements) {
      const auto pts = mesh.points(e.id);
      Vec<N> c{};
      for (int i = 0; i <= N; ++i) c = c + (1.0 / (N + 1)) * pts[i];
      const std::array<double, N + 1> bary = [] {
        std::array<double, N + 1> b{};
        for (int i = 0; i <= N; ++i) b[i] = 1.0 / (N + 1);
        return b;
      }();
      const double a = coeff(c, w.evaluate(e.id, bary), w.gradient_on(e.id));
      if (!(a >= lo * (1 - 1e-12)) || !(a <= hi * (1 + 1e-12)))
        fail(ErrorKind::invalid_data, "coefficient left its certified bounds");
      vals[static_cast<std::size_t>(e.id)] = a;
    }
    return coefficient_from_element_values<N>(mesh, std::move(vals), lo, hi);
  };

  FeFunction<N> v(mesh);
  CoefficientField<N> frozen;
  for (int it = 0; it < max_iterations; ++it) {
    frozen = freeze(u);
    const auto sys = assemble(mesh, frozen, load);
    v = solve_dirichlet(sys, 1e-12, it > 0 ? &v : nullptr);
    double change = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
      change = std::max(change, std::abs(v.values[i] - u.values[i]));
    out.change_history.push_back(damping * change);
    out.iterations = it + 1;

    if (damping * change <= tol) {
      // self-consistency: residual of the returned iterate against its own
      // frozen coefficient
      const auto check = assemble(mesh, freeze(v), load);
      const auto res = interior_residuals(check, v);
      double rnorm = 0.0, bnorm = 0.0;
      for (double r : res) rnorm += r * r;
      for (int fi : check.free_nodes) bnorm += check.rhs[static_cast<std::size_t>(fi)] * check.rhs[static_cast<std::size_t>(fi)];
      out.nonlinear_residual = bnorm > 0.0 ? std::sqrt(rnorm / bnorm) : std::sqrt(rnorm);
      if (out.nonlinear_residual <= 1e-7) {
        out.solution = v;
        out.frozen = frozen;
        return out;
      }
    }
    for (std::size_t i = 0; i < u.values.size(); ++i)
      u.values[i] += damping * (v.values[i] - u.values[i]);
  }
  fail(ErrorKind::fixed_point_failure,
       "fixed point did not converge in " + std::to_string(max_iterations) + " iterations");
}

}  // namespace dgfem
