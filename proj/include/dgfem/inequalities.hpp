#pragma once

// Ratio engines for the discrete energy and measure inequalities: each
// routine evaluates one inequality with exact elementwise integrals and
// returns an InequalityRecord for regression tracking across mesh families.

#include <sstream>
#include <string>
#include <vector>

#include "dgfem/conditions.hpp"
#include "dgfem/fem.hpp"
#include "dgfem/mesh.hpp"

namespace dgfem {

struct InequalityRecord {
  std::string name;
  int level = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::string param_json;
  bool hypothesis_met = true;  // false: guarded precondition failed, record skipped
  bool violation = false;      // true: an unconditional inequality failed
};

inline std::string csv_header() { return "name,level,lhs,rhs,ratio,param_json"; }

inline std::string to_csv_row(const InequalityRecord& r) {
  std::ostringstream os;
  os << r.name << ',' << r.level << ',' << format_double(r.lhs) << ',' << format_double(r.rhs)
     << ',' << format_double(r.ratio) << ',' << (r.param_json.empty() ? "{}" : r.param_json);
  return os.str();
}

namespace detail {

inline double safe_ratio(double lhs, double rhs) {
  if (rhs == 0.0) return 0.0;
  return lhs / rhs;
}

class ParamJson {
public:
  ParamJson& add(const std::string& key, double value) {
    if (!body_.empty()) body_ += ",";
    body_ += "\"" + key + "\":" + format_double(value);
    return *this;
  }
  ParamJson& add(const std::string& key, int value) {
    if (!body_.empty()) body_ += ",";
    body_ += "\"" + key + "\":" + std::to_string(value);
    return *this;
  }
  std::string str() const { return "{" + body_ + "}"; }

private:
  std::string body_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// support of a P1 function: union of closed elements with a nonzero vertex

template <int N>
inline std::vector<char> support_elements(const FeFunction<N>& v, double tol = 0.0) {
  const auto& mesh = *v.mesh;
  std::vector<char> in(mesh.elements.size(), 0);
  for (const auto& e : mesh.elements)
    for (int vid : e.vertices)
      if (std::abs(v.values[static_cast<std::size_t>(vid)]) > tol) in[static_cast<std::size_t>(e.id)] = 1;
  return in;
}

// ---------------------------------------------------------------------------
// energy (reverse Poincare) inequality for truncated subsolutions

// rhs data provided by the caller so families reuse one norm computation
struct CaccioppoliData {
  double g_norm_p = 0.0;  // dominating-field L^p norm
  double f_norm_q = 0.0;  // source L^q norm
  double delta = 0.5;
};

template <int N>
inline InequalityRecord caccioppoli_ratio(const FeFunction<N>& u, double c,
                                          const FeFunction<N>& cutoff, const CaccioppoliData& data,
                                          int level = 0) {
  require_same_mesh(u, cutoff);
  const auto& mesh = *u.mesh;
  const auto v = nodal_positive_part(u, c);
  const auto v_supp = support_elements(v);
  const auto eta_supp = support_elements(cutoff);

  double lhs = 0.0, grad_term = 0.0, eta_power = 0.0, eta_grad_sq = 0.0, overlap = 0.0;
  const int two_star = N == 2 ? 8 : 6;
  for (const auto& e : mesh.elements) {
    const auto vv = v.on_element(e.id);
    const auto ev = cutoff.on_element(e.id);
    const Vec<N> grad_v = v.gradient_on(e.id);
    const Vec<N> grad_eta = cutoff.gradient_on(e.id);
    lhs += dot(grad_v, grad_v) * integrate_p1_power<N>(e.volume, ev, 2);
    grad_term += dot(grad_eta, grad_eta) * integrate_p1_power<N>(e.volume, vv, 2);
    if (v_supp[static_cast<std::size_t>(e.id)]) {
      eta_power += integrate_p1_power<N>(e.volume, ev, two_star);
      eta_grad_sq += dot(grad_eta, grad_eta) * e.volume;
      if (eta_supp[static_cast<std::size_t>(e.id)]) overlap += e.volume;
    }
  }
  const double eta_norm_sq = std::pow(eta_power, 2.0 / two_star);
  const double data_term = (data.g_norm_p * data.g_norm_p + data.f_norm_q * data.f_norm_q) *
                           (eta_norm_sq + eta_grad_sq) *
                           std::pow(overlap, 2.0 * data.delta / N);
  InequalityRecord rec;
  rec.name = "caccioppoli";
  rec.level = level;
  rec.lhs = lhs;
  rec.rhs = grad_term + data_term;
  rec.ratio = detail::safe_ratio(lhs, rec.rhs);
  rec.violation = rec.rhs == 0.0 && lhs > 1e-12;
  rec.param_json = detail::ParamJson().add("c", c).add("delta", data.delta).str();
  return rec;
}

// ---------------------------------------------------------------------------
// Poincare inequalities

template <int N>
inline InequalityRecord poincare_patch_ratio(const FeFunction<N>& v, int node, int level = 0) {
  const auto& mesh = *v.mesh;
  const auto elems = patch(mesh, node);
  bool has_zero = false;
  double h_i = 0.0;
  for (int e : elems) {
    h_i = std::max(h_i, mesh.elements[static_cast<std::size_t>(e)].diameter);
    for (int vid : mesh.elements[static_cast<std::size_t>(e)].vertices)
      has_zero |= v.values[static_cast<std::size_t>(vid)] == 0.0;
  }
  if (!has_zero)
    fail(ErrorKind::invalid_operand, "function has no zero on the closed patch of node " +
                                         std::to_string(node));
  double abs_int = 0.0, grad_int = 0.0;
  for (int e : elems) {
    abs_int += integrate_p1_abs<N>(mesh.points(e), v.on_element(e));
    grad_int += norm(v.gradient_on(e)) * mesh.elements[static_cast<std::size_t>(e)].volume;
  }
  InequalityRecord rec;
  rec.name = "poincare_patch";
  rec.level = level;
  rec.lhs = abs_int;
  rec.rhs = h_i * grad_int;
  rec.ratio = detail::safe_ratio(rec.lhs, rec.rhs);
  rec.param_json = detail::ParamJson().add("node", node).add("h", h_i).str();
  return rec;
}

template <int N>
inline InequalityRecord poincare_vh_ratio(const FeFunction<N>& v, const std::vector<int>& region,
                                          double gamma_required, int level = 0) {
  const auto& mesh = *v.mesh;
  for (double val : v.values)
    if (val < 0.0) fail(ErrorKind::invalid_operand, "function must be nonnegative");

  double area = 0.0, zero_patch_area = 0.0;
  Vec<N> lo{}, hi{};
  bool first = true;
  for (int e : region) {
    const auto& el = mesh.elements[static_cast<std::size_t>(e)];
    area += el.volume;
    bool zero_vertex = false;
    for (int vid : el.vertices) {
      zero_vertex |= v.values[static_cast<std::size_t>(vid)] == 0.0;
      const auto& c = mesh.nodes[static_cast<std::size_t>(vid)].coords;
      if (first) {
        lo = hi = c;
        first = false;
      }
      for (int d = 0; d < N; ++d) {
        lo[d] = std::min(lo[d], c[d]);
        hi[d] = std::max(hi[d], c[d]);
      }
    }
    if (zero_vertex) zero_patch_area += el.volume;
  }
  InequalityRecord rec;
  rec.name = "poincare_vh";
  rec.level = level;
  const double gamma_measured = area > 0.0 ? zero_patch_area / area : 0.0;
  rec.param_json = detail::ParamJson().add("gamma", gamma_measured).str();
  if (gamma_measured < gamma_required) {
    rec.hypothesis_met = false;  // guarded: record skipped, not a violation
    return rec;
  }
  const double big_r = dist(lo, hi);  // bounding-box diagonal of the region
  double abs_int = 0.0, grad_int = 0.0;
  for (int e : region) {
    abs_int += integrate_p1<N>(mesh.elements[static_cast<std::size_t>(e)].volume, v.on_element(e));
    grad_int += norm(v.gradient_on(e)) * mesh.elements[static_cast<std::size_t>(e)].volume;
  }
  rec.lhs = abs_int;
  rec.rhs = big_r * grad_int;
  rec.ratio = detail::safe_ratio(rec.lhs, rec.rhs);
  return rec;
}

// ---------------------------------------------------------------------------
// level-set measure (weak-type) bound
//
// |A_{k+1}| <= c_n 4^{k+1} / lambda_inf^2 * integral of (eta_k trunc_k)^2.
// The constant c_n = 1 / min_{a,b} avg_T(lambda_a^2 lambda_b^2) makes the
// bound unconditional for arbitrary nodal data: c_2 = 90, c_3 = 210.

template <int N>
inline InequalityRecord weak_type_check(const FeFunction<N>& u, double c0, int k, double lambda_inf,
                                        const FeFunction<N>& eta_k, const FeFunction<N>& eta_k1,
                                        int level = 0) {
  require_same_mesh(u, eta_k);
  require_same_mesh(u, eta_k1);
  if (!(lambda_inf > 0.0)) fail(ErrorKind::invalid_data, "lambda_inf must be positive");
  const auto& mesh = *u.mesh;
  const double lam_k = (1.0 - std::pow(2.0, -k)) * lambda_inf;
  const double lam_k1 = (1.0 - std::pow(2.0, -(k + 1))) * lambda_inf;

  double measure = 0.0, energy = 0.0;
  for (const auto& e : mesh.elements) {
    const auto uv = u.on_element(e.id);
    const auto ek = eta_k.on_element(e.id);
    const auto ek1 = eta_k1.on_element(e.id);
    bool eta_pos = false, trunc_pos = false;
    std::array<double, N + 1> trunc_k{};
    for (int i = 0; i <= N; ++i) {
      eta_pos |= ek1[i] > 0.0;
      trunc_pos |= uv[i] - lam_k1 - c0 > 0.0;
      trunc_k[i] = std::max(uv[i] - lam_k - c0, 0.0);
    }
    if (eta_pos && trunc_pos) measure += e.volume;
    energy += integrate_p1_pair_power<N>(e.volume, ek, 2, trunc_k, 2);
  }
  const double cn = N == 2 ? 90.0 : 210.0;
  InequalityRecord rec;
  rec.name = "weak_type";
  rec.level = level;
  rec.lhs = measure;
  rec.rhs = cn * std::pow(2.0, 2 * (k + 1)) / (lambda_inf * lambda_inf) * energy;
  rec.ratio = detail::safe_ratio(rec.lhs, rec.rhs);
  rec.violation = rec.lhs > rec.rhs * (1.0 + 1e-10) + 1e-300;
  rec.param_json = detail::ParamJson().add("k", k).add("lambda_inf", lambda_inf).add("c0", c0).str();
  return rec;
}

// ---------------------------------------------------------------------------
// convexity (Jensen) defect and interpolation stability

template <int N>
inline InequalityRecord jensen_and_stability_audit(const FeFunction<N>& eta, int q, int level = 0) {
  for (double v : eta.values)
    if (v < 0.0) fail(ErrorKind::invalid_operand, "nodal values must be nonnegative");
  InequalityRecord rec;
  rec.name = "jensen";
  rec.level = level;
  rec.lhs = interpolant_power_defect_min(eta, q);
  rec.rhs = 0.0;
  rec.violation = rec.lhs < -1e-12;
  rec.param_json = detail::ParamJson().add("q", q).str();
  return rec;
}

// stability ratio (max_T |f - I_h f| + max_T h_T |grad I_h f|) / (max_T h_T |grad f|),
// sampled on a barycentric lattice for a smooth probe
template <int N, typename F, typename GradF>
inline double interpolation_stability_ratio(const Triangulation<N>& mesh, F&& f, GradF&& grad_f,
                                            int lattice = 8) {
  const auto fh = interpolate(mesh, f);
  double numer = 0.0, denom = 0.0;
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    double max_diff = 0.0, max_grad_f = 0.0;
    detail::for_each_composition<N>(lattice, [&](const std::array<int, N + 1>& alpha) {
      std::array<double, N + 1> bary{};
      for (int i = 0; i <= N; ++i) bary[i] = static_cast<double>(alpha[i]) / lattice;
      const Vec<N> x = bary_to_point<N>(pts, bary);
      max_diff = std::max(max_diff, std::abs(f(x) - fh.evaluate(e.id, bary)));
      max_grad_f = std::max(max_grad_f, norm(grad_f(x)));
    });
    const double h = e.diameter;
    numer = std::max(numer, max_diff + h * norm(fh.gradient_on(e.id)));
    denom = std::max(denom, h * max_grad_f);
  }
  return denom > 0.0 ? numer / denom : 0.0;
}

// ---------------------------------------------------------------------------
// product rearrangement: (prod of maxima) / (mean of |product|)

template <int N>
inline double prod_rearrange_ratio(const SimplexPoints<N>& pts, const std::array<double, N + 1>& a,
                                   const std::array<double, N + 1>& b) {
  double max_a = 0.0, max_b = 0.0;
  for (int i = 0; i <= N; ++i) {
    max_a = std::max(max_a, std::abs(a[i]));
    max_b = std::max(max_b, std::abs(b[i]));
  }
  const double mean_abs = integrate_abs_product<N>(pts, a, b) / volume<N>(pts);
  if (mean_abs == 0.0) return max_a * max_b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return max_a * max_b / mean_abs;
}

// dense scan for the two-sided envelope constant of P1 x P1 products; the
// value is invariant under affine maps of the element, hence mesh-independent
inline double measure_prod_rearrange_bound(int grid = 24) {
  const SimplexPoints<2> ref = {{{0, 0}, {1, 0}, {0, 1}}};
  // normalize max |a| = max |b| = 1; a's peak can be moved to vertex 0 by a
  // joint relabeling, b's peak position must be scanned
  auto ratio_at = [&](int peak_b, const std::array<double, 4>& p) {
    const std::array<double, 3> a = {1.0, p[0], p[1]};
    std::array<double, 3> b{};
    b[static_cast<std::size_t>(peak_b)] = 1.0;
    b[static_cast<std::size_t>((peak_b + 1) % 3)] = p[2];
    b[static_cast<std::size_t>((peak_b + 2) % 3)] = p[3];
    return prod_rearrange_ratio<2>(ref, a, b);
  };
  double worst = 1.0;
  int best_peak = 0;
  std::array<double, 4> best_p{};
  for (int peak_b = 0; peak_b < 3; ++peak_b)
    for (int s1 = 0; s1 <= grid; ++s1)
      for (int t1 = 0; t1 <= grid; ++t1)
        for (int s2 = 0; s2 <= grid; ++s2)
          for (int t2 = 0; t2 <= grid; ++t2) {
            const std::array<double, 4> p = {-1.0 + 2.0 * s1 / grid, -1.0 + 2.0 * t1 / grid,
                                             -1.0 + 2.0 * s2 / grid, -1.0 + 2.0 * t2 / grid};
            const double r = ratio_at(peak_b, p);
            if (r > worst) {
              worst = r;
              best_peak = peak_b;
              best_p = p;
            }
          }
  // local polish by coordinate descent with shrinking steps
  double step = 2.0 / grid;
  while (step > 1e-7) {
    bool improved = false;
    for (int d = 0; d < 4; ++d)
      for (double sgn : {-1.0, 1.0}) {
        auto p = best_p;
        p[static_cast<std::size_t>(d)] = std::clamp(p[static_cast<std::size_t>(d)] + sgn * step, -1.0, 1.0);
        const double r = ratio_at(best_peak, p);
        if (r > worst) {
          worst = r;
          best_p = p;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// regression envelope: max over a family vs max over its first levels

inline bool uniformity_envelope(const std::vector<double>& per_level, std::size_t first, double factor = 2.0) {
  if (per_level.size() <= first) return true;
  double head = 0.0, all = 0.0;
  for (std::size_t i = 0; i < per_level.size(); ++i) {
    all = std::max(all, per_level[i]);
    if (i < first) head = std::max(head, per_level[i]);
  }
  return all <= factor * head + 1e-300;
}

}  // namespace dgfem
