#pragma once

// Structural audits: coefficient-weighted nonobtuseness and uniform
// acuteness, acute connection paths between vertices, discrete subsolution
// verification and the dominating-field inequality audit.

#include <optional>
#include <vector>

#include "dgfem/fem.hpp"
#include "dgfem/mesh.hpp"

namespace dgfem {

// ---------------------------------------------------------------------------
// nonobtuseness / acuteness

struct CouplingOffender {
  int element;
  int local_i;
  int local_j;
  double coupling;
};

struct NonobtuseCertificate {
  bool pass = false;
  double worst_coupling = 0.0;  // max over elements and i != j
  std::vector<CouplingOffender> offenders;
};

template <int N>
inline NonobtuseCertificate check_nonobtuse(const Triangulation<N>& mesh,
                                            const CoefficientField<N>& a, double tol = 1e-12) {
  NonobtuseCertificate cert;
  cert.worst_coupling = -std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.elements) {
    const auto k = local_stiffness<N>(mesh.points(e.id), a.on_element(mesh, e.id));
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= N; ++j) {
        if (i == j) continue;
        const double c = k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        cert.worst_coupling = std::max(cert.worst_coupling, c);
        if (c > tol) cert.offenders.push_back({e.id, i, j, c});
      }
  }
  cert.pass = cert.offenders.empty();
  return cert;
}

struct AcutenessCertificate {
  bool nonobtuse = false;
  double gamma = 0.0;  // uniform acuteness margin (0 when a zero coupling exists)
  double tau = 0.0;    // worst best-path step margin over all vertex pairs
  int n_max = 0;       // longest connection path
};

// ---------------------------------------------------------------------------
// acute connection paths
//
// Connects two vertices of a simplex through vertices of the same simplex so
// that each step has a negative global coupling with a quantified margin.

struct AcutePathStep {
  int from_node;
  int to_node;
  double margin;      // -<i,i+1> / <i,i>   (source-relative)
  double dest_ratio;  // -<i,i+1> / <i+1,i+1> (used by neighbor-value bounds)
};

struct AcutePath {
  bool found = false;
  std::vector<int> nodes;  // y_0 .. y_N
  std::vector<AcutePathStep> steps;
  double tau = 0.0;  // min step margin along the path
};

// Global stiffness couplings without load assembly.
template <int N>
inline SparseMatrix stiffness_couplings(const Triangulation<N>& mesh,
                                        const CoefficientField<N>& a) {
  SparseMatrix k(static_cast<int>(mesh.nodes.size()));
  for (const auto& e : mesh.elements) {
    const auto loc = local_stiffness<N>(mesh.points(e.id), a.on_element(mesh, e.id));
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= N; ++j)
        k.add(e.vertices[i], e.vertices[j], loc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  k.compress();
  return k;
}

template <int N>
inline AcutePath acute_path(const Triangulation<N>& mesh, const SparseMatrix& couplings,
                            int element, int node_i, int node_j) {
  const auto& e = mesh.elements[static_cast<std::size_t>(element)];
  std::vector<int> verts(e.vertices.begin(), e.vertices.end());
  const bool i_ok = std::find(verts.begin(), verts.end(), node_i) != verts.end();
  const bool j_ok = std::find(verts.begin(), verts.end(), node_j) != verts.end();
  if (!i_ok || !j_ok)
    fail(ErrorKind::invalid_operand, "path endpoints must be vertices of the element");

  AcutePath best;
  if (node_i == node_j) {
    best.found = true;
    best.nodes = {node_i};
    best.tau = 1.0;
    return best;
  }

  auto margin = [&](int from, int to) {
    const double coupling = couplings.coeff(from, to);
    const double self = couplings.coeff(from, from);
    return self > 0.0 ? -coupling / self : -std::numeric_limits<double>::infinity();
  };
  auto dest_ratio = [&](int from, int to) {
    const double coupling = couplings.coeff(from, to);
    const double self = couplings.coeff(to, to);
    return self > 0.0 ? -coupling / self : -std::numeric_limits<double>::infinity();
  };

  // enumerate simple paths within the vertex set, maximizing the minimum
  // step margin; simplices are tiny so exhaustive search is exact
  std::vector<int> order;
  std::vector<char> used(verts.size(), 0);
  const int start = static_cast<int>(std::find(verts.begin(), verts.end(), node_i) - verts.begin());
  const int goal = static_cast<int>(std::find(verts.begin(), verts.end(), node_j) - verts.begin());
  double best_tau = 0.0;

  const auto dfs = [&](auto&& self, int at, double min_margin) -> void {
    if (at == goal) {
      // prefer the larger worst-step margin; on ties, the shorter path
      const bool better =
          !best.found || min_margin > best_tau * (1.0 + 1e-12) ||
          (min_margin >= best_tau * (1.0 - 1e-12) && order.size() < best.nodes.size());
      if (better) {
        best.found = min_margin > 0.0;
        best_tau = min_margin;
        best.tau = min_margin;
        best.nodes.clear();
        best.steps.clear();
        best.nodes.push_back(node_i);
        for (std::size_t s = 0; s + 1 < order.size(); ++s) {
          const int from = verts[static_cast<std::size_t>(order[s])];
          const int to = verts[static_cast<std::size_t>(order[s + 1])];
          best.nodes.push_back(to);
          best.steps.push_back({from, to, margin(from, to), dest_ratio(from, to)});
        }
      }
      return;
    }
    for (std::size_t k = 0; k < verts.size(); ++k) {
      if (used[k]) continue;
      const double m = margin(verts[static_cast<std::size_t>(order.back())], verts[k]);
      if (m <= 0.0) continue;
      used[k] = 1;
      order.push_back(static_cast<int>(k));
      self(self, static_cast<int>(k), std::min(min_margin, m));
      order.pop_back();
      used[k] = 0;
    }
  };
  order.push_back(start);
  used[static_cast<std::size_t>(start)] = 1;
  dfs(dfs, start, std::numeric_limits<double>::infinity());
  return best;
}

template <int N>
inline AcutePath acute_path(const Triangulation<N>& mesh, const CoefficientField<N>& a, int element,
                            int node_i, int node_j) {
  const auto k = stiffness_couplings(mesh, a);
  return acute_path(mesh, k, element, node_i, node_j);
}

template <int N>
inline AcutenessCertificate check_uniform_acute(const Triangulation<N>& mesh,
                                                const CoefficientField<N>& a) {
  AcutenessCertificate cert;
  const auto nonobtuse = check_nonobtuse(mesh, a);
  cert.nonobtuse = nonobtuse.pass;
  if (!cert.nonobtuse) return cert;  // gamma stays 0

  cert.gamma = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    const auto k = local_stiffness<N>(pts, a.on_element(mesh, e.id));
    for (int i = 0; i <= N; ++i)
      for (int j = i + 1; j <= N; ++j) {
        // energy norms of the basis gradients; this keeps the margin
        // invariant under positive rescaling of the coefficient
        const double denom = std::sqrt(std::max(k[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)], 0.0) *
                                       std::max(k[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)], 0.0));
        if (denom <= 0.0) continue;
        cert.gamma = std::min(cert.gamma, -k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / denom);
      }
  }
  cert.gamma = std::max(cert.gamma, 0.0);
  if (!std::isfinite(cert.gamma)) cert.gamma = 0.0;

  // path constants measured over every vertex pair of every element
  const auto couplings = stiffness_couplings(mesh, a);
  cert.tau = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.elements)
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= N; ++j) {
        if (i == j) continue;
        const auto path = acute_path(mesh, couplings, e.id, e.vertices[i], e.vertices[j]);
        if (!path.found) {
          cert.tau = 0.0;
          return cert;
        }
        cert.tau = std::min(cert.tau, path.tau);
        cert.n_max = std::max(cert.n_max, static_cast<int>(path.steps.size()));
      }
  if (!std::isfinite(cert.tau)) cert.tau = 0.0;
  return cert;
}

// ---------------------------------------------------------------------------
// subsolution verification

struct SubsolutionReport {
  bool pass = false;
  double max_residual = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  double tolerance = 0.0;
  std::vector<double> residuals;  // one per interior node
};

// A function is a discrete subsolution iff its residual against every
// interior basis function is nonpositive; nonnegative test functions are
// exactly the nonnegative combinations of those, so basis testing is
// complete.
template <int N>
inline SubsolutionReport verify_subsolution(const FeFunction<N>& u, const StiffnessSystem<N>& sys,
                                            double rel_tol = 1e-10) {
  if (u.mesh != sys.mesh) fail(ErrorKind::incompatible_operands, "function/system mesh mismatch");
  if (!u.zero_trace(0.0)) fail(ErrorKind::invalid_operand, "function must vanish on the boundary");
  SubsolutionReport rep;
  rep.residuals = interior_residuals(sys, u);
  double bmax = 0.0;
  for (double b : sys.rhs) bmax = std::max(bmax, std::abs(b));
  rep.scale = sys.matrix.inf_norm() * u.max_abs() + bmax;
  rep.tolerance = rel_tol * std::max(rep.scale, 1e-300);
  for (double r : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
  rep.pass = rep.max_residual <= rep.tolerance;
  return rep;
}

template <int N>
inline SubsolutionReport verify_subsolution(const FeFunction<N>& u, const CoefficientField<N>& a,
                                            const LoadData<N>& load, double rel_tol = 1e-10) {
  const auto sys = assemble(*u.mesh, a, load);
  return verify_subsolution(u, sys, rel_tol);
}

// Nodal-max closure: given two verified subsolutions whose flux terms are
// dominated (G_1, G_2), their nodal maximum must be a subsolution for the
// pointwise-max source and the summed dominating field.
template <int N>
struct NodalMaxReport {
  SubsolutionReport combined;
  bool inputs_ok = false;
  bool pass = false;
};

template <int N>
inline NodalMaxReport<N> verify_nodal_max_theorem(const FeFunction<N>& u, const FeFunction<N>& v,
                                                  const LoadData<N>& load1, const LoadData<N>& load2,
                                                  const CoefficientField<N>& a,
                                                  double rel_tol = 1e-10) {
  require_same_mesh(u, v);
  NodalMaxReport<N> rep;
  const auto ru = verify_subsolution(u, a, load1, rel_tol);
  const auto rv = verify_subsolution(v, a, load2, rel_tol);
  rep.inputs_ok = ru.pass && rv.pass;

  LoadData<N> combined;
  combined.delta = load1.delta;
  const auto f1 = load1.f, f2 = load2.f;
  if (f1 && f2)
    combined.f = [f1, f2](const Vec<N>& x) { return std::max(f1(x), f2(x)); };
  else if (f1)
    combined.f = [f1](const Vec<N>& x) { return std::max(f1(x), 0.0); };
  else if (f2)
    combined.f = [f2](const Vec<N>& x) { return std::max(f2(x), 0.0); };
  const auto g1 = load1.G, g2 = load2.G;
  if (g1 && g2)
    combined.F = [g1, g2](const Vec<N>& x) { return g1(x) + g2(x); };
  else if (g1)
    combined.F = g1;
  else if (g2)
    combined.F = g2;

  rep.combined = verify_subsolution(nodal_max(u, v), a, combined, rel_tol);
  rep.pass = rep.inputs_ok && rep.combined.pass;
  return rep;
}

// ---------------------------------------------------------------------------
// dominating-field audit
//
// Necessary-condition check of the domination inequality: it is evaluated
// against every interior basis function and a batch of random nonnegative
// combinations, with the same elementwise quadrature the assembler uses.
// Passing certifies the discrete inequalities the lattice theorems consume;
// it does not prove the distributional statement for black-box fields.

struct StarReport {
  bool pass = false;
  double max_violation = 0.0;  // max over tests of |F-term| - G-term
  double scale = 0.0;
};

template <int N>
inline StarReport verify_assumption_star(const Triangulation<N>& mesh,
                                         const std::function<Vec<N>(const Vec<N>&)>& F,
                                         const std::function<Vec<N>(const Vec<N>&)>& G,
                                         Rng* rng = nullptr, int random_combos = 100,
                                         double rel_tol = 1e-10) {
  std::vector<double> bF(mesh.nodes.size(), 0.0), bG(mesh.nodes.size(), 0.0);
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    Vec<N> c{};
    for (int i = 0; i <= N; ++i) c = c + (1.0 / (N + 1)) * pts[i];
    const auto g = lagrange_gradients<N>(pts);
    const Vec<N> fv = F ? F(c) : Vec<N>{};
    const Vec<N> gv = G ? G(c) : Vec<N>{};
    for (int i = 0; i <= N; ++i) {
      bF[static_cast<std::size_t>(e.vertices[i])] += e.volume * dot(fv, g[i]);
      bG[static_cast<std::size_t>(e.vertices[i])] += e.volume * dot(gv, g[i]);
    }
  }
  StarReport rep;
  for (const auto& nd : mesh.nodes) {
    rep.scale = std::max(rep.scale, std::abs(bF[static_cast<std::size_t>(nd.id)]));
    rep.scale = std::max(rep.scale, std::abs(bG[static_cast<std::size_t>(nd.id)]));
  }
  const double tol = rel_tol * std::max(rep.scale, 1e-300);
  for (const auto& nd : mesh.nodes) {
    if (nd.on_boundary) continue;
    const double viol = std::abs(bF[static_cast<std::size_t>(nd.id)]) - bG[static_cast<std::size_t>(nd.id)];
    rep.max_violation = std::max(rep.max_violation, viol);
  }
  if (rng) {
    for (int t = 0; t < random_combos; ++t) {
      double sF = 0.0, sG = 0.0, cmax = 0.0;
      for (const auto& nd : mesh.nodes) {
        if (nd.on_boundary) continue;
        const double c = rng->uniform(0.0, 1.0) < 0.3 ? rng->uniform(0.0, 1.0) : 0.0;
        cmax = std::max(cmax, c);
        sF += c * bF[static_cast<std::size_t>(nd.id)];
        sG += c * bG[static_cast<std::size_t>(nd.id)];
      }
      if (cmax > 0.0) rep.max_violation = std::max(rep.max_violation, (std::abs(sF) - sG) / cmax);
    }
  }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

}  // namespace dgfem
