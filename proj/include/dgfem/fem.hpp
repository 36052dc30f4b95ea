#pragma once

// Continuous piecewise affine finite elements on simplicial meshes:
// nodal interpolation, nodal lattice operations, exact integrals of P1
// expressions, stiffness/load assembly and a CG Dirichlet solver.

#include <functional>
#include <vector>

#include "dgfem/core.hpp"
#include "dgfem/mesh.hpp"
#include "dgfem/quadrature.hpp"
#include "dgfem/sparse.hpp"

namespace dgfem {

// ---------------------------------------------------------------------------
// basis

template <int N>
inline std::array<Vec<N>, N + 1> lagrange_gradients(const SimplexPoints<N>& p) {
  Mat<N> mt{};  // transpose of the edge matrix
  for (int c = 0; c < N; ++c)
    for (int r = 0; r < N; ++r) mt[c][r] = p[c + 1][r] - p[0][r];
  std::array<Vec<N>, N + 1> g{};
  for (int i = 1; i <= N; ++i) {
    Vec<N> e{};
    e[i - 1] = 1.0;
    g[i] = solve_small<N>(mt, e);
  }
  for (int i = 1; i <= N; ++i) g[0] = g[0] - g[i];  // partition of unity
  return g;
}

// ---------------------------------------------------------------------------
// functions

template <int N>
struct FeFunction {
  const Triangulation<N>* mesh = nullptr;
  std::vector<double> values;

  FeFunction() = default;
  explicit FeFunction(const Triangulation<N>& m) : mesh(&m), values(m.nodes.size(), 0.0) {}
  FeFunction(const Triangulation<N>& m, std::vector<double> v) : mesh(&m), values(std::move(v)) {
    if (values.size() != m.nodes.size())
      fail(ErrorKind::incompatible_operands, "nodal vector length does not match node count");
  }

  double evaluate(int element, const std::array<double, N + 1>& bary) const {
    const auto& e = mesh->elements[static_cast<std::size_t>(element)];
    double s = 0.0;
    for (int i = 0; i <= N; ++i) s += bary[i] * values[static_cast<std::size_t>(e.vertices[i])];
    return s;
  }

  std::array<double, N + 1> on_element(int element) const {
    const auto& e = mesh->elements[static_cast<std::size_t>(element)];
    std::array<double, N + 1> v{};
    for (int i = 0; i <= N; ++i) v[i] = values[static_cast<std::size_t>(e.vertices[i])];
    return v;
  }

  Vec<N> gradient_on(int element) const {
    const auto g = lagrange_gradients<N>(mesh->points(element));
    const auto v = on_element(element);
    Vec<N> grad{};
    for (int i = 0; i <= N; ++i) grad = grad + v[i] * g[i];
    return grad;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  bool zero_trace(double tol = 0.0) const {
    for (const auto& nd : mesh->nodes)
      if (nd.on_boundary && std::abs(values[static_cast<std::size_t>(nd.id)]) > tol) return false;
    return true;
  }
};

template <int N, typename G>
inline FeFunction<N> interpolate(const Triangulation<N>& mesh, G&& g) {
  FeFunction<N> f(mesh);
  for (const auto& nd : mesh.nodes) {
    const double v = g(nd.coords);
    if (!std::isfinite(v))
      fail(ErrorKind::invalid_data, "non-finite value at node " + std::to_string(nd.id));
    f.values[static_cast<std::size_t>(nd.id)] = v;
  }
  return f;
}

template <int N>
inline void require_same_mesh(const FeFunction<N>& a, const FeFunction<N>& b) {
  if (a.mesh != b.mesh) fail(ErrorKind::incompatible_operands, "functions live on different meshes");
}

template <int N>
inline FeFunction<N> nodal_max(const FeFunction<N>& a, const FeFunction<N>& b) {
  require_same_mesh(a, b);
  FeFunction<N> out(*a.mesh);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = std::max(a.values[i], b.values[i]);
  return out;
}

// nodal (u - c)_+
template <int N>
inline FeFunction<N> nodal_positive_part(const FeFunction<N>& u, double c = 0.0) {
  FeFunction<N> out(*u.mesh);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = std::max(u.values[i] - c, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// exact integrals of P1 expressions
//
// All routines below are exact (up to rounding): products of affine functions
// are integrated via barycentric monomial formulas, absolute values and
// positive parts via exact decomposition of the sign regions.

template <int N>
inline double integrate_p1(double vol, const std::array<double, N + 1>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return vol * s / (N + 1);
}

template <int N>
inline double integrate_p1_product(double vol, const std::array<double, N + 1>& a,
                                   const std::array<double, N + 1>& b) {
  double sa = 0.0, sb = 0.0, sab = 0.0;
  for (int i = 0; i <= N; ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] * b[i];
  }
  return vol * (sa * sb + sab) / ((N + 1) * (N + 2));
}

// integral of (sum v_i lambda_i)^m via the complete homogeneous symmetric sum
template <int N>
inline double integrate_p1_power(double vol, const std::array<double, N + 1>& v, int m) {
  std::array<double, 16> h{};
  h[0] = 1.0;
  for (int j = 0; j <= N; ++j)
    for (int k = 1; k <= m; ++k) h[static_cast<std::size_t>(k)] += v[j] * h[static_cast<std::size_t>(k - 1)];
  // note: in-place recurrence over variables computes complete homogeneous sums
  return vol * factorial(N) * factorial(m) / factorial(N + m) * h[static_cast<std::size_t>(m)];
}

namespace detail {

template <int N, typename F>
inline void for_each_composition(int degree, F&& f) {
  std::array<int, N + 1> alpha{};
  const auto rec = [&](auto&& self, int pos, int rem) -> void {
    if (pos == N) {
      alpha[N] = rem;
      f(alpha);
      return;
    }
    for (int k = 0; k <= rem; ++k) {
      alpha[pos] = k;
      self(self, pos + 1, rem - k);
    }
  };
  rec(rec, 0, degree);
}

template <int N>
inline double monomial_coeff(const std::array<double, N + 1>& v, const std::array<int, N + 1>& alpha,
                             int degree) {
  double c = factorial(degree);
  for (int i = 0; i <= N; ++i) {
    c /= factorial(alpha[i]);
    for (int k = 0; k < alpha[i]; ++k) c *= v[i];
  }
  return c;
}

}  // namespace detail

// integral of (sum a_i lambda_i)^p (sum b_i lambda_i)^q
template <int N>
inline double integrate_p1_pair_power(double vol, const std::array<double, N + 1>& a, int p,
                                      const std::array<double, N + 1>& b, int q) {
  double total = 0.0;
  detail::for_each_composition<N>(p, [&](const std::array<int, N + 1>& alpha) {
    const double ca = detail::monomial_coeff<N>(a, alpha, p);
    if (ca == 0.0) return;
    detail::for_each_composition<N>(q, [&](const std::array<int, N + 1>& beta) {
      const double cb = detail::monomial_coeff<N>(b, beta, q);
      if (cb == 0.0) return;
      double fact = 1.0;
      for (int i = 0; i <= N; ++i) fact *= factorial(alpha[i] + beta[i]);
      total += ca * cb * fact / factorial(N + p + q);
    });
  });
  return vol * factorial(N) * total;
}

// integral over { v >= 0 } of v * w for affine v, w given by vertex values
template <int N>
inline double integrate_p1_positive_weighted(const SimplexPoints<N>& pts,
                                             const std::array<double, N + 1>& v,
                                             const std::array<double, N + 1>& w) {
  double total = 0.0;
  for (const auto& sub : positive_region<N>(v)) {
    SimplexPoints<N> sp{};
    std::array<double, N + 1> sv{}, sw{};
    for (int i = 0; i <= N; ++i) {
      sp[i] = bary_to_point<N>(pts, sub.bary[i]);
      double vv = 0.0, ww = 0.0;
      for (int k = 0; k <= N; ++k) {
        vv += sub.bary[i][k] * v[k];
        ww += sub.bary[i][k] * w[k];
      }
      sv[i] = vv;
      sw[i] = ww;
    }
    total += integrate_p1_product<N>(volume<N>(sp), sv, sw);
  }
  return total;
}

template <int N>
inline double integrate_p1_abs(const SimplexPoints<N>& pts, const std::array<double, N + 1>& v) {
  std::array<double, N + 1> ones{}, neg{};
  for (int i = 0; i <= N; ++i) {
    ones[i] = 1.0;
    neg[i] = -v[i];
  }
  return integrate_p1_positive_weighted<N>(pts, v, ones) +
         integrate_p1_positive_weighted<N>(pts, neg, ones);
}

// integral of |a b| for affine a, b
template <int N>
inline double integrate_abs_product(const SimplexPoints<N>& pts, const std::array<double, N + 1>& a,
                                    const std::array<double, N + 1>& b) {
  double total = 0.0;
  std::array<double, N + 1> na{};
  for (int i = 0; i <= N; ++i) na[i] = -a[i];
  for (int pass = 0; pass < 2; ++pass) {
    const auto& av = pass == 0 ? a : na;
    for (const auto& sub : positive_region<N>(av)) {
      SimplexPoints<N> sp{};
      std::array<double, N + 1> sa{}, sb{};
      for (int i = 0; i <= N; ++i) {
        sp[i] = bary_to_point<N>(pts, sub.bary[i]);
        double va = 0.0, vb = 0.0;
        for (int k = 0; k <= N; ++k) {
          va += sub.bary[i][k] * av[k];
          vb += sub.bary[i][k] * b[k];
        }
        sa[i] = va;
        sb[i] = vb;
      }
      // on this region |a b| = (+-a) * |b|
      std::array<double, N + 1> nb{};
      for (int i = 0; i <= N; ++i) nb[i] = -sb[i];
      total += integrate_p1_positive_weighted<N>(sp, sb, sa) +
               integrate_p1_positive_weighted<N>(sp, nb, sa);
    }
  }
  return total;
}

// L2 norm of (u - g) with an elementwise quadrature of the given degree
template <int N, typename G>
inline double l2_error(const FeFunction<N>& u, G&& g, int degree = 6) {
  const auto& rule = simplex_rule<N>(degree);
  double total = 0.0;
  for (const auto& e : u.mesh->elements) {
    const auto pts = u.mesh->points(e.id);
    const auto v = u.on_element(e.id);
    double acc = 0.0;
    for (const auto& qp : rule) {
      double uh = 0.0;
      for (int i = 0; i <= N; ++i) uh += qp.bary[i] * v[i];
      const double d = uh - g(bary_to_point<N>(pts, qp.bary));
      acc += qp.weight * d * d;
    }
    total += e.volume * acc;
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// data fields

template <int N>
struct CoefficientField {
  std::function<Mat<N>(const Vec<N>&)> evaluate;
  double ellipticity = 1.0;  // lower spectral bound
  double bound = 1.0;        // upper spectral bound
  // optional explicit scalar per element; takes precedence over `evaluate`
  std::vector<double> per_element;

  static CoefficientField identity() {
    CoefficientField f;
    f.evaluate = [](const Vec<N>&) { return identity_matrix<N>(); };
    return f;
  }
  static CoefficientField scalar(std::function<double(const Vec<N>&)> s, double lo, double hi) {
    CoefficientField f;
    f.evaluate = [s = std::move(s)](const Vec<N>& x) { return scaled_identity<N>(s(x)); };
    f.ellipticity = lo;
    f.bound = hi;
    return f;
  }

  // per-element constant representative, sampled at the barycenter
  Mat<N> on_element(const Triangulation<N>& mesh, int element) const {
    if (!per_element.empty()) return scaled_identity<N>(per_element[static_cast<std::size_t>(element)]);
    const auto pts = mesh.points(element);
    Vec<N> c{};
    for (int i = 0; i <= N; ++i) c = c + (1.0 / (N + 1)) * pts[i];
    Mat<N> a = evaluate(c);
    for (int r = 0; r < N; ++r)
      for (int s = r + 1; s < N; ++s) {
        const double m = 0.5 * (a[r][s] + a[s][r]);
        a[r][s] = a[s][r] = m;
      }
    return a;
  }
};

// worst-case spectral margins of the ellipticity certificate over elements
template <int N>
struct EllipticityAudit {
  double min_eigen = 0.0;
  double max_eigen = 0.0;
  bool pass(const CoefficientField<N>& a, double tol = 1e-10) const {
    return min_eigen >= a.ellipticity - tol && max_eigen <= a.bound + tol;
  }
};

template <int N>
inline EllipticityAudit<N> audit_ellipticity(const Triangulation<N>& mesh,
                                             const CoefficientField<N>& a) {
  EllipticityAudit<N> out;
  out.min_eigen = std::numeric_limits<double>::infinity();
  out.max_eigen = -std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.elements) {
    const auto [lo, hi] = symmetric_eigen_range<N>(a.on_element(mesh, e.id));
    out.min_eigen = std::min(out.min_eigen, lo);
    out.max_eigen = std::max(out.max_eigen, hi);
  }
  return out;
}

template <int N>
struct LoadData {
  std::function<double(const Vec<N>&)> f;   // scalar source, may be empty
  std::function<Vec<N>(const Vec<N>&)> F;   // flux source, may be empty
  std::function<Vec<N>(const Vec<N>&)> G;   // dominating field, may be empty
  double delta = 0.5;

  double p_exponent() const { return N / (1.0 - delta); }
  double q_exponent() const { return N / (2.0 - delta); }
  double two_star() const { return N == 2 ? 8.0 : 2.0 * N / (N - 2.0); }

  LoadData with_f(std::function<double(const Vec<N>&)> nf) const {
    LoadData out = *this;
    out.f = std::move(nf);
    return out;
  }
};

template <int N, typename Field>
inline double lp_norm_scalar(const Triangulation<N>& mesh, Field&& field, double p, int degree = 4) {
  const auto& rule = simplex_rule<N>(degree);
  double total = 0.0;
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    double acc = 0.0;
    for (const auto& qp : rule) acc += qp.weight * std::pow(std::abs(field(bary_to_point<N>(pts, qp.bary))), p);
    total += e.volume * acc;
  }
  return std::pow(total, 1.0 / p);
}

template <int N, typename Field>
inline double lp_norm_vector(const Triangulation<N>& mesh, Field&& field, double p, int degree = 4) {
  return lp_norm_scalar<N>(mesh, [&field](const Vec<N>& x) { return norm(field(x)); }, p, degree);
}

struct LoadNorms {
  double f_q = 0.0;  // ||f||_{L^q}
  double F_p = 0.0;  // ||F||_{L^p}
  double G_p = 0.0;  // ||G||_{L^p}
};

template <int N>
inline LoadNorms load_norms(const Triangulation<N>& mesh, const LoadData<N>& load) {
  if (!(load.delta > 0.0) || !(load.delta < 1.0))
    fail(ErrorKind::invalid_data, "exponent parameter must lie in (0, 1)");
  LoadNorms out;
  if (load.f) out.f_q = lp_norm_scalar<N>(mesh, load.f, load.q_exponent());
  if (load.F) out.F_p = lp_norm_vector<N>(mesh, load.F, load.p_exponent());
  if (load.G) out.G_p = lp_norm_vector<N>(mesh, load.G, load.p_exponent());
  return out;
}

// ---------------------------------------------------------------------------
// assembly

template <int N>
struct StiffnessSystem {
  const Triangulation<N>* mesh = nullptr;
  SparseMatrix matrix;          // full matrix, all nodes
  std::vector<double> rhs;      // load vector, all nodes
  std::vector<char> on_boundary;
  std::vector<int> free_nodes;

  double scale() const {
    double bmax = 0.0;
    for (double v : rhs) bmax = std::max(bmax, std::abs(v));
    return matrix.inf_norm() + bmax;
  }
};

template <int N>
inline std::array<std::array<double, N + 1>, N + 1> local_stiffness(const SimplexPoints<N>& pts,
                                                                    const Mat<N>& a) {
  const auto g = lagrange_gradients<N>(pts);
  const double vol = volume<N>(pts);
  std::array<std::array<double, N + 1>, N + 1> k{};
  for (int i = 0; i <= N; ++i)
    for (int j = i; j <= N; ++j) {
      const double v = vol * dot(matvec<N>(a, g[j]), g[i]);
      k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      k[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
    }
  return k;
}

template <int N>
inline StiffnessSystem<N> assemble(const Triangulation<N>& mesh, const CoefficientField<N>& a,
                                   const LoadData<N>& load) {
  if (!(a.ellipticity > 0.0) || a.bound < a.ellipticity)
    fail(ErrorKind::invalid_data, "invalid ellipticity certificate");
  StiffnessSystem<N> sys;
  sys.mesh = &mesh;
  sys.matrix = SparseMatrix(static_cast<int>(mesh.nodes.size()));
  sys.rhs.assign(mesh.nodes.size(), 0.0);

  const auto& f_rule = simplex_rule<N>(2);
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    const Mat<N> at = a.on_element(mesh, e.id);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c)
        if (!std::isfinite(at[r][c]))
          fail(ErrorKind::invalid_data, "non-finite coefficient on element " + std::to_string(e.id));
    const auto k = local_stiffness<N>(pts, at);
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= N; ++j)
        sys.matrix.add(e.vertices[i], e.vertices[j], k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

    if (load.f) {
      for (const auto& qp : f_rule) {
        const double fv = load.f(bary_to_point<N>(pts, qp.bary));
        if (!std::isfinite(fv))
          fail(ErrorKind::invalid_data, "non-finite source on element " + std::to_string(e.id));
        for (int i = 0; i <= N; ++i)
          sys.rhs[static_cast<std::size_t>(e.vertices[i])] += e.volume * qp.weight * fv * qp.bary[i];
      }
    }
    if (load.F) {
      Vec<N> c{};
      for (int i = 0; i <= N; ++i) c = c + (1.0 / (N + 1)) * pts[i];
      const Vec<N> fv = load.F(c);
      if (!finite<N>(fv))
        fail(ErrorKind::invalid_data, "non-finite flux source on element " + std::to_string(e.id));
      const auto g = lagrange_gradients<N>(pts);
      for (int i = 0; i <= N; ++i)
        sys.rhs[static_cast<std::size_t>(e.vertices[i])] += e.volume * dot(fv, g[i]);
    }
  }
  sys.matrix.compress();

  sys.on_boundary.assign(mesh.nodes.size(), 0);
  for (const auto& nd : mesh.nodes) {
    sys.on_boundary[static_cast<std::size_t>(nd.id)] = nd.on_boundary ? 1 : 0;
    if (!nd.on_boundary) sys.free_nodes.push_back(nd.id);
  }
  return sys;
}

template <int N>
inline FeFunction<N> solve_dirichlet(const StiffnessSystem<N>& sys, double tolerance = 1e-11,
                                     const FeFunction<N>* initial = nullptr) {
  const auto& mesh = *sys.mesh;
  std::vector<int> global_to_free(mesh.nodes.size(), -1);
  for (std::size_t i = 0; i < sys.free_nodes.size(); ++i)
    global_to_free[static_cast<std::size_t>(sys.free_nodes[i])] = static_cast<int>(i);

  SparseMatrix kff(static_cast<int>(sys.free_nodes.size()));
  std::vector<double> bf(sys.free_nodes.size(), 0.0);
  for (std::size_t i = 0; i < sys.free_nodes.size(); ++i) {
    const int gi = sys.free_nodes[i];
    bf[i] = sys.rhs[static_cast<std::size_t>(gi)];
    sys.matrix.for_each_in_row(gi, [&](int c, double v) {
      const int fc = global_to_free[static_cast<std::size_t>(c)];
      if (fc >= 0) kff.add(static_cast<int>(i), fc, v);
    });
  }
  kff.compress();
  std::vector<double> guess;
  if (initial && initial->values.size() == mesh.nodes.size()) {
    guess.resize(sys.free_nodes.size());
    for (std::size_t i = 0; i < sys.free_nodes.size(); ++i)
      guess[i] = initial->values[static_cast<std::size_t>(sys.free_nodes[i])];
  }
  const auto cg = conjugate_gradient(kff, bf, tolerance, 0, guess.empty() ? nullptr : &guess);

  FeFunction<N> u(mesh);
  for (std::size_t i = 0; i < sys.free_nodes.size(); ++i)
    u.values[static_cast<std::size_t>(sys.free_nodes[i])] = cg.solution[i];
  return u;
}

// residuals r_i = (K u - b)_i over interior nodes; the discrete variational
// identity holds when all of them vanish
template <int N>
inline std::vector<double> interior_residuals(const StiffnessSystem<N>& sys, const FeFunction<N>& u) {
  const auto ku = sys.matrix.multiply(u.values);
  std::vector<double> r;
  r.reserve(sys.free_nodes.size());
  for (int i : sys.free_nodes) r.push_back(ku[static_cast<std::size_t>(i)] - sys.rhs[static_cast<std::size_t>(i)]);
  return r;
}

// ---------------------------------------------------------------------------
// interpolation commutator

struct CommutatorDefect {
  double max_value = 0.0;     // max_T | u w - I_h(u w) |
  double max_gradient = 0.0;  // max_T h_T | grad(u w - I_h(u w)) |
};

namespace detail {

// max over the simplex of |u w - l| where l interpolates the vertex products;
// exact via edge extrema and stationary points of the quadratic
template <int N>
inline double max_abs_product_defect(const SimplexPoints<N>& pts, const std::array<double, N + 1>& u,
                                     const std::array<double, N + 1>& w) {
  double best = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j)
      best = std::max(best, std::abs((u[i] - u[j]) * (w[i] - w[j])) / 4.0);

  // interior stationary point: grad(u w) constant part cancels the interpolant
  const auto g = lagrange_gradients<N>(pts);
  Vec<N> gu{}, gw{}, gl{};
  double cu = 0.0, cw = 0.0, cl = 0.0;
  for (int i = 0; i <= N; ++i) {
    gu = gu + u[i] * g[i];
    gw = gw + w[i] * g[i];
    gl = gl + u[i] * w[i] * g[i];
  }
  // affine parts evaluated at vertex 0
  cu = u[0];
  cw = w[0];
  cl = u[0] * w[0];
  const Vec<N> x0 = pts[0];
  Mat<N> m{};
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) m[r][c] = gu[r] * gw[c] + gw[r] * gu[c];
  Vec<N> rhs{};
  for (int r = 0; r < N; ++r) rhs[r] = gl[r] - cu * gw[r] - cw * gu[r] + (dot(gu, x0) * gw[r] + dot(gw, x0) * gu[r]);
  bool solvable = true;
  Vec<N> xc{};
  try {
    xc = solve_small<N>(m, rhs);
  } catch (const Error&) {
    solvable = false;
  }
  if (solvable && contains_point<N>(pts, xc, 1e-12)) {
    const double uu = dot(gu, xc - x0) + cu;
    const double ww = dot(gw, xc - x0) + cw;
    double ll = cl + dot(gl, xc - x0);
    best = std::max(best, std::abs(uu * ww - ll));
  }
  if constexpr (N == 3) {
    // faces are triangles: recurse with the face data
    for (int skip = 0; skip <= 3; ++skip) {
      SimplexPoints<2> fp{};
      std::array<double, 3> fu{}, fw{};
      // project the face onto its own plane coordinates
      std::array<Vec<3>, 3> verts{};
      int k = 0;
      for (int i = 0; i <= 3; ++i)
        if (i != skip) {
          verts[static_cast<std::size_t>(k)] = pts[i];
          fu[static_cast<std::size_t>(k)] = u[i];
          fw[static_cast<std::size_t>(k)] = w[i];
          ++k;
        }
      const Vec<3> e1 = verts[1] - verts[0];
      Vec<3> e2 = verts[2] - verts[0];
      const double n1 = norm(e1);
      if (n1 <= 0.0) continue;
      const Vec<3> t1 = (1.0 / n1) * e1;
      e2 = e2 - dot(e2, t1) * t1;
      const double n2 = norm(e2);
      if (n2 <= 0.0) continue;
      const Vec<3> t2 = (1.0 / n2) * e2;
      fp[0] = {0.0, 0.0};
      fp[1] = {dot(verts[1] - verts[0], t1), dot(verts[1] - verts[0], t2)};
      fp[2] = {dot(verts[2] - verts[0], t1), dot(verts[2] - verts[0], t2)};
      best = std::max(best, max_abs_product_defect<2>(fp, fu, fw));
    }
  }
  return best;
}

}  // namespace detail

template <int N>
inline std::vector<CommutatorDefect> product_commutator_defect(const FeFunction<N>& u,
                                                               const FeFunction<N>& w) {
  require_same_mesh(u, w);
  const auto& mesh = *u.mesh;
  std::vector<CommutatorDefect> out(mesh.elements.size());
  for (const auto& e : mesh.elements) {
    const auto pts = mesh.points(e.id);
    const auto uv = u.on_element(e.id);
    const auto wv = w.on_element(e.id);
    CommutatorDefect d;
    d.max_value = detail::max_abs_product_defect<N>(pts, uv, wv);
    // grad(u w - I_h(u w)) is affine; its norm peaks at a vertex
    const auto g = lagrange_gradients<N>(pts);
    Vec<N> gu{}, gw{}, gl{};
    for (int i = 0; i <= N; ++i) {
      gu = gu + uv[i] * g[i];
      gw = gw + wv[i] * g[i];
      gl = gl + uv[i] * wv[i] * g[i];
    }
    for (int k = 0; k <= N; ++k) {
      const Vec<N> grad = uv[k] * gw + wv[k] * gu - gl;
      d.max_gradient = std::max(d.max_gradient, e.diameter * norm(grad));
    }
    out[static_cast<std::size_t>(e.id)] = d;
  }
  return out;
}

// min over sampled points of I_h(eta^q) - eta^q (zero or positive for
// nonnegative nodal data by convexity)
template <int N>
inline double interpolant_power_defect_min(const FeFunction<N>& eta, int q, int lattice = 6) {
  const auto& mesh = *eta.mesh;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.elements) {
    const auto v = eta.on_element(e.id);
    detail::for_each_composition<N>(lattice, [&](const std::array<int, N + 1>& alpha) {
      std::array<double, N + 1> bary{};
      for (int i = 0; i <= N; ++i) bary[i] = static_cast<double>(alpha[i]) / lattice;
      double val = 0.0, interp = 0.0;
      for (int i = 0; i <= N; ++i) {
        val += bary[i] * v[i];
        interp += bary[i] * std::pow(v[i], q);
      }
      worst = std::min(worst, interp - std::pow(val, q));
    });
  }
  return worst;
}

}  // namespace dgfem
