#pragma once

// Simplex geometry: measures, quality radii, point/segment/simplex distances
// and exact positive-region decompositions of affine functions on simplices.

#include <algorithm>
#include <vector>

#include "dgfem/core.hpp"

namespace dgfem {

template <int N>
using SimplexPoints = std::array<Vec<N>, N + 1>;

template <int N>
inline double signed_volume(const SimplexPoints<N>& p) {
  Mat<N> m{};
  for (int c = 0; c < N; ++c)
    for (int r = 0; r < N; ++r) m[r][c] = p[c + 1][r] - p[0][r];
  if constexpr (N == 2) {
    return 0.5 * (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
  } else {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return det / 6.0;
  }
}

template <int N>
inline double volume(const SimplexPoints<N>& p) {
  return std::abs(signed_volume<N>(p));
}

template <int N>
inline double diameter(const SimplexPoints<N>& p) {
  double h = 0.0;
  for (int i = 0; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j) h = std::max(h, dist(p[i], p[j]));
  return h;
}

inline double triangle_area_3d(const Vec<3>& a, const Vec<3>& b, const Vec<3>& c) {
  const Vec<3> u = b - a, v = c - a;
  const Vec<3> w = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0]};
  return 0.5 * norm(w);
}

// Radius of the inscribed ball: n |T| / (sum of facet measures).
template <int N>
inline double inradius(const SimplexPoints<N>& p) {
  double facet_sum = 0.0;
  if constexpr (N == 2) {
    facet_sum = dist(p[0], p[1]) + dist(p[1], p[2]) + dist(p[2], p[0]);
  } else {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<Vec<3>, 3> f{};
      int k = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) f[k++] = p[i];
      facet_sum += triangle_area_3d(f[0], f[1], f[2]);
    }
  }
  return static_cast<double>(N) * volume<N>(p) / facet_sum;
}

// Barycentric coordinates of x with respect to the simplex.
template <int N>
inline std::array<double, N + 1> barycentric(const SimplexPoints<N>& p, const Vec<N>& x) {
  Mat<N> m{};
  for (int c = 0; c < N; ++c)
    for (int r = 0; r < N; ++r) m[r][c] = p[c + 1][r] - p[0][r];
  const Vec<N> rhs = x - p[0];
  const Vec<N> lam = solve_small<N>(m, rhs);
  std::array<double, N + 1> b{};
  double s = 0.0;
  for (int i = 0; i < N; ++i) {
    b[i + 1] = lam[i];
    s += lam[i];
  }
  b[0] = 1.0 - s;
  return b;
}

template <int N>
inline bool contains_point(const SimplexPoints<N>& p, const Vec<N>& x, double tol = 1e-12) {
  const auto b = barycentric<N>(p, x);
  for (double v : b)
    if (v < -tol) return false;
  return true;
}

template <int N>
inline Vec<N> bary_to_point(const SimplexPoints<N>& p, const std::array<double, N + 1>& b) {
  Vec<N> x{};
  for (int i = 0; i <= N; ++i) x = x + b[i] * p[i];
  return x;
}

// ---------------------------------------------------------------------------
// closest-point queries

template <int N>
inline Vec<N> closest_point_on_segment(const Vec<N>& a, const Vec<N>& b, const Vec<N>& x) {
  const Vec<N> d = b - a;
  const double dd = dot(d, d);
  double t = dd > 0.0 ? dot(x - a, d) / dd : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return a + t * d;
}

inline Vec<3> closest_point_on_triangle_3d(const std::array<Vec<3>, 3>& tri, const Vec<3>& x) {
  // Ericson-style region classification.
  const Vec<3>&a = tri[0], &b = tri[1], &c = tri[2];
  const Vec<3> ab = b - a, ac = c - a, ax = x - a;
  const double d1 = dot(ab, ax), d2 = dot(ac, ax);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec<3> bx = x - b;
  const double d3 = dot(ab, bx), d4 = dot(ac, bx);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec<3> cx = x - c;
  const double d5 = dot(ab, cx), d6 = dot(ac, cx);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return a + v * ab + w * ac;
}

template <int N>
inline Vec<N> closest_point_on_simplex(const SimplexPoints<N>& p, const Vec<N>& x) {
  if (contains_point<N>(p, x, 0.0)) return x;
  if constexpr (N == 2) {
    Vec<2> best{};
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const Vec<2> q = closest_point_on_segment<2>(p[i], p[(i + 1) % 3], x);
      const double d = dist(q, x);
      if (d < bd) {
        bd = d;
        best = q;
      }
    }
    return best;
  } else {
    Vec<3> best{};
    double bd = std::numeric_limits<double>::infinity();
    for (int skip = 0; skip < 4; ++skip) {
      std::array<Vec<3>, 3> f{};
      int k = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) f[k++] = p[i];
      const Vec<3> q = closest_point_on_triangle_3d(f, x);
      const double d = dist(q, x);
      if (d < bd) {
        bd = d;
        best = q;
      }
    }
    return best;
  }
}

template <int N>
inline double distance_point_simplex(const SimplexPoints<N>& p, const Vec<N>& x) {
  return dist(closest_point_on_simplex<N>(p, x), x);
}

template <int N>
inline bool ball_intersects_simplex(const SimplexPoints<N>& p, const Vec<N>& center, double radius) {
  return distance_point_simplex<N>(p, center) <= radius;
}

template <int N>
inline double segment_segment_distance(const Vec<N>& p1, const Vec<N>& q1, const Vec<N>& p2,
                                        const Vec<N>& q2) {
  const Vec<N> d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-300 && e <= 1e-300) return dist(p1, p2);
  if (a <= 1e-300) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 1e-300) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2), denom = a * e - b * b;
      if (denom > 1e-300) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return dist(p1 + s * d1, p2 + t * d2);
}

// Distance between two disjoint simplices (0 if they intersect).
template <int N>
inline double simplex_simplex_distance(const SimplexPoints<N>& a, const SimplexPoints<N>& b) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= N; ++i) d = std::min(d, distance_point_simplex<N>(b, a[i]));
  for (int i = 0; i <= N; ++i) d = std::min(d, distance_point_simplex<N>(a, b[i]));
  if constexpr (N == 3) {
    static const std::array<std::array<int, 2>, 6> edges = {
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    for (const auto& ea : edges)
      for (const auto& eb : edges)
        d = std::min(d, segment_segment_distance<3>(a[ea[0]], a[ea[1]], b[eb[0]], b[eb[1]]));
  }
  return d;
}

// ---------------------------------------------------------------------------
// positive-region decomposition of an affine function on a simplex
//
// Returns sub-simplices (with inherited barycentric coordinates relative to
// the parent) covering { x in T : v(x) >= 0 } for the affine v with the given
// vertex values.  Exact up to floating-point rounding of edge crossings.

template <int N>
struct SubSimplex {
  // each sub-vertex stored as barycentric coordinates w.r.t. parent simplex
  std::array<std::array<double, N + 1>, N + 1> bary;
};

namespace detail {

template <int N>
inline std::array<double, N + 1> edge_cut(const std::array<double, N + 1>& a,
                                          const std::array<double, N + 1>& b, double va,
                                          double vb) {
  const double t = va / (va - vb);  // v(a + t (b-a)) = 0
  std::array<double, N + 1> r{};
  for (int i = 0; i <= N; ++i) r[i] = a[i] + t * (b[i] - a[i]);
  return r;
}

}  // namespace detail

template <int N>
inline std::vector<SubSimplex<N>> positive_region(const std::array<double, N + 1>& values);

template <>
inline std::vector<SubSimplex<2>> positive_region<2>(const std::array<double, 3>& v) {
  using B = std::array<double, 3>;
  static const std::array<B, 3> corner = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  std::vector<int> pos, neg;
  for (int i = 0; i < 3; ++i) (v[i] > 0.0 ? pos : neg).push_back(i);
  std::vector<SubSimplex<2>> out;
  if (pos.empty()) return out;
  if (neg.empty()) {
    out.push_back({{corner[0], corner[1], corner[2]}});
    return out;
  }
  if (pos.size() == 1) {
    const int p = pos[0], m0 = neg[0], m1 = neg[1];
    const B c0 = detail::edge_cut<2>(corner[p], corner[m0], v[p], v[m0]);
    const B c1 = detail::edge_cut<2>(corner[p], corner[m1], v[p], v[m1]);
    out.push_back({{corner[p], c0, c1}});
    return out;
  }
  // two positive vertices: positive region is a quadrilateral
  const int p0 = pos[0], p1 = pos[1], m = neg[0];
  const B c0 = detail::edge_cut<2>(corner[p0], corner[m], v[p0], v[m]);
  const B c1 = detail::edge_cut<2>(corner[p1], corner[m], v[p1], v[m]);
  out.push_back({{corner[p0], corner[p1], c1}});
  out.push_back({{corner[p0], c1, c0}});
  return out;
}

template <>
inline std::vector<SubSimplex<3>> positive_region<3>(const std::array<double, 4>& v) {
  using B = std::array<double, 4>;
  static const std::array<B, 4> corner = {
      {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
  std::vector<int> pos, neg;
  for (int i = 0; i < 4; ++i) (v[i] > 0.0 ? pos : neg).push_back(i);
  std::vector<SubSimplex<3>> out;
  auto cut = [&](int a, int b) { return detail::edge_cut<3>(corner[a], corner[b], v[a], v[b]); };
  if (pos.empty()) return out;
  if (neg.empty()) {
    out.push_back({{corner[0], corner[1], corner[2], corner[3]}});
    return out;
  }
  if (pos.size() == 1) {
    const int p = pos[0];
    out.push_back({{corner[p], cut(p, neg[0]), cut(p, neg[1]), cut(p, neg[2])}});
    return out;
  }
  if (pos.size() == 2) {
    // wedge with triangular faces (p0, e00, e01) and (p1, e10, e11)
    const int p0 = pos[0], p1 = pos[1], m0 = neg[0], m1 = neg[1];
    const B e00 = cut(p0, m0), e01 = cut(p0, m1), e10 = cut(p1, m0), e11 = cut(p1, m1);
    out.push_back({{corner[p0], e00, e01, corner[p1]}});
    out.push_back({{e00, e01, corner[p1], e10}});
    out.push_back({{e01, corner[p1], e10, e11}});
    return out;
  }
  // three positive vertices: complement of a corner tetrahedron at the
  // negative vertex.  Returned as the wedge decomposition of the frustum.
  const int m = neg[0];
  const std::array<int, 3> p = {pos[0], pos[1], pos[2]};
  const B c0 = cut(p[0], m), c1 = cut(p[1], m), c2 = cut(p[2], m);
  out.push_back({{corner[p[0]], corner[p[1]], corner[p[2]], c0}});
  out.push_back({{corner[p[1]], corner[p[2]], c0, c1}});
  out.push_back({{corner[p[2]], c0, c1, c2}});
  return out;
}

}  // namespace dgfem
