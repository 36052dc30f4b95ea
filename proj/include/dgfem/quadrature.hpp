#pragma once

// Symmetric simplex quadrature rules in barycentric form.
// 2D: degrees 1, 2, 4, 6.  3D: degrees 1, 2, 5.

#include <vector>

#include "dgfem/core.hpp"

namespace dgfem {

template <int N>
struct QuadPoint {
  std::array<double, N + 1> bary;
  double weight;  // relative to |T|, weights sum to 1
};

template <int N>
using QuadRule = std::vector<QuadPoint<N>>;

namespace detail {

inline void push_orbit3(QuadRule<2>& r, double a, double b, double c, double w) {
  // all distinct cyclic arrangements of (a, b, c)
  std::array<std::array<double, 3>, 6> perms = {{{a, b, c},
                                                 {a, c, b},
                                                 {b, a, c},
                                                 {b, c, a},
                                                 {c, a, b},
                                                 {c, b, a}}};
  std::vector<std::array<double, 3>> seen;
  for (const auto& p : perms) {
    bool dup = false;
    for (const auto& q : seen)
      if (p == q) dup = true;
    if (!dup) {
      seen.push_back(p);
      r.push_back({{p[0], p[1], p[2]}, 0.0});
    }
  }
  const double each = w;
  for (std::size_t i = r.size() - seen.size(); i < r.size(); ++i) r[i].weight = each;
}

}  // namespace detail

inline const QuadRule<2>& triangle_rule(int degree) {
  static const QuadRule<2> deg1 = {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}};
  static const QuadRule<2> deg2 = {
      {{0.5, 0.5, 0.0}, 1.0 / 3}, {{0.0, 0.5, 0.5}, 1.0 / 3}, {{0.5, 0.0, 0.5}, 1.0 / 3}};
  static const QuadRule<2> deg4 = [] {
    QuadRule<2> r;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    detail::push_orbit3(r, a1, a1, 1 - 2 * a1, w1);
    detail::push_orbit3(r, a2, a2, 1 - 2 * a2, w2);
    return r;
  }();
  static const QuadRule<2> deg6 = [] {
    QuadRule<2> r;
    const double a1 = 0.249286745170910, w1 = 0.116786275726379;
    const double a2 = 0.063089014491502, w2 = 0.050844906370207;
    const double b1 = 0.310352451033785, b2 = 0.636502499121399, b3 = 0.053145049844816,
                 w3 = 0.082851075618374;
    detail::push_orbit3(r, a1, a1, 1 - 2 * a1, w1);
    detail::push_orbit3(r, a2, a2, 1 - 2 * a2, w2);
    detail::push_orbit3(r, b1, b2, b3, w3);
    return r;
  }();
  if (degree <= 1) return deg1;
  if (degree <= 2) return deg2;
  if (degree <= 4) return deg4;
  return deg6;
}

inline const QuadRule<3>& tetrahedron_rule(int degree) {
  static const QuadRule<3> deg1 = {{{0.25, 0.25, 0.25, 0.25}, 1.0}};
  static const QuadRule<3> deg2 = [] {
    QuadRule<3> r;
    const double a = 0.138196601125011, b = 0.585410196624969;
    r.push_back({{b, a, a, a}, 0.25});
    r.push_back({{a, b, a, a}, 0.25});
    r.push_back({{a, a, b, a}, 0.25});
    r.push_back({{a, a, a, b}, 0.25});
    return r;
  }();
  static const QuadRule<3> deg5 = [] {
    // 14-point rule with positive weights
    QuadRule<3> r;
    const double w1 = 0.0734930431163619, a1 = 0.0927352503108912;
    const double w2 = 0.1126879257180162, a2 = 0.3108859192633005;
    const double w3 = 0.0425460207770812, a3 = 0.0455037041256497;
    auto corner = [&](double a, double w) {
      const double b = 1.0 - 3.0 * a;
      r.push_back({{b, a, a, a}, w});
      r.push_back({{a, b, a, a}, w});
      r.push_back({{a, a, b, a}, w});
      r.push_back({{a, a, a, b}, w});
    };
    corner(a1, w1);
    corner(a2, w2);
    const double c = a3, d = 0.5 - a3;
    const std::array<std::array<double, 4>, 6> edges = {{{d, d, c, c},
                                                         {d, c, d, c},
                                                         {d, c, c, d},
                                                         {c, d, d, c},
                                                         {c, d, c, d},
                                                         {c, c, d, d}}};
    for (const auto& e : edges) r.push_back({{e[0], e[1], e[2], e[3]}, w3});
    return r;
  }();
  if (degree <= 1) return deg1;
  if (degree <= 2) return deg2;
  return deg5;
}

template <int N>
inline const QuadRule<N>& simplex_rule(int degree) {
  if constexpr (N == 2)
    return triangle_rule(degree);
  else
    return tetrahedron_rule(degree);
}

}  // namespace dgfem
