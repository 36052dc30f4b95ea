#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dgfem/conditions.hpp"
#include "dgfem/problems.hpp"

using namespace dgfem;

TEST_CASE("singular exponent root-finding") {
  // unit ratio: smooth case, exponent 1
  CHECK(kellogg_exponent(1.0) == doctest::Approx(1.0).epsilon(1e-10));
  // classical benchmark ratio for exponent 0.1
  CHECK(kellogg_exponent(161.4476387975881) == doctest::Approx(0.1).epsilon(1e-8));
  // inverse lookup for exponent 1/2 and consistency of the round trip
  const double ratio_half = kellogg_ratio_for_exponent(0.5);
  CHECK(ratio_half == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-8));
  CHECK(kellogg_exponent(ratio_half) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS((void)kellogg_exponent(-1.0), Error);
}

TEST_CASE("angular profile: continuity and weighted flux continuity") {
  for (double ratio : {5.0, 3.0 + 2.0 * std::sqrt(2.0), 25.0}) {
    const double gamma = kellogg_exponent(ratio);
    const auto mu = kellogg_angular_profile(gamma);
    auto coeff = [&](double theta) {
      theta = std::fmod(theta + 2 * M_PI, 2 * M_PI);
      return (theta < M_PI / 2.0) || (theta >= M_PI && theta < 3 * M_PI / 2) ? ratio : 1.0;
    };
    const double eps = 1e-7;
    for (double theta_c : {0.0, M_PI / 2, M_PI, 3 * M_PI / 2}) {
      // continuity of the profile
      CHECK(mu(theta_c - eps) == doctest::Approx(mu(theta_c + eps)).epsilon(1e-4));
      // continuity of a(theta) d(mu)/d(theta) across the interface
      const double left = coeff(theta_c - eps) * (mu(theta_c) - mu(theta_c - eps)) / eps;
      const double right = coeff(theta_c + eps) * (mu(theta_c + eps) - mu(theta_c)) / eps;
      CHECK(left == doctest::Approx(right).epsilon(1e-3));
    }
    // the profile changes sign (the singular function is genuinely two-signed)
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 400; ++i) {
      const double v = mu(2 * M_PI * i / 400.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
  }
}

TEST_CASE("checkerboard benchmark: certificates and exact solution") {
  const auto p = checkerboard(5.0);
  CHECK(p.coefficient.ellipticity == doctest::Approx(1.0));
  CHECK(p.coefficient.bound == doctest::Approx(5.0));
  CHECK(p.reference_exponent.has_value());
  CHECK(*p.reference_exponent == doctest::Approx(kellogg_exponent(5.0)).epsilon(1e-12));

  const auto m = problem_mesh(p, 8);
  CHECK(audit_ellipticity(m, p.coefficient).pass(p.coefficient));
  CHECK(check_nonobtuse(m, p.coefficient).pass);

  // exact solution vanishes on the boundary and the source is bounded
  for (const auto& nd : m.nodes)
    if (nd.on_boundary) CHECK(p.exact_solution(nd.coords) == 0.0);
  double fmax = 0.0;
  for (const auto& e : m.elements) {
    const auto pts = m.points(e.id);
    for (int i = 0; i < 3; ++i) fmax = std::max(fmax, std::abs(p.load.f(pts[size_t(i)])));
  }
  CHECK(fmax < 1e3);
  CHECK(std::isfinite(fmax));

  // misaligned resolution is rejected
  CHECK_THROWS_AS((void)problem_mesh(p, 7), Error);
}

TEST_CASE("checkerboard discrete solutions converge to the singular profile") {
  const auto p = checkerboard(kellogg_ratio_for_exponent(0.5));
  std::vector<double> errors;
  for (int cells : {8, 16, 32}) {
    const auto m = problem_mesh(p, cells);
    const auto u = solve_dirichlet(assemble(m, p.coefficient, p.load));
    errors.push_back(l2_error(u, p.exact_solution));
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < errors[1]);
  CHECK(errors[2] < 0.45 * errors[0]);
}

TEST_CASE("sign-changing flux problem") {
  const auto p = sign_changing_flux();
  Rng rng(11);
  for (int cells : {8, 16}) {
    const auto m = problem_mesh(p, cells);
    const auto rep = verify_assumption_star<2>(m, p.load.F, p.load.G, &rng);
    CHECK(rep.pass);

    // without the dominating field the audit fails near the jump lines
    const auto bare = verify_assumption_star<2>(m, p.load.F, nullptr, &rng);
    CHECK_FALSE(bare.pass);
    CHECK(bare.max_violation > 0.0);

    // reflected field passes with the reflected companion
    const auto freflect = [F = p.load.F](const Vec<2>& x) {
      const Vec<2> y = {-x[0], x[1]};
      const Vec<2> v = F(y);
      return Vec<2>{-v[0], v[1]};
    };
    const auto greflect = [G = p.load.G](const Vec<2>& x) {
      const Vec<2> y = {-x[0], x[1]};
      const Vec<2> v = G(y);
      return Vec<2>{-v[0], v[1]};
    };
    CHECK(verify_assumption_star<2>(m, freflect, greflect, &rng).pass);
  }
}

TEST_CASE("manufactured problems") {
  // polynomial example with the identity coefficient
  const auto p = manufactured_polynomial();
  const Vec<2> x = {0.3, 0.7};
  CHECK(p.load.f(x) == doctest::Approx(2 * x[1] * (1 - x[1]) + 2 * x[0] * (1 - x[0])).epsilon(1e-12));

  // diagonal coefficient variant: f = 4 y(1-y) + 2 x(1-x)
  CoefficientField<2> diag;
  diag.evaluate = [](const Vec<2>&) {
    Mat<2> a{};
    a[0][0] = 2.0;
    a[1][1] = 1.0;
    return a;
  };
  diag.ellipticity = 1.0;
  diag.bound = 2.0;
  const auto p2 = manufactured(
      [](const Vec<2>& y) { return y[0] * (1 - y[0]) * y[1] * (1 - y[1]); },
      [](const Vec<2>& y) {
        return Vec<2>{(1 - 2 * y[0]) * y[1] * (1 - y[1]), y[0] * (1 - y[0]) * (1 - 2 * y[1])};
      },
      [](const Vec<2>& y) { return 4 * y[1] * (1 - y[1]) + 2 * y[0] * (1 - y[0]); }, diag);
  CHECK(p2.load.f(Vec<2>{0.5, 0.5}) == doctest::Approx(1.5).epsilon(1e-12));

  // zero solution: zero source, discrete solution vanishes
  const auto pz = manufactured([](const Vec<2>&) { return 0.0; },
                               [](const Vec<2>&) { return Vec<2>{0.0, 0.0}; },
                               [](const Vec<2>&) { return 0.0; }, CoefficientField<2>::identity());
  const auto m = problem_mesh(pz, 4);
  const auto u = solve_dirichlet(assemble(m, pz.coefficient, pz.load));
  CHECK(u.max_abs() == 0.0);

  // inconsistent derivatives are rejected
  CHECK_THROWS_AS((void)manufactured([](const Vec<2>& y) { return y[0] * y[0]; },
                                     [](const Vec<2>&) {
                                       return Vec<2>{0.0, 0.0};  // wrong gradient
                                     },
                                     [](const Vec<2>&) { return -2.0; },
                                     CoefficientField<2>::identity()),
                  Error);
}
