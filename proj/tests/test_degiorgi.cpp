#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dgfem/conditions.hpp"
#include "dgfem/degiorgi.hpp"
#include "dgfem/mesh.hpp"

using namespace dgfem;

namespace {

Box<2> unit_square() { return {{0.0, 0.0}, {1.0, 1.0}}; }

}  // namespace

TEST_CASE("fast geometric convergence bound") {
  // C=1, b=2, alpha=1: bound a_k <= 2^{-(1+k)}
  {
    GeometricIterationParams p{1.0, 2.0, 1.0};
    std::vector<double> a = {0.5};
    for (int k = 0; k < 20; ++k)
      a.push_back(p.C * std::pow(p.b, k) * a.back() * a.back());
    const auto chk = fast_geometric_bound(p, a);
    CHECK(chk.hypothesis_ok);
    CHECK(chk.start_small_enough);
    CHECK(chk.bounded);
    for (size_t k = 0; k < a.size(); ++k)
      CHECK(chk.bounds[k] == doctest::Approx(std::pow(2.0, -1.0 - double(k))).epsilon(1e-13));
  }
  // zero sequence trivially satisfies everything
  {
    const auto chk = fast_geometric_bound({3.0, 5.0, 0.7}, std::vector<double>(10, 0.0));
    CHECK(chk.hypothesis_ok);
    CHECK(chk.bounded);
  }
  // C=2, b=4, alpha=1/2: threshold 2^{-2} 4^{-4} = 1/1024
  {
    GeometricIterationParams p{2.0, 4.0, 0.5};
    std::vector<double> a = {1.0 / 2048.0};
    for (int k = 0; k < 25; ++k)
      a.push_back(p.C * std::pow(p.b, k) * std::pow(a.back(), 1.5));
    const auto chk = fast_geometric_bound(p, a);
    CHECK(chk.start_small_enough);
    CHECK(chk.bounds[0] == doctest::Approx(1.0 / 1024.0).epsilon(1e-13));
    CHECK(chk.bounded);
  }
  // hypothesis violation is reported with its index
  {
    std::vector<double> bad = {0.1, 0.2};
    const auto chk = fast_geometric_bound({1.0, 2.0, 1.0}, bad);
    CHECK_FALSE(chk.hypothesis_ok);
    CHECK(chk.first_violation == 1);
  }
}

TEST_CASE("telescoping square bound") {
  // c == 1, a_1 = 1: a_{k+1} <= 1/sqrt(k)
  {
    std::vector<double> c(40, 1.0), a = {1.0};
    for (int k = 0; k < 39; ++k) {
      const double ck = c[size_t(k)];
      // equality recursion x^2 = c (a_k - x)
      const double x = (-ck + std::sqrt(ck * ck + 4.0 * ck * a.back())) / 2.0;
      a.push_back(x);
    }
    const auto chk = telescoping_bound(c, a);
    CHECK(chk.hypothesis_ok);
    CHECK(chk.bounded);
    for (size_t k = 1; k < a.size(); ++k)
      CHECK(chk.bounds[k] == doctest::Approx(1.0 / std::sqrt(double(k))).epsilon(1e-13));
  }
  // zero sequence
  {
    const auto chk = telescoping_bound(std::vector<double>(10, 2.0), std::vector<double>(10, 0.0));
    CHECK(chk.hypothesis_ok);
    CHECK(chk.bounded);
  }
  // randomized admissible rollouts stay below the envelope; the decrement is
  // drawn first so the hypothesis holds without cancellation
  {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> c, a = {rng.uniform(0.1, 5.0)};
      for (int k = 0; k < 30; ++k) {
        const double drop = a.back() * rng.uniform(0.2, 0.9);
        const double next = a.back() - drop;
        c.push_back(next * next / drop * rng.uniform(1.0, 3.0));
        a.push_back(next);
      }
      const auto chk = telescoping_bound(c, a);
      CHECK(chk.hypothesis_ok);
      CHECK(chk.bounded);
    }
  }
}

TEST_CASE("decay-exponent iteration fit") {
  // phi(r) = r with alpha2 = 1/2: hypothesis needs a positive additive term
  {
    std::vector<double> radii, phi;
    for (int j = 16; j >= 0; --j) {
      radii.push_back(std::pow(0.5, j));
      phi.push_back(radii.back());
    }
    CAlphaParams p{0.5, 1.0, 0.5, 0.0, 1.0};
    const auto fit = calpha_iteration_fit(radii, phi, p);
    CHECK(fit.hypothesis_ok);
    CHECK(fit.kappa_small_enough);
    CHECK(fit.envelope_ok);
  }
  // phi identically zero
  {
    std::vector<double> radii = {0.25, 0.5, 1.0};
    std::vector<double> phi = {0.0, 0.0, 0.0};
    const auto fit = calpha_iteration_fit(radii, phi, CAlphaParams{0.5, 1.0, 0.5, 0.0, 0.0});
    CHECK(fit.hypothesis_ok);
    CHECK(fit.envelope_ok);
  }
  // phi(r) = r^{alpha2} exactly: envelope constant near 1
  {
    std::vector<double> radii, phi;
    for (int j = 12; j >= 0; --j) {
      radii.push_back(std::pow(0.5, j));
      phi.push_back(std::pow(radii.back(), 0.5));
    }
    const auto fit = calpha_iteration_fit(radii, phi, CAlphaParams{0.5, 1.0, 0.5, 0.0, 1.0});
    CHECK(fit.hypothesis_ok);
    CHECK(fit.envelope_ok);
    CHECK(fit.measured_constant <= 1.0 + 1e-9);
  }
  // too-large kappa is flagged
  {
    std::vector<double> radii = {0.25, 0.5, 1.0};
    std::vector<double> phi = {0.1, 0.2, 0.4};
    const auto fit = calpha_iteration_fit(radii, phi, CAlphaParams{0.5, 1.0, 0.5, 0.9, 1.0});
    CHECK_FALSE(fit.kappa_small_enough);
  }
  // decreasing samples rejected
  {
    std::vector<double> radii = {0.25, 0.5, 1.0};
    std::vector<double> phi = {1.0, 0.5, 0.2};
    CHECK_THROWS_AS((void)calpha_iteration_fit(radii, phi, CAlphaParams{}), Error);
  }
}

TEST_CASE("interpolated cutoffs") {
  const auto m = kuhn_triangulate<2>(64, unit_square());
  const Vec<2> center = {0.5, 0.5};
  const double radius = 0.125;

  const auto cut0 = build_cutoff(m, center, radius, 0);
  // plateau value 1, zero outside the support
  for (const auto& nd : m.nodes) {
    const double d = dist(nd.coords, center);
    if (d <= cut0.plateau_radius) CHECK(cut0.eta.values[size_t(nd.id)] == 1.0);
    if (d >= cut0.support_radius) CHECK(cut0.eta.values[size_t(nd.id)] == 0.0);
    CHECK(cut0.eta.values[size_t(nd.id)] >= 0.0);
    CHECK(cut0.eta.values[size_t(nd.id)] <= 1.0);
  }

  // gradient constants stay bounded over the level index
  for (int k = 0; k <= 5; ++k) {
    const auto a = build_cutoff(m, center, radius, k);
    const auto b = build_cutoff(m, center, radius, k + 1);
    const auto audit = audit_cutoff_pair(a.eta, b.eta, k, radius);
    CHECK(audit.values_in_range);
    CHECK(audit.sandwich_ok);
    CHECK(audit.gradient_constant <= 4.0);  // frozen envelope for this family
  }

  // interior precondition: ball of twice the radius must stay inside
  CHECK_THROWS_AS((void)build_cutoff(m, Vec<2>{0.05, 0.5}, 0.125, 0), Error);
  // boundary variant allows it
  CHECK(build_cutoff(m, Vec<2>{0.05, 0.5}, 0.125, 0, true).eta.values.size() == m.nodes.size());
  // radius below the local mesh size
  CHECK_THROWS_AS((void)build_cutoff(m, center, 1e-4, 0), Error);
}

TEST_CASE("truncation iteration state") {
  const auto m = kuhn_triangulate<2>(32, unit_square());
  const auto u = interpolate(m, [](const Vec<2>& x) {
    return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
  });
  LoadNorms norms;
  norms.f_q = 1.0;
  const auto state = run_truncation_iteration(u, 0.0, Vec<2>{0.5, 0.5}, 0.125, norms, 0.5, 0.5, 2,
                                              6, 1.5);
  REQUIRE(state.lambda.size() == 7);
  // caps increase towards the limit, level sets shrink
  for (size_t k = 1; k < state.lambda.size(); ++k) {
    CHECK(state.lambda[k] > state.lambda[k - 1]);
    CHECK(state.level_measure[k] <= state.level_measure[k - 1] + 1e-15);
  }
  CHECK(state.mu == doctest::Approx(1.0 - 0.25 * 0.25 / 4.0 * 4.0).epsilon(1e-12));
  for (size_t k = 1; k < state.shrink_radius.size(); ++k)
    CHECK(state.shrink_radius[k] <= state.shrink_radius[k - 1]);
}

TEST_CASE("local sup bound record") {
  const auto m = kuhn_triangulate<2>(32, unit_square());
  const auto u = interpolate(m, [](const Vec<2>& x) {
    return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
  });
  LoadNorms norms;
  norms.f_q = 2.0;

  // cap above the maximum: zero left-hand side
  const auto rec0 = local_sup_bound_check(u, Vec<2>{0.5, 0.5}, 0.125, 2.0, norms, 0.5);
  CHECK(rec0.lhs == 0.0);

  const auto rec = local_sup_bound_check(u, Vec<2>{0.5, 0.5}, 0.125, 0.2, norms, 0.5);
  CHECK(rec.lhs > 0.0);
  CHECK(rec.rhs > 0.0);
  CHECK(std::isfinite(rec.ratio));

  // geometry guards
  CHECK_THROWS_AS((void)local_sup_bound_check(u, Vec<2>{0.05, 0.5}, 0.2, 0.0, norms, 0.5), Error);

  // boundary variant: admissible for zero-trace functions near the boundary
  const auto brec = local_sup_bound_check(u, Vec<2>{0.125, 0.5}, 0.125, 0.0, norms, 0.5, 0, true);
  CHECK(std::isfinite(brec.ratio));
  // and rejected when the function is nonzero on nearby boundary nodes
  FeFunction<2> dirty = u;
  for (const auto& nd : m.nodes)
    if (nd.on_boundary && nd.coords[0] < 0.3) dirty.values[size_t(nd.id)] = 0.5;
  CHECK_THROWS_AS(
      (void)local_sup_bound_check(dirty, Vec<2>{0.125, 0.5}, 0.125, 0.0, norms, 0.5, 0, true),
      Error);
}

TEST_CASE("oscillation study at a boundary point") {
  const auto m = kuhn_triangulate<2>(32, unit_square());
  // zero-trace profile: decay towards the boundary edge x = 0
  const auto u = interpolate(m, [](const Vec<2>& x) {
    return std::pow(x[0], 0.75) * std::sin(M_PI * x[1]);
  });
  std::vector<double> radii;
  for (int j = 0; j < 9; ++j) radii.push_back(0.4 * std::pow(2.0, -j / 4.0));
  const auto rep = oscillation_decay_study(u, Vec<2>{0.0, 0.5}, radii, 1.3, 2.0 * std::sqrt(2.0) / 32,
                                           0.25);
  CHECK(rep.fit_points >= 3);
  // the boundary profile has the prescribed decay exponent
  CHECK(rep.alpha == doctest::Approx(0.75).epsilon(0.08));
}

TEST_CASE("neighbor-value bound along acute paths") {
  const auto m = kuhn_triangulate<2>(8, unit_square());
  const auto id = CoefficientField<2>::identity();

  // harmonic-like interior subsolution scaled into [0, 1]
  LoadData<2> load;
  load.f = [](const Vec<2>&) { return 1.0; };
  const auto sys = assemble(m, id, load);
  auto u = solve_dirichlet(sys);
  const double peak = u.max_abs();
  for (auto& v : u.values) v = std::max(0.0, std::min(1.0, v / (1.05 * peak)));
  // rescaled function is still a subsolution of the rescaled load
  LoadData<2> scaled_load;
  scaled_load.f = [peak](const Vec<2>&) { return 1.0 / (1.05 * peak); };
  const auto scaled_sys = assemble(m, id, scaled_load);
  REQUIRE(verify_subsolution(u, scaled_sys).pass);

  LoadNorms norms;
  norms.f_q = lp_norm_scalar<2>(m, scaled_load.f, 4.0 / 3.0);
  int checked = 0;
  for (const auto& e : m.elements) {
    bool interior = true;
    for (int vid : e.vertices) interior &= !m.nodes[size_t(vid)].on_boundary;
    if (!interior) continue;
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; j <= 2; ++j) {
        if (i == j) continue;
        const auto rec = neighbor_value_bound_check(u, scaled_sys, norms, 0.5, e.id,
                                                    e.vertices[i], e.vertices[j]);
        CHECK(rec.pass);
        CHECK(rec.path_length <= 2);
        ++checked;
      }
  }
  CHECK(checked > 0);
}

TEST_CASE("oscillation of affine and constant functions") {
  const auto m = kuhn_triangulate<2>(32, unit_square());
  const auto flat = interpolate(m, [](const Vec<2>&) { return 4.2; });
  std::vector<int> all(m.elements.size());
  std::iota(all.begin(), all.end(), 0);
  CHECK(oscillation(flat, all) == 0.0);
  CHECK(oscillation(flat, BallRegion<2>{{0.5, 0.5}, 0.2}) <= 1e-12);

  const auto lin = interpolate(m, [](const Vec<2>& x) { return x[0]; });
  const double osc = oscillation(lin, BallRegion<2>{{0.5, 0.5}, 0.2});
  CHECK(osc == doctest::Approx(0.4).epsilon(2e-2));

  CHECK_THROWS_AS((void)oscillation(lin, BallRegion<2>{{9.0, 9.0}, 0.1}), Error);
  CHECK_THROWS_AS((void)oscillation(lin, std::vector<int>{}), Error);

  // dyadic decay study of the affine function fits alpha = 1
  std::vector<double> radii;
  for (int j = 0; j < 5; ++j) radii.push_back(0.25 * std::pow(2.0, -j / 2.0));
  const auto rep = oscillation_decay_study(lin, Vec<2>{0.5, 0.5}, radii, 1.2, 2.0 / 32, 0.25);
  CHECK(rep.alpha == doctest::Approx(1.0).epsilon(2e-2));
  // oscillation is monotone in the radius
  for (size_t i = 0; i + 1 < rep.osc_ball.size(); ++i)
    CHECK(rep.osc_ball[i] >= rep.osc_ball[i + 1] - 1e-12);
}

TEST_CASE("Hoelder seminorm estimates") {
  const auto m = kuhn_triangulate<2>(16, unit_square());
  const auto flat = interpolate(m, [](const Vec<2>&) { return 1.0; });
  CHECK(holder_seminorm(flat, 0.5) == 0.0);

  const auto lin = interpolate(m, [](const Vec<2>& x) { return x[0]; });
  CHECK(holder_seminorm(lin, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  // interior mode never exceeds the global estimate
  const auto wild = interpolate(m, [](const Vec<2>& x) { return std::sin(9 * x[0]) * x[1]; });
  CHECK(holder_seminorm(wild, 0.5, SeminormMode::interior) <=
        holder_seminorm(wild, 0.5, SeminormMode::global) + 1e-12);

  CHECK_THROWS_AS((void)holder_seminorm(lin, 1.5), Error);
}

TEST_CASE("quasilinear fixed point") {
  const auto m = kuhn_triangulate<2>(16, unit_square());
  LoadData<2> load;
  load.f = [](const Vec<2>&) { return 1.0; };

  // coefficient independent of the solution: single solve reproduced
  {
    const auto res = solve_quasilinear<2>(
        m, [](const Vec<2>&, double, const Vec<2>&) { return 1.0; }, 1.0, 1.0, load);
    const auto direct = solve_dirichlet(assemble(m, CoefficientField<2>::identity(), load));
    for (size_t i = 0; i < res.solution.values.size(); ++i)
      CHECK(res.solution.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-9));
  }
  // gradient-dependent coefficient in [1, 2]
  {
    const auto res = solve_quasilinear<2>(
        m,
        [](const Vec<2>&, double, const Vec<2>& g) { return 1.0 + 1.0 / (1.0 + dot(g, g)); },
        1.0, 2.0, load);
    CHECK(res.iterations <= 200);
    CHECK(res.nonlinear_residual <= 1e-7);
    // the returned iterate solves its own frozen system: truncations are
    // subsolutions of the dominated load
    const auto sys = assemble(m, res.frozen, load);
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const auto rep = verify_subsolution(nodal_positive_part(res.solution,
                                                              rng.uniform(0.0, res.solution.max_abs())),
                                          sys);
      CHECK(rep.pass);
    }
    // damping contract: changes decrease after the first few iterations
    for (size_t i = 5; i + 1 < res.change_history.size(); ++i)
      CHECK(res.change_history[i + 1] <= res.change_history[i] * (1.0 + 1e-9));
  }
}
