#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dgfem/conditions.hpp"
#include "dgfem/fem.hpp"
#include "dgfem/mesh.hpp"

using namespace dgfem;

namespace {

Box<2> unit_square() { return {{0.0, 0.0}, {1.0, 1.0}}; }

Triangulation<2> equilateral_triangle() {
  return triangulation_from_arrays<2>({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}}, {{0, 1, 2}});
}

}  // namespace

TEST_CASE("nonobtuse certificate on Kuhn meshes") {
  const auto m = kuhn_triangulate<2>(3, unit_square());
  const auto cert = check_nonobtuse(m, CoefficientField<2>::identity());
  CHECK(cert.pass);
  CHECK(cert.worst_coupling <= 1e-14);

  // scaling the coefficient preserves the verdict
  auto scaled = CoefficientField<2>::scalar([](const Vec<2>&) { return 7.5; }, 7.5, 7.5);
  CHECK(check_nonobtuse(m, scaled).pass);

  // 3d Kuhn tetrahedra are nonobtuse as well
  const auto m3 = kuhn_triangulate<3>(2, Box<3>{{0, 0, 0}, {1, 1, 1}});
  CHECK(check_nonobtuse(m3, CoefficientField<3>::identity()).pass);
}

TEST_CASE("obtuse triangle is flagged with a positive coupling") {
  const auto m = triangulation_from_arrays<2>({{0, 0}, {3, 0}, {2.9, 0.2}}, {{0, 1, 2}});
  const auto cert = check_nonobtuse(m, CoefficientField<2>::identity());
  CHECK_FALSE(cert.pass);
  CHECK(cert.worst_coupling > 0.0);
  REQUIRE(!cert.offenders.empty());
  // oracle: assemble the local matrix directly and find the positive entry
  const auto k = local_stiffness<2>(m.points(0), identity_matrix<2>());
  double direct_worst = -1e300;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) direct_worst = std::max(direct_worst, k[size_t(i)][size_t(j)]);
  CHECK(cert.worst_coupling == doctest::Approx(direct_worst).epsilon(1e-13));

  auto scaled = CoefficientField<2>::scalar([](const Vec<2>&) { return 3.0; }, 3.0, 3.0);
  CHECK_FALSE(check_nonobtuse(m, scaled).pass);
}

TEST_CASE("uniform acuteness margins") {
  // equilateral: coupling -1/(2 sqrt 3), both gradient norms 3^{-1/4}
  const auto eq = equilateral_triangle();
  const auto cert = check_uniform_acute(eq, CoefficientField<2>::identity());
  CHECK(cert.nonobtuse);
  CHECK(cert.gamma == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cert.tau == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cert.n_max == 1);

  auto doubled = CoefficientField<2>::scalar([](const Vec<2>&) { return 2.0; }, 2.0, 2.0);
  CHECK(check_uniform_acute(eq, doubled).gamma == doctest::Approx(0.5).epsilon(1e-12));

  // Kuhn right triangles have a zero coupling: gamma degenerates to 0
  const auto km = kuhn_triangulate<2>(2, unit_square());
  const auto kcert = check_uniform_acute(km, CoefficientField<2>::identity());
  CHECK(kcert.nonobtuse);
  CHECK(kcert.gamma == doctest::Approx(0.0));
  CHECK(kcert.tau > 0.0);  // paths exist despite the zero coupling
}

TEST_CASE("acute connection paths") {
  const auto eq = equilateral_triangle();
  const auto id = CoefficientField<2>::identity();
  const auto direct = acute_path(eq, id, 0, 0, 1);
  CHECK(direct.found);
  CHECK(direct.steps.size() == 1);
  CHECK(direct.tau == doctest::Approx(0.5).epsilon(1e-12));

  const auto trivial = acute_path(eq, id, 0, 2, 2);
  CHECK(trivial.found);
  CHECK(trivial.steps.empty());

  // single Kuhn right triangle: the two leg ends have zero coupling, the
  // path must route through the right-angle vertex
  const auto tri = triangulation_from_arrays<2>({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const auto path = acute_path(tri, id, 0, 1, 2);
  CHECK(path.found);
  CHECK(path.steps.size() == 2);
  CHECK(path.nodes == std::vector<int>{1, 0, 2});
  CHECK(path.tau == doctest::Approx(0.5).epsilon(1e-12));
  // every step satisfies the margin inequality against the global couplings
  const auto couplings = stiffness_couplings(tri, id);
  for (const auto& s : path.steps) {
    const double lhs = -couplings.coeff(s.from_node, s.to_node);
    const double rhs = s.margin * couplings.coeff(s.from_node, s.from_node);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(s.margin >= path.tau - 1e-15);
  }
  CHECK_THROWS_AS((void)acute_path(tri, id, 0, 0, 7), Error);
}

TEST_CASE("subsolution verification") {
  const auto m = kuhn_triangulate<2>(4, unit_square());
  const auto id = CoefficientField<2>::identity();
  LoadData<2> load;
  load.f = [](const Vec<2>& x) { return 1.0 + x[0]; };

  const auto sys = assemble(m, id, load);
  const auto u = solve_dirichlet(sys);

  // the exact discrete solution is a subsolution (equality case)
  const auto rep = verify_subsolution(u, sys);
  CHECK(rep.pass);

  // u = 0 with f >= 0: residuals are -b_i <= 0
  FeFunction<2> zero(m);
  CHECK(verify_subsolution(zero, sys).pass);

  // not a subsolution: bump the solution at one interior node, the residual
  // there picks up the positive diagonal entry
  FeFunction<2> bumped = u;
  int interior = -1;
  for (const auto& nd : m.nodes)
    if (!nd.on_boundary) interior = nd.id;
  REQUIRE(interior >= 0);
  bumped.values[size_t(interior)] += 10.0;
  const auto bad_rep = verify_subsolution(bumped, sys);
  CHECK_FALSE(bad_rep.pass);
  CHECK(bad_rep.max_residual > 0.0);

  // boundary-violating input is rejected
  FeFunction<2> bad(m);
  bad.values[0] = 1.0;  // node 0 is a corner
  CHECK_THROWS_AS((void)verify_subsolution(bad, sys), Error);
}

TEST_CASE("positive parts of solutions are subsolutions for the dominated load") {
  const auto m = kuhn_triangulate<2>(4, unit_square());
  const auto id = CoefficientField<2>::identity();
  LoadData<2> load;
  load.f = [](const Vec<2>& x) { return std::sin(4 * x[0]) * (0.5 + x[1]); };  // sign changing
  const auto sys = assemble(m, id, load);
  const auto u = solve_dirichlet(sys);

  LoadData<2> dominated;
  const auto f = load.f;
  dominated.f = [f](const Vec<2>& x) { return std::abs(f(x)); };
  const auto dsys = assemble(m, id, dominated);

  Rng rng(42);
  const double top = u.max_abs() * 1.2 + 0.1;
  for (int trial = 0; trial < 100; ++trial) {
    const double c = rng.uniform(0.0, top);
    const auto trunc = nodal_positive_part(u, c);
    const auto rep = verify_subsolution(trunc, dsys);
    CHECK(rep.pass);
  }
}

TEST_CASE("nodal max of subsolutions stays a subsolution") {
  const auto m = kuhn_triangulate<2>(4, unit_square());
  const auto id = CoefficientField<2>::identity();

  LoadData<2> load1, load2;
  load1.f = [](const Vec<2>& x) { return -x[0] - 0.2; };
  load2.f = [](const Vec<2>& x) { return -std::abs(std::sin(3 * x[1])); };
  const auto u = solve_dirichlet(assemble(m, id, load1));
  const auto v = solve_dirichlet(assemble(m, id, load2));

  const auto rep = verify_nodal_max_theorem(u, v, load1, load2, id);
  CHECK(rep.inputs_ok);
  CHECK(rep.pass);

  // reduction to the positive-part corollary: second function and load zero
  FeFunction<2> zero(m);
  const auto rep2 = verify_nodal_max_theorem(u, zero, load1, LoadData<2>{}, id);
  CHECK(rep2.pass);

  // idempotent case
  const auto rep3 = verify_nodal_max_theorem(u, u, load1, load1, id);
  CHECK(rep3.pass);
}

TEST_CASE("dominating-field audit") {
  const auto m = kuhn_triangulate<2>(4, unit_square());
  Rng rng(7);

  // constant flux: both terms vanish against interior basis functions
  const auto rep = verify_assumption_star<2>(
      m, [](const Vec<2>&) { return Vec<2>{1.0, -2.0}; }, nullptr, &rng);
  CHECK(rep.pass);

  // concentrated positive divergence with no dominating field must fail
  const auto spike = verify_assumption_star<2>(
      m,
      [](const Vec<2>& x) {
        const Vec<2> c = {0.5, 0.5};
        const Vec<2> d = x - c;
        const double r = std::max(norm(d), 1e-6);
        return (1.0 / r) * d;  // outward field, positive divergence at center
      },
      nullptr, &rng);
  CHECK_FALSE(spike.pass);
  CHECK(spike.max_violation > 0.0);
}

TEST_CASE("discrete maximum principle on nonobtuse meshes") {
  const auto id = CoefficientField<2>::identity();
  LoadData<2> load;
  load.f = [](const Vec<2>& x) { return 1.0 + 0.5 * std::sin(7 * x[0] * x[1]); };  // >= 0.5

  auto m = kuhn_triangulate<2>(4, unit_square());
  for (int round = 0; round < 3; ++round) {
    REQUIRE(check_nonobtuse(m, id).pass);
    const auto u = solve_dirichlet(assemble(m, id, load));
    double min_nodal = 0.0;
    for (double v : u.values) min_nodal = std::min(min_nodal, v);
    CHECK(min_nodal >= -1e-10);
    // grade towards a corner and repeat
    std::vector<int> marks;
    for (const auto& e : m.elements)
      if (contains_point<2>(m.points(e.id), Vec<2>{0.0, 0.0}, 1e-12)) marks.push_back(e.id);
    m = bisect(m, marks);
  }
}
