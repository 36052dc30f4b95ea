#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dgfem/mesh.hpp"
#include "nvb_oracle.hpp"

using namespace dgfem;

namespace {

Box<2> unit_square() { return {{0.0, 0.0}, {1.0, 1.0}}; }
Box<3> unit_cube() { return {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}; }

Triangulation<2> single_triangle(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c) {
  return triangulation_from_arrays<2>({a, b, c}, {{0, 1, 2}});
}

}  // namespace

TEST_CASE("kuhn triangulation counts") {
  const auto m2 = kuhn_triangulate<2>(1, unit_square());
  CHECK(m2.elements.size() == 2);
  CHECK(m2.nodes.size() == 4);

  const auto m3 = kuhn_triangulate<3>(1, unit_cube());
  CHECK(m3.elements.size() == 6);
  CHECK(m3.nodes.size() == 8);

  const auto m22 = kuhn_triangulate<2>(2, unit_square());
  CHECK(m22.elements.size() == 8);
  CHECK(m22.nodes.size() == 9);
}

TEST_CASE("kuhn meshes are conforming and positively oriented in 2d") {
  for (int cells : {1, 2, 3, 4}) {
    const auto m = kuhn_triangulate<2>(cells, unit_square());
    CHECK(validate_conformity(m).conforming());
    for (const auto& e : m.elements) CHECK(e.signed_volume > 0.0);
    double vol = 0.0;
    for (const auto& e : m.elements) vol += e.volume;
    CHECK(vol == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto m3 = kuhn_triangulate<3>(2, unit_cube());
  CHECK(validate_conformity(m3).conforming());
  double vol = 0.0;
  for (const auto& e : m3.elements) vol += e.volume;
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shape regularity closed forms") {
  // unit right triangle: inradius (2 - sqrt 2)/2, diameter sqrt 2
  const auto tri = single_triangle({0, 0}, {1, 0}, {0, 1});
  const auto rep = shape_regularity(tri);
  CHECK(rep.gamma == doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-12));

  // equilateral triangle of side 1
  const auto eq = single_triangle({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0});
  CHECK(shape_regularity(eq).gamma == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));

  // regular tetrahedron of edge 1
  const double s = 1.0 / std::sqrt(2.0);
  const auto tet = triangulation_from_arrays<3>(
      {{s, 0, -s / std::sqrt(2.0)}, {-s, 0, -s / std::sqrt(2.0)}, {0, s, s / std::sqrt(2.0)}, {0, -s, s / std::sqrt(2.0)}},
      {{0, 1, 2, 3}});
  CHECK(shape_regularity(tet).gamma == doctest::Approx(2.0 * std::sqrt(6.0)).epsilon(1e-10));
}

TEST_CASE("degenerate simplex rejected") {
  CHECK_THROWS_AS((void)triangulation_from_arrays<2>({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}),
                  Error);
}

TEST_CASE("bisect marked elements, empty mark is a no-op") {
  const auto m = kuhn_triangulate<2>(1, unit_square());
  const auto same = bisect(m, {});
  CHECK(same.elements.size() == m.elements.size());

  const auto both = bisect(m, {0, 1});
  CHECK(both.elements.size() == 4);
  CHECK(validate_conformity(both).conforming());
}

TEST_CASE("bisect keeps conformity across mixed marks") {
  auto m = kuhn_triangulate<2>(2, unit_square());
  m = bisect(m, {0});
  CHECK(validate_conformity(m).conforming());
  m = bisect(m, {0, 3, 5});
  CHECK(validate_conformity(m).conforming());
  for (const auto& e : m.elements) CHECK(e.signed_volume > 0.0);

  auto m3 = kuhn_triangulate<3>(1, unit_cube());
  m3 = bisect(m3, {0});
  CHECK(validate_conformity(m3).conforming());
  m3 = bisect(m3, {2, 4});
  CHECK(validate_conformity(m3).conforming());
}

TEST_CASE("graded refinement towards a corner matches the similarity-class bound") {
  auto m = kuhn_triangulate<2>(1, unit_square());
  double max_gamma = shape_regularity(m).gamma;
  const Vec<2> corner = {0.0, 0.0};
  for (int round = 0; round < 10; ++round) {
    int target = -1;
    for (const auto& e : m.elements)
      if (contains_point<2>(m.points(e.id), corner, 1e-12)) {
        target = e.id;
        break;
      }
    REQUIRE(target >= 0);
    m = bisect(m, {target});
    CHECK(validate_conformity(m).conforming());
    max_gamma = std::max(max_gamma, shape_regularity(m).gamma);
  }
  const double oracle = nvb_oracle::max_gamma_over_similarity_classes<2>(
      kuhn_triangulate<2>(1, unit_square()));
  CHECK(max_gamma == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(shape_regularity(m).gamma <= oracle * (1 + 1e-10));
}

TEST_CASE("similarity classes stay bounded in 3d") {
  const double oracle = nvb_oracle::max_gamma_over_similarity_classes<3>(
      kuhn_triangulate<3>(1, unit_cube()));
  CHECK(std::isfinite(oracle));

  auto m = kuhn_triangulate<3>(1, unit_cube());
  for (int round = 0; round < 6; ++round) {
    m = bisect(m, {0});
    CHECK(shape_regularity(m).gamma <= oracle * (1 + 1e-10));
  }
}

TEST_CASE("patches and neighborhoods") {
  const auto m = kuhn_triangulate<2>(1, unit_square());
  // corner (0,0) belongs to both triangles of the Kuhn square
  int corner_node = -1;
  for (const auto& nd : m.nodes)
    if (norm(nd.coords) < 1e-12) corner_node = nd.id;
  REQUIRE(corner_node >= 0);
  CHECK(patch(m, corner_node).size() == 2);

  // ball covering the whole mesh returns every element
  const BallRegion<2> big{{0.5, 0.5}, 10.0};
  CHECK(neighborhood(m, big).size() == m.elements.size());
  CHECK(prime_neighborhood(m, big).size() == m.elements.size());

  // empty intersection is an empty set, not an error
  const BallRegion<2> far{{42.0, 42.0}, 0.1};
  CHECK(neighborhood(m, far).empty());
}

TEST_CASE("ball neighborhood matches a brute-force vertex-free oracle") {
  const auto m = kuhn_triangulate<2>(4, unit_square());
  const BallRegion<2> ball{{0.52, 0.47}, 0.3};
  const auto got = neighborhood(m, ball);
  std::set<int> expect;
  // oracle: dense sampling of each element, flag if any sample is inside
  for (const auto& e : m.elements) {
    const auto pts = m.points(e.id);
    const int k = 60;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; i + j <= k; ++j) {
        const std::array<double, 3> bary = {double(i) / k, double(j) / k, double(k - i - j) / k};
        if (dist(bary_to_point<2>(pts, bary), ball.center) <= ball.radius) {
          expect.insert(e.id);
          break;
        }
      }
  }
  // exact test must contain every sampled hit, and any extra element it
  // reports must be at distance ~radius
  for (int e : expect) CHECK(std::find(got.begin(), got.end(), e) != got.end());
  for (int e : got)
    if (!expect.count(e))
      CHECK(distance_point_simplex<2>(m.points(e), ball.center) <= ball.radius + 1e-12);
}

TEST_CASE("measured neighborhood constants are sane and stable") {
  double prev_q = 0.0, prev_kappa = 0.0;
  for (int level = 2; level <= 4; ++level) {
    const auto m = kuhn_triangulate<2>(1 << level, unit_square());
    const auto nc = measure_neighborhood_constants(m);
    CHECK(nc.Q > 1.0);
    CHECK(nc.kappa > 0.0);
    CHECK(nc.kappa < 1.0);
    if (level > 2) {
      CHECK(nc.Q <= prev_q * 1.05 + 1e-9);
      CHECK(nc.kappa >= prev_kappa * 0.95 - 1e-9);
    }
    prev_q = nc.Q;
    prev_kappa = nc.kappa;
  }
}

TEST_CASE("adjacent elements have comparable diameters under refinement") {
  auto m = kuhn_triangulate<2>(2, unit_square());
  const double c0 = size_comparability(m);
  double worst = c0;
  const Vec<2> corner = {0.0, 0.0};
  for (int round = 0; round < 8; ++round) {
    int target = -1;
    for (const auto& e : m.elements)
      if (contains_point<2>(m.points(e.id), corner, 1e-12)) target = e.id;
    m = bisect(m, {target});
    worst = std::max(worst, size_comparability(m));
  }
  CHECK(worst <= 4.0 * c0 + 1e-9);  // stable under grading
  CHECK(patch_separation_constant(m) > 0.0);
}

TEST_CASE("conformity audit flags constructed defects") {
  // hanging node: split one triangle of the Kuhn square without closure
  const auto bad = triangulation_from_arrays<2>(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}},
      {{0, 1, 4}, {1, 2, 4}, {0, 3, 2}}, nullptr, true);
  const auto rep = validate_conformity(bad);
  bool has_hanging = false;
  for (const auto& issue : rep.issues) has_hanging |= issue.kind == ConformityViolation::hanging_node;
  CHECK(has_hanging);

  // reversed vertex order
  const auto rev = triangulation_from_arrays<2>({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}});
  const auto rep2 = validate_conformity(rev);
  bool has_inverted = false;
  for (const auto& issue : rep2.issues) has_inverted |= issue.kind == ConformityViolation::inverted_element;
  CHECK(has_inverted);

  // duplicate node
  const auto dup = triangulation_from_arrays<2>({{0, 0}, {1, 0}, {0, 1}, {0, 1}}, {{0, 1, 2}, {0, 1, 3}},
                                                nullptr, false);
  const auto rep3 = validate_conformity(dup);
  bool has_dup = false;
  for (const auto& issue : rep3.issues) has_dup |= issue.kind == ConformityViolation::duplicate_nodes;
  CHECK(has_dup);
}

TEST_CASE("uniform + graded refinements always conforming") {
  auto m = kuhn_triangulate<2>(2, unit_square());
  for (int r = 0; r < 4; ++r) {
    std::vector<int> marks;
    for (const auto& e : m.elements)
      if (e.id % 3 == r % 3) marks.push_back(e.id);
    m = bisect(m, marks);
    CHECK(validate_conformity(m).conforming());
  }
}

TEST_CASE("boundary detection") {
  const auto m = kuhn_triangulate<2>(2, unit_square());
  int boundary_nodes = 0;
  for (const auto& nd : m.nodes) boundary_nodes += nd.on_boundary ? 1 : 0;
  CHECK(boundary_nodes == 8);  // 3x3 lattice, all but the center
  CHECK(m.boundary_facets.size() == 8);
}
