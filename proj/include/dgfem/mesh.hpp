#pragma once

// Conforming simplicial meshes in 2D/3D: Kuhn-cube generation, local
// refinement by newest-vertex bisection with conforming closure, adjacency
// and neighborhood queries, and quality / conformity audits.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dgfem/core.hpp"
#include "dgfem/geometry.hpp"

namespace dgfem {

template <int N>
struct Node {
  int id = -1;
  Vec<N> coords{};
  bool on_boundary = false;
};

template <int N>
struct Simplex {
  int id = -1;
  std::array<int, N + 1> vertices{};
  // Bisection class in {1..N}; the refinement edge is (vertices[0], vertices[tag]).
  int tag = N;
  std::array<int, 2> refinement_edge{};
  double volume = 0.0;        // |signed volume|
  double signed_volume = 0.0; // orientation as listed (meaningful in 2D)
  double diameter = 0.0;
  double inradius = 0.0;
};

template <int N>
struct Box {
  Vec<N> lo{}, hi{};
};

template <int N>
struct Triangulation {
  static constexpr int dim = N;

  std::vector<Node<N>> nodes;
  std::vector<Simplex<N>> elements;
  std::vector<std::vector<int>> node_to_elements;
  std::vector<std::array<int, N>> boundary_facets;
  double gamma = 0.0;  // max over elements of h_T / R_T

  SimplexPoints<N> points(int element) const {
    SimplexPoints<N> p{};
    const auto& e = elements[static_cast<std::size_t>(element)];
    for (int i = 0; i <= N; ++i) p[i] = nodes[static_cast<std::size_t>(e.vertices[i])].coords;
    return p;
  }

  double domain_diameter() const {
    Vec<N> lo = nodes.empty() ? Vec<N>{} : nodes[0].coords, hi = lo;
    for (const auto& nd : nodes)
      for (int i = 0; i < N; ++i) {
        lo[i] = std::min(lo[i], nd.coords[i]);
        hi[i] = std::max(hi[i], nd.coords[i]);
      }
    return dist(lo, hi);
  }

  // Linear scan; fine for the diagnostic workloads this library targets.
  int element_containing(const Vec<N>& x, double tol = 1e-10) const {
    for (const auto& e : elements)
      if (contains_point<N>(points(e.id), x, tol)) return e.id;
    return -1;
  }
};

// ---------------------------------------------------------------------------
// construction

namespace detail {

template <int N>
inline void refresh_geometry(Triangulation<N>& m, bool strict) {
  m.gamma = 0.0;
  for (auto& e : m.elements) {
    const auto p = m.points(e.id);
    e.signed_volume = signed_volume<N>(p);
    e.volume = std::abs(e.signed_volume);
    e.diameter = diameter<N>(p);
    const double eps_vol = 1e-14 * std::pow(e.diameter, N);
    if (e.volume <= eps_vol) {
      if (strict)
        fail(ErrorKind::degenerate_element,
             "degenerate simplex " + std::to_string(e.id) + " (volume " + format_double(e.volume) + ")");
      e.inradius = 0.0;
      continue;
    }
    e.inradius = inradius<N>(p);
    m.gamma = std::max(m.gamma, e.diameter / e.inradius);
  }
}

template <int N>
inline void refresh_topology(Triangulation<N>& m) {
  m.node_to_elements.assign(m.nodes.size(), {});
  for (const auto& e : m.elements)
    for (int v : e.vertices) m.node_to_elements[static_cast<std::size_t>(v)].push_back(e.id);

  // boundary facets: (N)-subsets of element vertices occurring exactly once
  std::map<std::array<int, N>, int> facet_count;
  for (const auto& e : m.elements) {
    for (int skip = 0; skip <= N; ++skip) {
      std::array<int, N> f{};
      int k = 0;
      for (int i = 0; i <= N; ++i)
        if (i != skip) f[k++] = e.vertices[i];
      std::sort(f.begin(), f.end());
      ++facet_count[f];
    }
  }
  m.boundary_facets.clear();
  for (auto& nd : m.nodes) nd.on_boundary = false;
  for (const auto& [f, c] : facet_count)
    if (c == 1) {
      m.boundary_facets.push_back(f);
      for (int v : f) m.nodes[static_cast<std::size_t>(v)].on_boundary = true;
    }
}

}  // namespace detail

template <int N>
inline Triangulation<N> triangulation_from_arrays(const std::vector<Vec<N>>& coords,
                                                  const std::vector<std::array<int, N + 1>>& cells,
                                                  const std::vector<int>* tags = nullptr,
                                                  bool strict = true) {
  Triangulation<N> m;
  m.nodes.resize(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!finite<N>(coords[i])) fail(ErrorKind::invalid_data, "non-finite node coordinate");
    m.nodes[i] = {static_cast<int>(i), coords[i], false};
  }
  m.elements.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Simplex<N> e;
    e.id = static_cast<int>(i);
    e.vertices = cells[i];
    for (int v : e.vertices)
      if (v < 0 || v >= static_cast<int>(coords.size()))
        fail(ErrorKind::parse, "element " + std::to_string(i) + " references unknown node " +
                                   std::to_string(v));
    e.tag = tags ? (*tags)[i] : N;
    e.refinement_edge = {e.vertices[0], e.vertices[e.tag]};
    m.elements[i] = e;
  }
  detail::refresh_geometry(m, strict);
  detail::refresh_topology(m);
  return m;
}

// Kuhn (Freudenthal) triangulation of an axis-aligned box: every grid cell is
// split into N! path simplices sharing the cell diagonal.  All simplices
// carry bisection tag N, which makes the mesh compatible for newest-vertex
// bisection.
template <int N>
inline Triangulation<N> kuhn_triangulate(int cells_per_side, const Box<N>& box) {
  static_assert(N == 2 || N == 3, "supported dimensions are 2 and 3");
  if (cells_per_side < 1) fail(ErrorKind::invalid_data, "cells_per_side must be >= 1");
  for (int i = 0; i < N; ++i)
    if (!(box.hi[i] > box.lo[i])) fail(ErrorKind::invalid_data, "degenerate domain box");

  const int np = cells_per_side + 1;
  auto node_index = [&](const std::array<int, N>& idx) {
    int id = 0;
    for (int i = N - 1; i >= 0; --i) id = id * np + idx[i];
    return id;
  };

  std::vector<Vec<N>> coords;
  coords.resize(static_cast<std::size_t>(std::pow(np, N)));
  std::array<int, N> idx{};
  const auto fill_nodes = [&](auto&& self, int d) -> void {
    if (d == N) {
      Vec<N> x{};
      for (int i = 0; i < N; ++i)
        x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / cells_per_side;
      coords[static_cast<std::size_t>(node_index(idx))] = x;
      return;
    }
    for (idx[d] = 0; idx[d] < np; ++idx[d]) self(self, d + 1);
  };
  fill_nodes(fill_nodes, 0);

  std::vector<std::array<int, N + 1>> cells;
  std::array<int, N> perm{};
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::array<int, N>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::array<int, N> cell{};
  const auto fill_cells = [&](auto&& self, int d) -> void {
    if (d == N) {
      for (const auto& pm : perms) {
        std::array<int, N + 1> verts{};
        std::array<int, N> cur = cell;
        verts[0] = node_index(cur);
        for (int k = 0; k < N; ++k) {
          ++cur[static_cast<std::size_t>(pm[static_cast<std::size_t>(k)])];
          verts[k + 1] = node_index(cur);
        }
        if constexpr (N == 2) {
          // keep positive orientation; reversing the path preserves the
          // shared diagonal as refinement edge
          if (pm[0] > pm[1]) std::reverse(verts.begin(), verts.end());
        }
        cells.push_back(verts);
      }
      return;
    }
    for (cell[d] = 0; cell[d] < cells_per_side; ++cell[d]) self(self, d + 1);
  };
  fill_cells(fill_cells, 0);

  return triangulation_from_arrays<N>(coords, cells);
}

// ---------------------------------------------------------------------------
// newest-vertex bisection

namespace detail {

template <int N>
struct PendingSimplex {
  std::array<int, N + 1> vertices;
  int tag;
};

template <int N>
inline std::pair<PendingSimplex<N>, PendingSimplex<N>> bisect_one(const PendingSimplex<N>& s,
                                                                  int midpoint) {
  const int d = s.tag;
  PendingSimplex<N> c1{}, c2{};
  for (int i = 0; i <= N; ++i) c1.vertices[i] = s.vertices[i];
  c1.vertices[d] = midpoint;
  for (int i = 0; i < d; ++i) c2.vertices[i] = s.vertices[i + 1];
  c2.vertices[d] = midpoint;
  for (int i = d + 1; i <= N; ++i) c2.vertices[i] = s.vertices[i];
  c1.tag = c2.tag = (d == 1) ? N : d - 1;
  return {c1, c2};
}

}  // namespace detail

// Bisects every marked element at least once and restores conformity by
// closure.  The input mesh is left untouched.
template <int N>
inline Triangulation<N> bisect(const Triangulation<N>& mesh, const std::vector<int>& marked) {
  for (int id : marked)
    if (id < 0 || id >= static_cast<int>(mesh.elements.size()))
      fail(ErrorKind::invalid_data, "marked element " + std::to_string(id) + " does not exist");
  if (marked.empty()) return mesh;

  std::vector<Vec<N>> coords;
  coords.reserve(mesh.nodes.size());
  for (const auto& nd : mesh.nodes) coords.push_back(nd.coords);

  std::vector<detail::PendingSimplex<N>> current;
  current.reserve(mesh.elements.size());
  for (const auto& e : mesh.elements) current.push_back({e.vertices, e.tag});

  std::vector<char> needs(current.size(), 0);
  for (int id : marked) needs[static_cast<std::size_t>(id)] = 1;

  std::map<std::array<int, 2>, int> midpoint_of_edge;
  auto edge_key = [](int a, int b) {
    return std::array<int, 2>{std::min(a, b), std::max(a, b)};
  };
  auto midpoint_node = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = midpoint_of_edge.find(key);
    if (it != midpoint_of_edge.end()) return it->second;
    const int id = static_cast<int>(coords.size());
    coords.push_back(0.5 * (coords[static_cast<std::size_t>(a)] + coords[static_cast<std::size_t>(b)]));
    midpoint_of_edge.emplace(key, id);
    return id;
  };

  const int max_rounds = 500;
  int round = 0;
  while (true) {
    bool any = false;
    std::vector<detail::PendingSimplex<N>> next;
    next.reserve(current.size() + 64);
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (!needs[i]) {
        next.push_back(current[i]);
        continue;
      }
      any = true;
      const auto& s = current[i];
      const int mid = midpoint_node(s.vertices[0], s.vertices[s.tag]);
      auto [c1, c2] = detail::bisect_one<N>(s, mid);
      if constexpr (N == 2) {
        // restore positive orientation by swapping the refinement-edge
        // vertices; this keeps child vertex sets and tags unchanged
        for (auto* c : {&c1, &c2}) {
          SimplexPoints<2> p{};
          for (int k = 0; k <= 2; ++k) p[k] = coords[static_cast<std::size_t>(c->vertices[k])];
          if (signed_volume<2>(p) < 0.0) std::swap(c->vertices[0], c->vertices[c->tag]);
        }
      }
      next.push_back(c1);
      next.push_back(c2);
    }
    current.swap(next);
    if (!any && round > 0) break;

    // conforming closure: any element with a previously created midpoint on
    // one of its edges must be bisected as well
    needs.assign(current.size(), 0);
    bool pending = false;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const auto& s = current[i];
      for (int a = 0; a <= N && !needs[i]; ++a)
        for (int b = a + 1; b <= N && !needs[i]; ++b)
          if (midpoint_of_edge.count(edge_key(s.vertices[a], s.vertices[b]))) {
            needs[i] = 1;
            pending = true;
          }
    }
    if (!pending) break;
    if (++round > max_rounds) {
      std::string ids;
      for (std::size_t i = 0; i < current.size() && ids.size() < 200; ++i)
        if (needs[i]) ids += std::to_string(i) + " ";
      fail(ErrorKind::refinement_failure, "conforming closure did not terminate; pending: " + ids);
    }
  }

  std::vector<std::array<int, N + 1>> cells;
  std::vector<int> tags;
  cells.reserve(current.size());
  tags.reserve(current.size());
  for (const auto& s : current) {
    cells.push_back(s.vertices);
    tags.push_back(s.tag);
  }
  return triangulation_from_arrays<N>(coords, cells, &tags);
}

// Uniform refinement: every element bisected `rounds` times.
template <int N>
inline Triangulation<N> refine_uniform(Triangulation<N> mesh, int rounds) {
  for (int r = 0; r < rounds; ++r) {
    std::vector<int> all(mesh.elements.size());
    std::iota(all.begin(), all.end(), 0);
    mesh = bisect(mesh, all);
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// quality

template <int N>
struct ShapeRegularityReport {
  std::vector<double> per_element;  // h_T / R_T
  double gamma = 0.0;               // max over elements
};

template <int N>
inline ShapeRegularityReport<N> shape_regularity(const Triangulation<N>& mesh) {
  ShapeRegularityReport<N> rep;
  rep.per_element.resize(mesh.elements.size());
  for (const auto& e : mesh.elements) {
    const double eps_vol = 1e-14 * std::pow(e.diameter, N);
    if (e.volume <= eps_vol)
      fail(ErrorKind::degenerate_element, "degenerate simplex " + std::to_string(e.id));
    rep.per_element[static_cast<std::size_t>(e.id)] = e.diameter / e.inradius;
    rep.gamma = std::max(rep.gamma, rep.per_element[static_cast<std::size_t>(e.id)]);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// neighborhoods

template <int N>
struct BallRegion {
  Vec<N> center{};
  double radius = 0.0;
};

// P_i: all elements containing node i.
template <int N>
inline std::vector<int> patch(const Triangulation<N>& mesh, int node) {
  return mesh.node_to_elements[static_cast<std::size_t>(node)];
}

// Elements touching the union of the given elements (includes the set itself).
template <int N>
inline std::vector<int> neighborhood(const Triangulation<N>& mesh, const std::vector<int>& elems) {
  std::set<int> out;
  for (int e : elems)
    for (int v : mesh.elements[static_cast<std::size_t>(e)].vertices)
      for (int t : mesh.node_to_elements[static_cast<std::size_t>(v)]) out.insert(t);
  return {out.begin(), out.end()};
}

template <int N>
inline std::vector<int> neighborhood(const Triangulation<N>& mesh, int node) {
  return patch(mesh, node);
}

// Elements with nonempty intersection with the closed ball (exact test).
template <int N>
inline std::vector<int> neighborhood(const Triangulation<N>& mesh, const BallRegion<N>& ball) {
  std::vector<int> out;
  for (const auto& e : mesh.elements)
    if (ball_intersects_simplex<N>(mesh.points(e.id), ball.center, ball.radius))
      out.push_back(e.id);
  return out;
}

// Union of patches over nodes inside the closed ball.
template <int N>
inline std::vector<int> prime_neighborhood(const Triangulation<N>& mesh, const BallRegion<N>& ball) {
  std::set<int> out;
  for (const auto& nd : mesh.nodes)
    if (dist(nd.coords, ball.center) <= ball.radius)
      for (int t : mesh.node_to_elements[static_cast<std::size_t>(nd.id)]) out.insert(t);
  return {out.begin(), out.end()};
}

struct NeighborhoodConstants {
  double Q = 0.0;      // smallest factor with Omega(B(x,R)) inside B(x, Q R)
  double kappa = 0.0;  // largest factor with B(x, kappa R) inside Omega'(B(x,R))
};

// Measured over sampled centers and radii R >= h_T of the containing element.
template <int N>
inline NeighborhoodConstants measure_neighborhood_constants(const Triangulation<N>& mesh,
                                                            int max_centers = 48) {
  NeighborhoodConstants out;
  out.Q = 1.0;
  out.kappa = 1.0;
  const double diam = mesh.domain_diameter();
  const int stride = std::max<std::size_t>(1, mesh.nodes.size() / static_cast<std::size_t>(max_centers));
  for (std::size_t ni = 0; ni < mesh.nodes.size(); ni += static_cast<std::size_t>(stride)) {
    const auto& nd = mesh.nodes[ni];
    double h = 0.0;
    for (int t : mesh.node_to_elements[ni]) h = std::max(h, mesh.elements[static_cast<std::size_t>(t)].diameter);
    for (double mult : {1.0, 2.0, 4.0}) {
      const double R = mult * h;
      if (R <= 0.0 || R > diam / 3.0) continue;
      const BallRegion<N> ball{nd.coords, R};
      for (int t : neighborhood(mesh, ball))
        for (int v : mesh.elements[static_cast<std::size_t>(t)].vertices)
          out.Q = std::max(out.Q, dist(mesh.nodes[static_cast<std::size_t>(v)].coords, nd.coords) / R);
      const auto prime = prime_neighborhood(mesh, ball);
      std::vector<char> in_prime(mesh.elements.size(), 0);
      for (int t : prime) in_prime[static_cast<std::size_t>(t)] = 1;
      double d = std::numeric_limits<double>::infinity();
      for (const auto& e : mesh.elements)
        if (!in_prime[static_cast<std::size_t>(e.id)])
          d = std::min(d, distance_point_simplex<N>(mesh.points(e.id), nd.coords));
      if (std::isfinite(d)) out.kappa = std::min(out.kappa, d / R);
    }
  }
  out.kappa = std::min(out.kappa, 1.0 - 1e-12);
  return out;
}

// max over adjacent element pairs of h_T / h_S
template <int N>
inline double size_comparability(const Triangulation<N>& mesh) {
  double worst = 1.0;
  for (const auto& nd_elems : mesh.node_to_elements)
    for (std::size_t i = 0; i < nd_elems.size(); ++i)
      for (std::size_t j = i + 1; j < nd_elems.size(); ++j) {
        const double a = mesh.elements[static_cast<std::size_t>(nd_elems[i])].diameter;
        const double b = mesh.elements[static_cast<std::size_t>(nd_elems[j])].diameter;
        worst = std::max(worst, std::max(a / b, b / a));
      }
  return worst;
}

// min over elements of dist(T, domain minus Omega(T)) / h_T
template <int N>
inline double patch_separation_constant(const Triangulation<N>& mesh) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.elements) {
    const auto ring = neighborhood(mesh, std::vector<int>{e.id});
    std::vector<char> in_ring(mesh.elements.size(), 0);
    for (int t : ring) in_ring[static_cast<std::size_t>(t)] = 1;
    const auto pe = mesh.points(e.id);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : mesh.elements)
      if (!in_ring[static_cast<std::size_t>(s.id)])
        d = std::min(d, simplex_simplex_distance<N>(pe, mesh.points(s.id)));
    if (std::isfinite(d)) worst = std::min(worst, d / e.diameter);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// conformity audit

enum class ConformityViolation {
  duplicate_nodes,
  inverted_element,
  degenerate_element,
  facet_mismatch,
  hanging_node,
};

struct ConformityIssue {
  ConformityViolation kind;
  int element = -1;
  int node = -1;
  std::string detail;
};

struct ConformityReport {
  std::vector<ConformityIssue> issues;
  bool conforming() const { return issues.empty(); }
};

template <int N>
inline ConformityReport validate_conformity(const Triangulation<N>& mesh) {
  ConformityReport rep;

  // duplicate nodes
  std::map<std::array<long long, N>, int> seen;
  const double diam = std::max(mesh.domain_diameter(), 1e-300);
  for (const auto& nd : mesh.nodes) {
    std::array<long long, N> key{};
    for (int i = 0; i < N; ++i) key[i] = llround(nd.coords[i] / diam * 1e12);
    auto [it, fresh] = seen.emplace(key, nd.id);
    if (!fresh)
      rep.issues.push_back({ConformityViolation::duplicate_nodes, -1, nd.id,
                            "coincides with node " + std::to_string(it->second)});
  }

  // degenerate / inverted elements (orientation is only meaningful in 2D,
  // where generation and refinement keep all triangles positively oriented)
  for (const auto& e : mesh.elements) {
    const double eps_vol = 1e-14 * std::pow(e.diameter, N);
    if (e.volume <= eps_vol)
      rep.issues.push_back({ConformityViolation::degenerate_element, e.id, -1, "volume ~ 0"});
    else if (N == 2 && e.signed_volume < 0)
      rep.issues.push_back({ConformityViolation::inverted_element, e.id, -1, "negative orientation"});
  }

  // facet incidence: every interior facet shared by exactly two elements
  std::map<std::array<int, N>, int> facet_count;
  for (const auto& e : mesh.elements)
    for (int skip = 0; skip <= N; ++skip) {
      std::array<int, N> f{};
      int k = 0;
      for (int i = 0; i <= N; ++i)
        if (i != skip) f[k++] = e.vertices[i];
      std::sort(f.begin(), f.end());
      ++facet_count[f];
    }
  for (const auto& [f, c] : facet_count)
    if (c > 2)
      rep.issues.push_back({ConformityViolation::facet_mismatch, -1, f[0],
                            "facet shared by " + std::to_string(c) + " elements"});

  // hanging nodes: a node lying on an element without being one of its
  // vertices.  Grid-bucketed so the audit stays usable on large meshes.
  Vec<N> lo = mesh.nodes.empty() ? Vec<N>{} : mesh.nodes[0].coords, hi = lo;
  for (const auto& nd : mesh.nodes)
    for (int i = 0; i < N; ++i) {
      lo[i] = std::min(lo[i], nd.coords[i]);
      hi[i] = std::max(hi[i], nd.coords[i]);
    }
  const int grid = std::max(1, static_cast<int>(std::pow(static_cast<double>(mesh.elements.size()), 1.0 / N)));
  auto cell_of = [&](double x, int axis) {
    const double w = hi[axis] - lo[axis];
    if (w <= 0.0) return 0;
    return std::clamp(static_cast<int>((x - lo[axis]) / w * grid), 0, grid - 1);
  };
  std::map<std::array<int, N>, std::vector<int>> cell_nodes;
  for (const auto& nd : mesh.nodes) {
    std::array<int, N> c{};
    for (int i = 0; i < N; ++i) c[i] = cell_of(nd.coords[i], i);
    cell_nodes[c].push_back(nd.id);
  }
  for (const auto& e : mesh.elements) {
    if (e.volume <= 0.0) continue;
    const auto p = mesh.points(e.id);
    std::array<int, N> clo{}, chi{};
    for (int i = 0; i < N; ++i) {
      double a = p[0][i], b = p[0][i];
      for (int k = 1; k <= N; ++k) {
        a = std::min(a, p[k][i]);
        b = std::max(b, p[k][i]);
      }
      clo[i] = cell_of(a - 1e-9 * e.diameter, i);
      chi[i] = cell_of(b + 1e-9 * e.diameter, i);
    }
    std::array<int, N> c = clo;
    while (true) {
      auto it = cell_nodes.find(c);
      if (it != cell_nodes.end())
        for (int node_id : it->second) {
          bool is_vertex = false;
          for (int v : e.vertices) is_vertex |= (v == node_id);
          if (is_vertex) continue;
          if (distance_point_simplex<N>(p, mesh.nodes[static_cast<std::size_t>(node_id)].coords) <=
              1e-9 * e.diameter)
            rep.issues.push_back({ConformityViolation::hanging_node, e.id, node_id,
                                  "node lies on element " + std::to_string(e.id)});
        }
      int axis = 0;
      while (axis < N) {
        if (c[axis] < chi[axis]) {
          ++c[axis];
          break;
        }
        c[axis] = clo[axis];
        ++axis;
      }
      if (axis == N) break;
    }
  }
  return rep;
}

}  // namespace dgfem
