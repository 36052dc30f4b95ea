#pragma once

// Test-only oracle: exhaustively enumerates the similarity classes of
// simplices reachable by repeated bisection from a seed mesh and reports the
// worst shape-regularity ratio over the closure.  Independent of the mesh
// module's refinement path: it bisects shapes directly, never meshes.

#include <cmath>
#include <map>
#include <vector>

#include "dgfem/geometry.hpp"
#include "dgfem/mesh.hpp"

namespace nvb_oracle {

template <int N>
struct TaggedShape {
  dgfem::SimplexPoints<N> pts;
  int tag;
};

template <int N>
inline std::array<long long, (N * (N + 3)) / 2 + 1> signature(const TaggedShape<N>& s) {
  // scale-normalized Gram matrix of the edge vectors from vertex 0, plus tag
  const double h = dgfem::diameter<N>(s.pts);
  std::array<long long, (N * (N + 3)) / 2 + 1> sig{};
  int k = 0;
  for (int i = 1; i <= N; ++i)
    for (int j = i; j <= N; ++j)
      sig[k++] = llround(dgfem::dot(s.pts[i] - s.pts[0], s.pts[j] - s.pts[0]) / (h * h) * 1e9);
  sig[k] = s.tag;
  return sig;
}

template <int N>
inline std::pair<TaggedShape<N>, TaggedShape<N>> bisect_shape(const TaggedShape<N>& s) {
  const int d = s.tag;
  const dgfem::Vec<N> z = 0.5 * (s.pts[0] + s.pts[d]);
  TaggedShape<N> c1 = s, c2{};
  c1.pts[d] = z;
  for (int i = 0; i < d; ++i) c2.pts[i] = s.pts[i + 1];
  c2.pts[d] = z;
  for (int i = d + 1; i <= N; ++i) c2.pts[i] = s.pts[i];
  c1.tag = c2.tag = (d == 1) ? N : d - 1;
  return {c1, c2};
}

template <int N>
inline double max_gamma_over_similarity_classes(const dgfem::Triangulation<N>& seed,
                                                std::size_t class_cap = 4096) {
  std::map<std::array<long long, (N * (N + 3)) / 2 + 1>, double> classes;
  std::vector<TaggedShape<N>> queue;
  for (const auto& e : seed.elements) queue.push_back({seed.points(e.id), e.tag});

  double worst = 0.0;
  while (!queue.empty()) {
    const TaggedShape<N> s = queue.back();
    queue.pop_back();
    const auto sig = signature<N>(s);
    if (classes.count(sig)) continue;
    const double gamma = dgfem::diameter<N>(s.pts) / dgfem::inradius<N>(s.pts);
    classes[sig] = gamma;
    worst = std::max(worst, gamma);
    if (classes.size() > class_cap)
      throw std::runtime_error("similarity-class enumeration did not close");
    const auto [c1, c2] = bisect_shape<N>(s);
    queue.push_back(c1);
    queue.push_back(c2);
  }
  return worst;
}

}  // namespace nvb_oracle
