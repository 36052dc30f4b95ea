#pragma once

// Text formats:
//   dgfem-mesh 1   -- nodes + simplices, shortest round-trip decimals
//   dgfem-fun 1    -- nodal values of a finite element function
//   coordinate triplets for sparse-matrix debugging

#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dgfem/core.hpp"
#include "dgfem/mesh.hpp"

namespace dgfem {

using MeshVariant = std::variant<Triangulation<2>, Triangulation<3>>;

namespace detail {

struct LineReader {
  std::istream& in;
  int line_no = 0;
  std::string line;

  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  }
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + what);
  }
  std::vector<std::string> tokens() const {
    std::istringstream ss(line);
    std::vector<std::string> t;
    std::string w;
    while (ss >> w) t.push_back(w);
    return t;
  }
};

inline long parse_int(const LineReader& r, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) r.error("expected integer, got '" + s + "'");
    return v;
  } catch (const std::exception&) {
    r.error("expected integer, got '" + s + "'");
  }
}

inline double parse_num(const LineReader& r, const std::string& s) {
  double v = 0.0;
  if (!parse_double(s, v)) r.error("expected number, got '" + s + "'");
  return v;
}

template <int N>
inline Triangulation<N> read_mesh_body(LineReader& r, long n_nodes) {
  std::vector<Vec<N>> coords(static_cast<std::size_t>(n_nodes));
  std::vector<char> seen(static_cast<std::size_t>(n_nodes), 0);
  for (long i = 0; i < n_nodes; ++i) {
    if (!r.next()) r.error("unexpected end of file in node list");
    const auto t = r.tokens();
    if (t.size() != static_cast<std::size_t>(N + 1)) r.error("node line must have id and " + std::to_string(N) + " coordinates");
    const long id = parse_int(r, t[0]);
    if (id < 0 || id >= n_nodes) r.error("node id " + t[0] + " out of range");
    if (seen[static_cast<std::size_t>(id)]) r.error("duplicate node id " + t[0]);
    seen[static_cast<std::size_t>(id)] = 1;
    for (int k = 0; k < N; ++k) coords[static_cast<std::size_t>(id)][k] = parse_num(r, t[static_cast<std::size_t>(k + 1)]);
  }
  if (!r.next()) r.error("missing 'elements' section");
  auto t = r.tokens();
  if (t.size() != 2 || t[0] != "elements") r.error("expected 'elements <M>'");
  const long n_elems = parse_int(r, t[1]);
  std::vector<std::array<int, N + 1>> cells(static_cast<std::size_t>(n_elems));
  std::vector<char> eseen(static_cast<std::size_t>(n_elems), 0);
  for (long i = 0; i < n_elems; ++i) {
    if (!r.next()) r.error("unexpected end of file in element list");
    const auto et = r.tokens();
    if (et.size() != static_cast<std::size_t>(N + 2)) r.error("element line must have id and " + std::to_string(N + 1) + " vertices");
    const long id = parse_int(r, et[0]);
    if (id < 0 || id >= n_elems) r.error("element id " + et[0] + " out of range");
    if (eseen[static_cast<std::size_t>(id)]) r.error("duplicate element id " + et[0]);
    eseen[static_cast<std::size_t>(id)] = 1;
    for (int k = 0; k <= N; ++k) {
      const long v = parse_int(r, et[static_cast<std::size_t>(k + 1)]);
      if (v < 0 || v >= n_nodes) r.error("element references node id " + et[static_cast<std::size_t>(k + 1)] + " out of range");
      cells[static_cast<std::size_t>(id)][k] = static_cast<int>(v);
    }
  }
  return triangulation_from_arrays<N>(coords, cells, nullptr, /*strict=*/false);
}

}  // namespace detail

inline MeshVariant read_mesh(std::istream& in) {
  detail::LineReader r{in, 0, {}};
  if (!r.next()) r.error("empty file");
  auto t = r.tokens();
  if (t.size() != 2 || t[0] != "dgfem-mesh" || t[1] != "1")
    r.error("expected header 'dgfem-mesh 1'");
  if (!r.next()) r.error("missing 'dim' line");
  t = r.tokens();
  if (t.size() != 2 || t[0] != "dim") r.error("expected 'dim <n>'");
  const long dim = detail::parse_int(r, t[1]);
  if (dim != 2 && dim != 3)
    fail(ErrorKind::unsupported_dimension, "line " + std::to_string(r.line_no) +
                                               ": unsupported dimension " + std::to_string(dim));
  if (!r.next()) r.error("missing 'nodes' section");
  t = r.tokens();
  if (t.size() != 2 || t[0] != "nodes") r.error("expected 'nodes <N>'");
  const long n_nodes = detail::parse_int(r, t[1]);
  if (dim == 2) return detail::read_mesh_body<2>(r, n_nodes);
  return detail::read_mesh_body<3>(r, n_nodes);
}

inline MeshVariant read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open mesh file " + path);
  return read_mesh(in);
}

template <int N>
inline void write_mesh(const Triangulation<N>& mesh, std::ostream& out) {
  out << "dgfem-mesh 1\n";
  out << "dim " << N << "\n";
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& nd : mesh.nodes) {
    out << nd.id;
    for (int i = 0; i < N; ++i) out << ' ' << format_double(nd.coords[i]);
    out << '\n';
  }
  out << "elements " << mesh.elements.size() << "\n";
  for (const auto& e : mesh.elements) {
    out << e.id;
    for (int v : e.vertices) out << ' ' << v;
    out << '\n';
  }
}

template <int N>
inline void write_mesh(const Triangulation<N>& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::parse, "cannot open " + path + " for writing");
  write_mesh(mesh, out);
}

// --------------------------------------------------------------------------

inline void write_function(const std::vector<double>& values, std::ostream& out) {
  out << "dgfem-fun 1\n";
  out << "nodes " << values.size() << "\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i << ' ' << format_double(values[i]) << '\n';
}

inline std::vector<double> read_function(std::istream& in) {
  detail::LineReader r{in, 0, {}};
  if (!r.next()) r.error("empty file");
  auto t = r.tokens();
  if (t.size() != 2 || t[0] != "dgfem-fun" || t[1] != "1") r.error("expected header 'dgfem-fun 1'");
  if (!r.next()) r.error("missing 'nodes' line");
  t = r.tokens();
  if (t.size() != 2 || t[0] != "nodes") r.error("expected 'nodes <N>'");
  const long n = detail::parse_int(r, t[1]);
  std::vector<double> values(static_cast<std::size_t>(n), 0.0);
  for (long i = 0; i < n; ++i) {
    if (!r.next()) r.error("unexpected end of file in value list");
    const auto vt = r.tokens();
    if (vt.size() != 2) r.error("value line must be '<id> <value>'");
    const long id = detail::parse_int(r, vt[0]);
    if (id < 0 || id >= n) r.error("value id out of range");
    values[static_cast<std::size_t>(id)] = detail::parse_num(r, vt[1]);
  }
  return values;
}

}  // namespace dgfem
