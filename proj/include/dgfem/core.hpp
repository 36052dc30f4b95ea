#pragma once

// Small shared utilities: fixed-size vector algebra, typed errors,
// deterministic number formatting and a seeded RNG wrapper.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace dgfem {

template <int N>
using Vec = std::array<double, N>;

template <int N>
using Mat = std::array<std::array<double, N>, N>;

// non-deduced parameter form: lets N be inferred from a sibling argument
template <int N>
using VecArg = std::type_identity_t<Vec<N>>;

enum class ErrorKind {
  unsupported_dimension,
  degenerate_element,
  refinement_failure,
  invalid_data,
  incompatible_operands,
  solver_failure,
  geometry,
  parse,
  invalid_operand,
  undefined_oscillation,
  fixed_point_failure,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

// ---------------------------------------------------------------------------
// vector algebra

template <std::size_t M>
inline std::array<double, M> operator+(const std::array<double, M>& a,
                                       const std::array<double, M>& b) {
  std::array<double, M> r{};
  for (std::size_t i = 0; i < M; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t M>
inline std::array<double, M> operator-(const std::array<double, M>& a,
                                       const std::array<double, M>& b) {
  std::array<double, M> r{};
  for (std::size_t i = 0; i < M; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t M>
inline std::array<double, M> operator*(double s, const std::array<double, M>& a) {
  std::array<double, M> r{};
  for (std::size_t i = 0; i < M; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t M>
inline double dot(const std::array<double, M>& a, const std::array<double, M>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < M; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t M>
inline double norm(const std::array<double, M>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t M>
inline double dist(const std::array<double, M>& a, const std::array<double, M>& b) {
  return norm(a - b);
}

template <int N>
inline Vec<N> matvec(const Mat<N>& m, const Vec<N>& v) {
  Vec<N> r{};
  for (int i = 0; i < N; ++i) r[i] = dot(m[i], v);
  return r;
}

template <int N>
inline Mat<N> identity_matrix() {
  Mat<N> m{};
  for (int i = 0; i < N; ++i) m[i][i] = 1.0;
  return m;
}

template <int N>
inline Mat<N> scaled_identity(double s) {
  Mat<N> m{};
  for (int i = 0; i < N; ++i) m[i][i] = s;
  return m;
}

// Solves m x = rhs for small N by Gaussian elimination with partial pivoting.
template <int N>
inline Vec<N> solve_small(Mat<N> m, Vec<N> rhs) {
  for (int c = 0; c < N; ++c) {
    int p = c;
    for (int r = c + 1; r < N; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    if (m[p][c] == 0.0) fail(ErrorKind::degenerate_element, "singular local system");
    std::swap(m[c], m[p]);
    std::swap(rhs[c], rhs[p]);
    for (int r = c + 1; r < N; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < N; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  Vec<N> x{};
  for (int c = N - 1; c >= 0; --c) {
    double s = rhs[c];
    for (int k = c + 1; k < N; ++k) s -= m[c][k] * x[k];
    x[c] = s / m[c][c];
  }
  return x;
}

// Eigenvalue range of a small symmetric matrix (cyclic Jacobi sweeps).
template <int N>
inline std::pair<double, double> symmetric_eigen_range(Mat<N> a) {
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < N; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < N; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  double lo = a[0][0], hi = a[0][0];
  for (int i = 1; i < N; ++i) {
    lo = std::min(lo, a[i][i]);
    hi = std::max(hi, a[i][i]);
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// exact factorials (all values below 2^53, hence exact in double)

inline double factorial(int n) {
  static const std::array<double, 19> table = [] {
    std::array<double, 19> t{};
    t[0] = 1.0;
    for (int i = 1; i < 19; ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------------------
// formatting: shortest round-trip decimal for doubles

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline bool parse_double(const std::string& s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// ---------------------------------------------------------------------------
// deterministic RNG

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(engine_);
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    std::uniform_int_distribution<int> d(lo, hi);
    return d(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

inline bool finite(double v) { return std::isfinite(v); }

template <int N>
inline bool finite(const Vec<N>& v) {
  for (int i = 0; i < N; ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

}  // namespace dgfem
