#pragma once

// Compressed-row sparse matrix plus a Jacobi-preconditioned conjugate
// gradient solver for the SPD systems assembled by this library.

#include <map>
#include <ostream>
#include <vector>

#include "dgfem/core.hpp"

namespace dgfem {

inline double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class SparseMatrix {
public:
  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n) {}

  int size() const { return n_; }

  void add(int row, int col, double value) { entries_[{row, col}] += value; }

  void compress() {
    row_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
    cols_.clear();
    vals_.clear();
    cols_.reserve(entries_.size());
    vals_.reserve(entries_.size());
    for (const auto& [rc, v] : entries_) ++row_ptr_[static_cast<std::size_t>(rc.first) + 1];
    for (int i = 0; i < n_; ++i) row_ptr_[static_cast<std::size_t>(i) + 1] += row_ptr_[static_cast<std::size_t>(i)];
    for (const auto& [rc, v] : entries_) {
      cols_.push_back(rc.second);
      vals_.push_back(v);
    }
    compressed_ = true;
  }

  bool compressed() const { return compressed_; }

  template <typename F>
  void for_each_in_row(int row, F&& f) const {
    for (std::size_t k = row_ptr_[static_cast<std::size_t>(row)]; k < row_ptr_[static_cast<std::size_t>(row) + 1]; ++k)
      f(cols_[k], vals_[k]);
  }

  double coeff(int row, int col) const {
    double out = 0.0;
    for_each_in_row(row, [&](int c, double v) {
      if (c == col) out = v;
    });
    return out;
  }

  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
    for (int r = 0; r < n_; ++r) {
      double s = 0.0;
      for_each_in_row(r, [&](int c, double v) { s += v * x[static_cast<std::size_t>(c)]; });
      y[static_cast<std::size_t>(r)] = s;
    }
    return y;
  }

  double row_sum(int row) const {
    double s = 0.0;
    for_each_in_row(row, [&](int, double v) { s += v; });
    return s;
  }

  double inf_norm() const {
    double m = 0.0;
    for (int r = 0; r < n_; ++r) {
      double s = 0.0;
      for_each_in_row(r, [&](int, double v) { s += std::abs(v); });
      m = std::max(m, s);
    }
    return m;
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (int r = 0; r < n_; ++r)
      for_each_in_row(r, [&](int c, double v) { m = std::max(m, std::abs(v - coeff(c, r))); });
    return m;
  }

  void write_triplets(std::ostream& out) const {
    for (int r = 0; r < n_; ++r)
      for_each_in_row(r, [&](int c, double v) {
        out << r << ' ' << c << ' ' << format_double(v) << '\n';
      });
  }

private:
  int n_ = 0;
  bool compressed_ = false;
  std::map<std::pair<int, int>, double> entries_;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
};

struct CgResult {
  std::vector<double> solution;
  std::vector<double> residual_history;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Jacobi-preconditioned CG.  `max_iterations <= 0` selects the default cap
// of 20 sqrt(n).  An optional initial guess warm-starts the iteration.
inline CgResult conjugate_gradient(const SparseMatrix& a, const std::vector<double>& b,
                                   double relative_tolerance = 1e-11, int max_iterations = 0,
                                   const std::vector<double>* initial = nullptr) {
  const int n = a.size();
  CgResult res;
  res.solution.assign(static_cast<std::size_t>(n), 0.0);
  double bnorm = std::sqrt(dotv(b, b));
  if (bnorm == 0.0) {
    res.relative_residual = 0.0;
    return res;
  }
  if (max_iterations <= 0)
    max_iterations = static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 10;

  std::vector<double> diag(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) {
    const double d = a.coeff(i, i);
    diag[static_cast<std::size_t>(i)] = d > 0.0 ? 1.0 / d : 1.0;
  }

  std::vector<double> r = b, z(static_cast<std::size_t>(n)), p, q;
  if (initial && initial->size() == static_cast<std::size_t>(n)) {
    res.solution = *initial;
    const auto ax = a.multiply(res.solution);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] -= ax[static_cast<std::size_t>(i)];
    if (std::sqrt(dotv(r, r)) <= relative_tolerance * bnorm) {
      res.relative_residual = std::sqrt(dotv(r, r)) / bnorm;
      return res;
    }
  }
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
  p = z;
  double rz = dotv(r, z);
  for (int it = 0; it < max_iterations; ++it) {
    q = a.multiply(p);
    const double pq = dotv(p, q);
    if (pq <= 0.0) fail(ErrorKind::solver_failure, "matrix not positive definite in CG");
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      res.solution[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= alpha * q[static_cast<std::size_t>(i)];
    }
    const double rnorm = std::sqrt(dotv(r, r));
    res.residual_history.push_back(rnorm / bnorm);
    res.iterations = it + 1;
    if (rnorm <= relative_tolerance * bnorm) {
      res.relative_residual = rnorm / bnorm;
      return res;
    }
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    const double rz_new = dotv(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
  }
  res.relative_residual = res.residual_history.empty() ? 1.0 : res.residual_history.back();
  std::string hist;
  for (std::size_t i = res.residual_history.size() > 5 ? res.residual_history.size() - 5 : 0;
       i < res.residual_history.size(); ++i)
    hist += " " + format_double(res.residual_history[i]);
  fail(ErrorKind::solver_failure,
       "CG did not converge in " + std::to_string(max_iterations) + " iterations; tail residuals:" + hist);
}

}  // namespace dgfem
