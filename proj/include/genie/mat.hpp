#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace genie {

// Dense row-major matrix of doubles. Small enough here that hand-rolled
// kernels beat pulling in a BLAS.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  std::size_t size() const { return data.size(); }
  void fill(double v) { data.assign(rows * cols, v); }
};

inline void check_dim(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// out = M x
inline void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
  check_dim(x.size() == m.cols && out.size() == m.rows, "matvec: dimension mismatch");
  const double* a = m.data.data();
  for (std::size_t i = 0; i < m.rows; ++i, a += m.cols) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += a[j] * x[j];
    out[i] = acc;
  }
}

// out += M^T u
inline void matvec_transpose_add(const Matrix& m, std::span<const double> u,
                                 std::span<double> out) {
  check_dim(u.size() == m.rows && out.size() == m.cols, "matvec_transpose_add: dimension mismatch");
  const double* a = m.data.data();
  for (std::size_t i = 0; i < m.rows; ++i, a += m.cols) {
    const double ui = u[i];
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += a[j] * ui;
  }
}

// M += u x^T
inline void outer_add(Matrix& m, std::span<const double> u, std::span<const double> x) {
  check_dim(u.size() == m.rows && x.size() == m.cols, "outer_add: dimension mismatch");
  double* a = m.data.data();
  for (std::size_t i = 0; i < m.rows; ++i, a += m.cols) {
    const double ui = u[i];
    for (std::size_t j = 0; j < m.cols; ++j) a[j] += ui * x[j];
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  check_dim(a.size() == b.size(), "dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// y += a x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_dim(x.size() == y.size(), "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double squared_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

}  // namespace genie
