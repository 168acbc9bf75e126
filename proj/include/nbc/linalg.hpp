#pragma once

// Minimal dense linear algebra. The matrices here are tiny (network layers,
// zonotope generators), and everything must work for both plain doubles and
// the reverse-mode scalar type, so we keep our own row-major container
// instead of pulling in a matrix library.

#include <cstddef>
#include <vector>

#include "nbc/errors.hpp"

namespace nbc {

template <class S>
using Vec = std::vector<S>;

template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = S(1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  S& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const S& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<S>& data() const { return a_; }
  std::vector<S>& data() { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<S> a_;
};

template <class S>
Vec<S> matvec(const Matrix<S>& m, const Vec<S>& x) {
  if (m.cols() != static_cast<int>(x.size()))
    throw InvalidInputError("matvec: dimension mismatch");
  Vec<S> y(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    S acc(0.0);
    for (int j = 0; j < m.cols(); ++j) acc = acc + m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

// y = m^T x, without materializing the transpose.
template <class S>
Vec<S> matvec_transposed(const Matrix<S>& m, const Vec<S>& x) {
  if (m.rows() != static_cast<int>(x.size()))
    throw InvalidInputError("matvec_transposed: dimension mismatch");
  Vec<S> y(m.cols(), S(0.0));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) y[j] = y[j] + m(i, j) * x[i];
  return y;
}

template <class S>
Matrix<S> matmul(const Matrix<S>& a, const Matrix<S>& b) {
  if (a.cols() != b.rows()) throw InvalidInputError("matmul: dimension mismatch");
  Matrix<S> c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const S& aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) c(i, j) = c(i, j) + aik * b(k, j);
    }
  return c;
}

// c = a^T b.
template <class S>
Matrix<S> matmul_transposed(const Matrix<S>& a, const Matrix<S>& b) {
  if (a.rows() != b.rows()) throw InvalidInputError("matmul_transposed: dimension mismatch");
  Matrix<S> c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k)
    for (int i = 0; i < a.cols(); ++i) {
      const S& aki = a(k, i);
      for (int j = 0; j < b.cols(); ++j) c(i, j) = c(i, j) + aki * b(k, j);
    }
  return c;
}

template <class S>
Vec<S> vec_add(const Vec<S>& x, const Vec<S>& y) {
  if (x.size() != y.size()) throw InvalidInputError("vec_add: dimension mismatch");
  Vec<S> z(x.size());
  for (size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
  return z;
}

template <class S>
S dot(const Vec<S>& x, const Vec<S>& y) {
  if (x.size() != y.size()) throw InvalidInputError("dot: dimension mismatch");
  S acc(0.0);
  for (size_t i = 0; i < x.size(); ++i) acc = acc + x[i] * y[i];
  return acc;
}

}  // namespace nbc
