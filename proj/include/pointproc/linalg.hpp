#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pointproc/errors.hpp"

namespace pointproc {

// Small dense square matrices (kernels live on <= 20 sites). Row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n, double fill = 0.0) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_row_major(int n, std::span<const double> vals) {
    if (static_cast<int>(vals.size()) != n * n)
      throw BoundError("matrix data has " + std::to_string(vals.size()) + " entries, expected " +
                       std::to_string(n * n));
    Matrix m(n);
    for (std::size_t i = 0; i < vals.size(); ++i) m.a_[i] = vals[i];
    return m;
  }

  int size() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  bool symmetric(double tol = 1e-12) const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  Matrix operator*(const Matrix& o) const {
    Matrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        const double aik = (*this)(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
      }
    return r;
  }

  Matrix operator+(const Matrix& o) const {
    Matrix r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
    return r;
  }

  // Principal submatrix on the given (0-based, distinct) indices.
  Matrix submatrix(std::span<const int> idx) const {
    Matrix r(static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        r(static_cast<int>(i), static_cast<int>(j)) = (*this)(idx[i], idx[j]);
    return r;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

// Determinant by LU with partial pivoting; det of the empty matrix is 1.
inline double determinant(Matrix m) {
  const int n = m.size();
  if (n == 0) return 1.0;
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
    if (m(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
      det = -det;
    }
    det *= m(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) m(r, j) -= f * m(col, j);
    }
  }
  return det;
}

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i <-> values[i]
};

// Cyclic Jacobi for symmetric matrices; plenty for n <= 20.
inline EigenDecomposition symmetric_eigen(const Matrix& input) {
  if (!input.symmetric(1e-9)) throw BoundError("eigensolve requires a symmetric matrix");
  const int n = input.size();
  Matrix a = input;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  EigenDecomposition d;
  d.values.resize(n);
  for (int i = 0; i < n; ++i) d.values[i] = a(i, i);
  // Sort ascending, permuting columns along.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (d.values[order[j]] < d.values[order[i]]) std::swap(order[i], order[j]);
  std::vector<double> sorted(n);
  Matrix vec(n);
  for (int i = 0; i < n; ++i) {
    sorted[i] = d.values[order[i]];
    for (int k = 0; k < n; ++k) vec(k, i) = v(k, order[i]);
  }
  d.values = std::move(sorted);
  d.vectors = std::move(vec);
  return d;
}

// Spectral map f applied to a symmetric matrix.
template <class F>
Matrix spectral_apply(const Matrix& m, F&& f) {
  const EigenDecomposition d = symmetric_eigen(m);
  const int n = m.size();
  Matrix r(n);
  for (int e = 0; e < n; ++e) {
    const double fe = f(d.values[e]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) += fe * d.vectors(i, e) * d.vectors(j, e);
  }
  return r;
}

}  // namespace pointproc
