#pragma once

#include <cmath>
#include <complex>
#include <initializer_list>
#include <vector>

#include "pencilscope/errors.hpp"

namespace pencilscope {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Dense complex matrix in row-major order.  All pencil machinery here is
/// desk-scale (N up to a few tens), so a plain value type beats anything fancier.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != cols_)
        fail(ErrorCode::DimensionMismatch, "ragged initializer for ComplexMatrix");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix zero(int n) { return ComplexMatrix(n, n); }

  static ComplexMatrix diagonal(const std::vector<Complex>& d) {
    ComplexMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[i];
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(int i, int j) { return data_[i * cols_ + j]; }
  const Complex& operator()(int i, int j) const { return data_[i * cols_ + j]; }

  const std::vector<Complex>& data() const { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  ComplexMatrix transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = std::conj((*this)(i, j));
    return out;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const Complex& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0.0;
    for (const Complex& z : data_) s = std::max(s, std::abs(z));
    return s;
  }

  bool is_hermitian(double tol) const {
    if (!square()) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
  }

  bool is_skew_hermitian(double tol) const {
    if (!square()) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) + std::conj((*this)(j, i))) > tol) return false;
    return true;
  }

  bool is_real(double tol) const {
    for (const Complex& z : data_)
      if (std::abs(z.imag()) > tol) return false;
    return true;
  }

  bool all_finite() const {
    for (const Complex& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  ComplexVector column(int j) const {
    ComplexVector v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  void set_column(int j, const ComplexVector& v) {
    for (int i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  ComplexVector apply(const ComplexVector& x) const {
    ComplexVector y(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      Complex acc = 0.0;
      for (int j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    for (Complex& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) fail(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    ComplexMatrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int k = 0; k < a.cols(); ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex(0.0)) continue;
        for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

/// Inner product, linear in the first argument and conjugate-linear in the second.
inline Complex inner(const ComplexVector& u, const ComplexVector& v) {
  Complex s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * std::conj(v[i]);
  return s;
}

inline double norm2(const ComplexVector& v) {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline ComplexVector scaled(ComplexVector v, Complex s) {
  for (Complex& z : v) z *= s;
  return v;
}

inline ComplexVector vec_add(ComplexVector a, const ComplexVector& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline ComplexVector vec_sub(ComplexVector a, const ComplexVector& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

}  // namespace pencilscope
