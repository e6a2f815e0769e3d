// nacorr/matrix.hpp
//
// Dense row-major double matrix plus the handful of kernels the models are
// built from.  The GEMM calls map onto Eigen; everything else is plain loops.

// Copyright 2026  The nacorr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NACORR_MATRIX_HPP_
#define NACORR_MATRIX_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nacorr/common.hpp"
#include "nacorr/rng.hpp"

namespace nacorr {

class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(static_cast<size_t>(rows) * cols, fill) {
    NACORR_CHECK(rows >= 0 && cols >= 0, "Matrix: bad shape ", rows, "x", cols);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return values_.size(); }

  double& at(int r, int c) { return values_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return values_[static_cast<size_t>(r) * cols_ + c]; }

  double* row_ptr(int r) { return values_.data() + static_cast<size_t>(r) * cols_; }
  const double* row_ptr(int r) const { return values_.data() + static_cast<size_t>(r) * cols_; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }
  void set_zero() { fill(0.0); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const { return detail::cat(rows_, "x", cols_); }

  void add_in_place(const Matrix& o) {
    NACORR_CHECK(same_shape(o), "add: shape mismatch ", shape_str(), " vs ", o.shape_str());
    for (size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  }

  void axpy(double a, const Matrix& o) {
    NACORR_CHECK(same_shape(o), "axpy: shape mismatch ", shape_str(), " vs ", o.shape_str());
    for (size_t i = 0; i < values_.size(); ++i) values_[i] += a * o.values_[i];
  }

  void scale(double a) {
    for (double& v : values_) v *= a;
  }

  Matrix col_block(int c0, int ncols) const {
    NACORR_CHECK(c0 >= 0 && c0 + ncols <= cols_, "col_block out of range");
    Matrix out(rows_, ncols);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < ncols; ++c) out.at(r, c) = at(r, c0 + c);
    return out;
  }

  void add_col_block(int c0, const Matrix& block) {
    NACORR_CHECK(block.rows() == rows_ && c0 + block.cols() <= cols_,
                 "add_col_block: shape mismatch");
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < block.cols(); ++c) at(r, c0 + c) += block.at(r, c);
  }

  void fill_gaussian(Rng& rng, double sigma) {
    for (double& v : values_) v = sigma * rng.gaussian();
  }

  void fill_xavier_uniform(Rng& rng, int fan_in, int fan_out) {
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : values_) v = a * (2.0 * rng.uniform() - 1.0);
  }

 private:
  int rows_, cols_;
  std::vector<double> values_;
};

namespace detail {
using EigenMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EigenConstMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline EigenConstMap map_of(const Matrix& m) {
  return EigenConstMap(m.data(), m.rows(), m.cols());
}
inline EigenMap map_of(Matrix& m) { return EigenMap(m.data(), m.rows(), m.cols()); }
}  // namespace detail

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  NACORR_CHECK(a.cols() == b.rows(), "matmul: shape mismatch ", a.shape_str(), " * ",
               b.shape_str());
  Matrix c(a.rows(), b.cols());
  detail::map_of(c).noalias() = detail::map_of(a) * detail::map_of(b);
  return c;
}

// C = A^T * B
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  NACORR_CHECK(a.rows() == b.rows(), "matmul_tn: shape mismatch ", a.shape_str(), "^T * ",
               b.shape_str());
  Matrix c(a.cols(), b.cols());
  detail::map_of(c).noalias() = detail::map_of(a).transpose() * detail::map_of(b);
  return c;
}

// C = A * B^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  NACORR_CHECK(a.cols() == b.cols(), "matmul_nt: shape mismatch ", a.shape_str(), " * ",
               b.shape_str(), "^T");
  Matrix c(a.rows(), b.rows());
  detail::map_of(c).noalias() = detail::map_of(a) * detail::map_of(b).transpose();
  return c;
}

// C += A^T * B (gradient accumulation form)
inline void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  NACORR_CHECK(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
               "matmul_tn_acc: shape mismatch");
  detail::map_of(c).noalias() += detail::map_of(a).transpose() * detail::map_of(b);
}

inline double dot_rows(const Matrix& a, int ra, const Matrix& b, int rb) {
  NACORR_CHECK(a.cols() == b.cols(), "dot_rows: width mismatch");
  const double* pa = a.row_ptr(ra);
  const double* pb = b.row_ptr(rb);
  double s = 0.0;
  for (int c = 0; c < a.cols(); ++c) s += pa[c] * pb[c];
  return s;
}

}  // namespace nacorr

#endif  // NACORR_MATRIX_HPP_
