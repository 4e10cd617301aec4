// strata/matrix.hpp
//
// Copyright 2026 STRATA authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace strata {

// Dense row-major matrix of 64-bit reals. The only tensor type in the
// toolkit; biases are n x 1.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
    assert(rows >= 0 && cols >= 0);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> row(int r) {
    return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const;
  void fill(double v);

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Kernels. The public entry points run the row-parallel OpenMP path when
// strata::par::enabled() and the problem is big enough; otherwise they fall
// through to the serial loops. Each output element is produced by exactly
// one thread with the same accumulation order as the serial reference, so
// both paths are bit-identical.
Matrix matmul(const Matrix& a, const Matrix& b);     // (m x k) * (k x n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // (m x k) * (n x k)^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // (k x m)^T * (k x n)

namespace serial {
// Reference implementations kept for the kernel tests and the benchmark.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
}  // namespace serial

// y += A * x and y += A^T * x over raw spans (LSTM cell steps).
void addmv(std::span<const double> x, const Matrix& a, std::span<double> y);
void addmtv(std::span<const double> x, const Matrix& a, std::span<double> y);
// A += y * x^T
void add_outer(std::span<const double> y, std::span<const double> x, Matrix& a);
// y += s * x elementwise.
void add_scaled(const Matrix& x, double s, Matrix& y);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace strata
