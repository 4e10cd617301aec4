// strata/matrix.cpp
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

#include "strata/matrix.hpp"

#include <cmath>

#include "strata/error.hpp"
#include "strata/parallel.hpp"

namespace strata {

namespace {

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr long kParallelMinWork = 1 << 15;

void check_inner(int a, int b, const char* what) {
  if (a != b) {
    fail(Errc::shape_mismatch, std::string(what) + ": inner dimensions disagree");
  }
}

// One output row of C = A * B; identical inner loop for both paths.
inline void matmul_row(const double* arow, const Matrix& b, double* crow) {
  const int k = b.rows(), n = b.cols();
  for (int j = 0; j < n; ++j) crow[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b.data() + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void matmul_nt_row(const double* arow, const Matrix& b, double* crow) {
  const int n = b.rows(), k = b.cols();
  for (int j = 0; j < n; ++j) {
    const double* brow = b.data() + static_cast<size_t>(j) * k;
    double s = 0.0;
    for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
    crow[j] = s;
  }
}

inline void matmul_tn_row(const Matrix& a, const Matrix& b, int i, double* crow) {
  const int k = a.rows(), n = b.cols();
  for (int j = 0; j < n; ++j) crow[j] = 0.0;
  for (int p = 0; p < k; ++p) {
    const double av = a(p, i);
    const double* brow = b.data() + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

}  // namespace

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::fill(double v) {
  for (double& x : data_) x = v;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  const long work = static_cast<long>(a.rows()) * a.cols() * b.cols();
  const bool go_par = par::enabled() && work >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (go_par)
  for (int i = 0; i < a.rows(); ++i) {
    matmul_row(a.data() + static_cast<size_t>(i) * a.cols(), b,
               c.data() + static_cast<size_t>(i) * c.cols());
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix c(a.rows(), b.rows());
  const long work = static_cast<long>(a.rows()) * a.cols() * b.rows();
  const bool go_par = par::enabled() && work >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (go_par)
  for (int i = 0; i < a.rows(); ++i) {
    matmul_nt_row(a.data() + static_cast<size_t>(i) * a.cols(), b,
                  c.data() + static_cast<size_t>(i) * c.cols());
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix c(a.cols(), b.cols());
  const long work = static_cast<long>(a.cols()) * a.rows() * b.cols();
  const bool go_par = par::enabled() && work >= kParallelMinWork;
#pragma omp parallel for schedule(static) if (go_par)
  for (int i = 0; i < a.cols(); ++i) {
    matmul_tn_row(a, b, i, c.data() + static_cast<size_t>(i) * c.cols());
  }
  return c;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    matmul_row(a.data() + static_cast<size_t>(i) * a.cols(), b,
               c.data() + static_cast<size_t>(i) * c.cols());
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    matmul_nt_row(a.data() + static_cast<size_t>(i) * a.cols(), b,
                  c.data() + static_cast<size_t>(i) * c.cols());
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix c(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i) {
    matmul_tn_row(a, b, i, c.data() + static_cast<size_t>(i) * c.cols());
  }
  return c;
}

}  // namespace serial

void addmv(std::span<const double> x, const Matrix& a, std::span<double> y) {
  assert(static_cast<int>(x.size()) == a.cols() && static_cast<int>(y.size()) == a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.data() + static_cast<size_t>(i) * a.cols();
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += arow[j] * x[j];
    y[i] += s;
  }
}

void addmtv(std::span<const double> x, const Matrix& a, std::span<double> y) {
  assert(static_cast<int>(x.size()) == a.rows() && static_cast<int>(y.size()) == a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    const double* arow = a.data() + static_cast<size_t>(i) * a.cols();
    for (int j = 0; j < a.cols(); ++j) y[j] += xi * arow[j];
  }
}

void add_outer(std::span<const double> y, std::span<const double> x, Matrix& a) {
  assert(static_cast<int>(y.size()) == a.rows() && static_cast<int>(x.size()) == a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double yi = y[i];
    double* arow = a.data() + static_cast<size_t>(i) * a.cols();
    for (int j = 0; j < a.cols(); ++j) arow[j] += yi * x[j];
  }
}

void add_scaled(const Matrix& x, double s, Matrix& y) {
  assert(x.same_shape(y));
  const double* xs = x.data();
  double* ys = y.data();
  for (size_t i = 0; i < x.size(); ++i) ys[i] += s * xs[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace strata
