/* Copyright 2026 The multiesc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "multiesc/matrix.hpp"

#include <cmath>

#include "multiesc/error.hpp"

namespace multiesc::nn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error("nn", "ShapeMismatch", "data length does not match rows * cols");
  }
}

Matrix Matrix::row_vector(std::initializer_list<double> values) {
  return Matrix(1, values.size(), std::vector<double>(values));
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error("nn", "ShapeMismatch", "ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

void Matrix::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Matrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

namespace kernels {

namespace {

struct GemmShape {
  std::size_t m, k, n;
};

GemmShape check(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& out,
                bool accumulate) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (k != kb) throw Error("nn", "ShapeMismatch", "gemm inner dimensions differ");
  if (accumulate) {
    if (out.rows() != m || out.cols() != n) {
      throw Error("nn", "ShapeMismatch", "gemm accumulator has the wrong shape");
    }
  } else if (out.rows() != m || out.cols() != n) {
    out = Matrix(m, n);
  }
  return {m, k, n};
}

// One output row: out.row(i) (+)= sum_k op(a)(i,k) * op(b).row(k), reduced in k order.
inline void gemm_row(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& out,
                     bool accumulate, const GemmShape& s, std::size_t i, std::vector<double>& acc) {
  acc.assign(s.n, 0.0);
  for (std::size_t kk = 0; kk < s.k; ++kk) {
    const double aik = trans_a ? a(kk, i) : a(i, kk);
    if (trans_b) {
      for (std::size_t j = 0; j < s.n; ++j) acc[j] += aik * b(j, kk);
    } else {
      const double* brow = b.data().data() + kk * s.n;
      for (std::size_t j = 0; j < s.n; ++j) acc[j] += aik * brow[j];
    }
  }
  double* orow = out.data().data() + i * s.n;
  if (accumulate) {
    for (std::size_t j = 0; j < s.n; ++j) orow[j] += acc[j];
  } else {
    for (std::size_t j = 0; j < s.n; ++j) orow[j] = acc[j];
  }
}

}  // namespace

void gemm_serial(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& out,
                 bool accumulate) {
  const auto s = check(a, trans_a, b, trans_b, out, accumulate);
  std::vector<double> acc;
  for (std::size_t i = 0; i < s.m; ++i) gemm_row(a, trans_a, b, trans_b, out, accumulate, s, i, acc);
}

void gemm_parallel(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& out,
                   bool accumulate) {
  const auto s = check(a, trans_a, b, trans_b, out, accumulate);
  const auto rows = static_cast<long long>(s.m);
#pragma omp parallel
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (long long i = 0; i < rows; ++i) {
      gemm_row(a, trans_a, b, trans_b, out, accumulate, s, static_cast<std::size_t>(i), acc);
    }
  }
}

void gemm(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& out,
          bool accumulate) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (m * k * n >= kParallelThreshold && m > 1) {
    gemm_parallel(a, trans_a, b, trans_b, out, accumulate);
  } else {
    gemm_serial(a, trans_a, b, trans_b, out, accumulate);
  }
}

}  // namespace kernels

}  // namespace multiesc::nn
