// Copyright 2026 The steplab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "steplab/nummath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "steplab/error.hpp"

namespace steplab {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kShapeMismatch,
                "matrix data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::kShapeMismatch, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::FromEigen(const RowMajorMatrix& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()),
                  static_cast<std::size_t>(m.cols()));
  out.eigen() = m;
  return out;
}

void DenseMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool DenseMatrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace {

double RowNorm(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) sum += v * v;
  return std::sqrt(sum);
}

void RequireNonEmpty(const DenseMatrix& m, const char* op) {
  if (m.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(op) + ": empty matrix");
  }
}

}  // namespace

DenseMatrix L2NormalizeRows(const DenseMatrix& m) {
  RequireNonEmpty(m, "L2NormalizeRows");
  DenseMatrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double norm = RowNorm(row);
    if (norm == 0.0) continue;
    for (double& v : row) v /= norm;
  }
  return out;
}

DenseMatrix RowSoftmax(const DenseMatrix& m, double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "softmax temperature must be positive");
  }
  DenseMatrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    if (row.empty()) continue;
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp((v - peak) / temperature);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return out;
}

DenseMatrix CosineSimilarityMatrix(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "cosine similarity: column mismatch " + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.cols()));
  }
  // Zero rows stay zero after normalization, which yields the 0 convention.
  const DenseMatrix an = a.empty() ? a : L2NormalizeRows(a);
  const DenseMatrix bn = b.empty() ? b : L2NormalizeRows(b);
  DenseMatrix out = MatMulTransposedB(an, bn);
  for (double& v : out.data()) v = std::clamp(v, -1.0, 1.0);
  return out;
}

DenseMatrix MeanPoolMatrices(std::span<const DenseMatrix> ms) {
  if (ms.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mean pool of empty list");
  }
  DenseMatrix out(ms.front().rows(), ms.front().cols());
  for (const auto& m : ms) {
    if (!m.SameShape(out)) {
      throw Error(ErrorCode::kShapeMismatch, "mean pool: shape mismatch");
    }
    out.eigen() += m.eigen();
  }
  out.eigen() /= static_cast<double>(ms.size());
  return out;
}

DenseMatrix RowMinMaxNormalize(const DenseMatrix& m) {
  RequireNonEmpty(m, "RowMinMaxNormalize");
  DenseMatrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const auto [lo_it, hi_it] = std::minmax_element(row.begin(), row.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    for (double& v : row) v = range > 0.0 ? (v - lo) / range : 0.5;
  }
  return out;
}

DenseMatrix MatMul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "matmul: inner dimension mismatch");
  }
  DenseMatrix out(a.rows(), b.cols());
  if (!out.empty() && a.cols() > 0) out.eigen().noalias() = a.eigen() * b.eigen();
  return out;
}

DenseMatrix MatMulTransposedB(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "matmul^T: inner dimension mismatch");
  }
  DenseMatrix out(a.rows(), b.rows());
  if (!out.empty() && a.cols() > 0) {
    out.eigen().noalias() = a.eigen() * b.eigen().transpose();
  }
  return out;
}

std::size_t RowArgmax(std::span<const double> row) {
  if (row.empty()) throw Error(ErrorCode::kInvalidArgument, "argmax of empty row");
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

}  // namespace steplab
