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

#ifndef STEPLAB_NUMMATH_HPP_
#define STEPLAB_NUMMATH_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace steplab {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMajorMatrix>;
using ConstMatrixView = Eigen::Map<const RowMajorMatrix>;

// Dense row-major matrix of 64-bit reals. Every score, label, embedding and
// parameter tensor in the toolkit is carried by this type.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix FromEigen(const RowMajorMatrix& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  MatrixView eigen() {
    return MatrixView(data_.data(), static_cast<Eigen::Index>(rows_),
                      static_cast<Eigen::Index>(cols_));
  }
  ConstMatrixView eigen() const {
    return ConstMatrixView(data_.data(), static_cast<Eigen::Index>(rows_),
                           static_cast<Eigen::Index>(cols_));
  }

  void fill(double value);
  bool SameShape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool AllFinite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Rows scaled to unit Euclidean norm; all-zero rows pass through unchanged.
DenseMatrix L2NormalizeRows(const DenseMatrix& m);

// Softmax of m / temperature along each row, max-subtracted. Throws on
// temperature <= 0.
DenseMatrix RowSoftmax(const DenseMatrix& m, double temperature);

// out(i, j) = cos(a_i, b_j); a zero vector on either side gives 0.
DenseMatrix CosineSimilarityMatrix(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix MeanPoolMatrices(std::span<const DenseMatrix> ms);

// Affine map of each row onto [0, 1]. Constant rows become 0.5 everywhere.
DenseMatrix RowMinMaxNormalize(const DenseMatrix& m);

DenseMatrix MatMul(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix MatMulTransposedB(const DenseMatrix& a, const DenseMatrix& b);

// Index of the row maximum; the smallest index wins ties.
std::size_t RowArgmax(std::span<const double> row);

}  // namespace steplab

#endif  // STEPLAB_NUMMATH_HPP_
