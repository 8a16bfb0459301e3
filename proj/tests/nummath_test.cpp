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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "steplab/error.hpp"

namespace steplab {
namespace {

DenseMatrix RandomMatrix(std::size_t rows, std::size_t cols, double lo, double hi,
                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

void ExpectNear(const DenseMatrix& actual, const DenseMatrix& expected, double tol) {
  ASSERT_TRUE(actual.SameShape(expected));
  for (std::size_t r = 0; r < actual.rows(); ++r) {
    for (std::size_t c = 0; c < actual.cols(); ++c) {
      EXPECT_NEAR(actual(r, c), expected(r, c), tol) << "at (" << r << "," << c << ")";
    }
  }
}

TEST(L2NormalizeRows, PythagoreanRow) {
  ExpectNear(L2NormalizeRows({{3, 4}}), {{0.6, 0.8}}, 1e-12);
}

TEST(L2NormalizeRows, ZeroRowPassesThrough) {
  EXPECT_EQ(L2NormalizeRows({{0, 0}}), DenseMatrix({{0, 0}}));
}

TEST(L2NormalizeRows, MixedRowsHaveUnitNorm) {
  const DenseMatrix out = L2NormalizeRows({{1, 1}, {2, 0}});
  ExpectNear(out, {{0.7071, 0.7071}, {1, 0}}, 1e-4);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    EXPECT_NEAR(std::hypot(out(r, 0), out(r, 1)), 1.0, 1e-12);
  }
}

TEST(L2NormalizeRows, RejectsEmpty) {
  EXPECT_THROW(L2NormalizeRows(DenseMatrix()), Error);
}

TEST(RowSoftmax, EqualLogitsSplitEvenly) {
  ExpectNear(RowSoftmax({{0, 0}}, 0.07), {{0.5, 0.5}}, 1e-12);
}

TEST(RowSoftmax, UnitTemperatureMatchesLogistic) {
  const double e = std::exp(1.0);
  ExpectNear(RowSoftmax({{1, 0}}, 1.0), {{e / (e + 1), 1 / (e + 1)}}, 1e-12);
  ExpectNear(RowSoftmax({{1, 0}}, 1.0), {{0.7311, 0.2689}}, 1e-4);
}

TEST(RowSoftmax, SaturatedRowDoesNotOverflow) {
  const DenseMatrix out = RowSoftmax({{1000, 0}}, 0.07);
  EXPECT_TRUE(out.AllFinite());
  ExpectNear(out, {{1.0, 0.0}}, 1e-12);
}

TEST(RowSoftmax, RejectsNonPositiveTemperature) {
  EXPECT_THROW(RowSoftmax({{1, 2}}, 0.0), Error);
  EXPECT_THROW(RowSoftmax({{1, 2}}, -1.0), Error);
}

TEST(RowSoftmax, RowsSumToOneOnRandomInputs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const DenseMatrix m = RandomMatrix(1 + trial % 7, 1 + trial % 13, -1e3, 1e3, rng);
    const DenseMatrix out = RowSoftmax(m, trial % 2 ? 0.07 : 1.0);
    ASSERT_TRUE(out.AllFinite());
    for (std::size_t r = 0; r < out.rows(); ++r) {
      double sum = 0.0;
      for (double v : out.row(r)) sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(CosineSimilarityMatrix, IdenticalAndOrthogonal) {
  ExpectNear(CosineSimilarityMatrix({{1, 0}}, {{1, 0}}), {{1.0}}, 1e-12);
  ExpectNear(CosineSimilarityMatrix({{1, 0}}, {{0, 1}}), {{0.0}}, 1e-12);
}

TEST(CosineSimilarityMatrix, HandComputedSigns) {
  ExpectNear(CosineSimilarityMatrix({{1, 1}}, {{1, 0}, {-1, 0}}), {{0.7071, -0.7071}}, 1e-4);
}

TEST(CosineSimilarityMatrix, ZeroVectorGivesZero) {
  ExpectNear(CosineSimilarityMatrix({{0, 0}, {1, 2}}, {{3, 1}}),
             {{0.0}, {5.0 / (std::sqrt(5.0) * std::sqrt(10.0))}}, 1e-12);
}

TEST(CosineSimilarityMatrix, RejectsWidthMismatch) {
  EXPECT_THROW(CosineSimilarityMatrix({{1, 0}}, {{1, 0, 0}}), Error);
}

TEST(CosineSimilarityMatrix, SelfSimilarityDiagonalIsOne) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix a = RandomMatrix(6, 9, -3, 3, rng);
    const DenseMatrix sim = CosineSimilarityMatrix(a, a);
    for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_NEAR(sim(i, i), 1.0, 1e-9);
    for (double v : sim.data()) {
      EXPECT_LE(v, 1.0 + 1e-9);
      EXPECT_GE(v, -1.0 - 1e-9);
    }
  }
}

TEST(MeanPoolMatrices, ArithmeticMean) {
  const std::vector<DenseMatrix> ms = {{{0.2}}, {{0.4}}, {{0.6}}};
  ExpectNear(MeanPoolMatrices(ms), {{0.4}}, 1e-12);
  const std::vector<DenseMatrix> pair = {{{1, 0}}, {{0, 1}}};
  ExpectNear(MeanPoolMatrices(pair), {{0.5, 0.5}}, 1e-12);
}

TEST(MeanPoolMatrices, SingleIsIdentity) {
  const std::vector<DenseMatrix> one = {{{1, -2}, {3, 4}}};
  EXPECT_EQ(MeanPoolMatrices(one), one.front());
}

TEST(MeanPoolMatrices, RejectsEmptyAndMismatch) {
  EXPECT_THROW(MeanPoolMatrices({}), Error);
  const std::vector<DenseMatrix> bad = {{{1, 2}}, {{1}}};
  EXPECT_THROW(MeanPoolMatrices(bad), Error);
}

TEST(MeanPoolMatrices, PermutationInvariant) {
  std::mt19937_64 rng(3);
  std::vector<DenseMatrix> ms;
  for (int i = 0; i < 4; ++i) ms.push_back(RandomMatrix(3, 5, -1, 1, rng));
  const DenseMatrix reference = MeanPoolMatrices(ms);
  std::sort(ms.begin(), ms.end(), [](const DenseMatrix& a, const DenseMatrix& b) {
    return a(0, 0) < b(0, 0);
  });
  do {
    ExpectNear(MeanPoolMatrices(ms), reference, 1e-12);
  } while (std::next_permutation(ms.begin(), ms.end(), [](const DenseMatrix& a, const DenseMatrix& b) {
    return a(0, 0) < b(0, 0);
  }));
}

TEST(RowMinMaxNormalize, Examples) {
  ExpectNear(RowMinMaxNormalize({{2, 4, 6}}), {{0, 0.5, 1}}, 1e-12);
  ExpectNear(RowMinMaxNormalize({{5, 5}}), {{0.5, 0.5}}, 1e-12);
  ExpectNear(RowMinMaxNormalize({{-1, 1}}), {{0, 1}}, 1e-12);
}

TEST(RowMinMaxNormalize, PreservesArgmaxSet) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 300; ++trial) {
    DenseMatrix m(1 + trial % 4, 1 + trial % 9);
    for (double& v : m.data()) v = small(rng);  // integers force ties
    const DenseMatrix out = RowMinMaxNormalize(m);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double in_max = *std::max_element(m.row(r).begin(), m.row(r).end());
      const double out_max = *std::max_element(out.row(r).begin(), out.row(r).end());
      for (std::size_t c = 0; c < m.cols(); ++c) {
        EXPECT_EQ(m(r, c) == in_max, out(r, c) == out_max);
      }
    }
  }
}

TEST(RowArgmax, SmallestIndexWinsTies) {
  const std::vector<double> row = {0.5, 0.9, 0.9, 0.1};
  EXPECT_EQ(RowArgmax(row), 1u);
}

}  // namespace
}  // namespace steplab
