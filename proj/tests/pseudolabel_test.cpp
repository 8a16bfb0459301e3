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

#include "steplab/pseudolabel.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "steplab/error.hpp"
#include "test_util.hpp"

namespace steplab {
namespace {

using testing::TempDir;

std::vector<std::vector<int>> Cells(const LabelMatrix& y) {
  std::vector<std::vector<int>> out(y.rows(), std::vector<int>(y.cols()));
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) out[r][c] = static_cast<int>(y.m(r, c));
  }
  return out;
}

NarrationTrack Track(std::initializer_list<std::pair<double, double>> spans) {
  NarrationTrack t;
  for (auto [s, e] : spans) {
    StepRecord r;
    r.text = "n";
    r.start_sec = s;
    r.end_sec = e;
    t.items.push_back(r);
  }
  return t;
}

ScoreMatrix Fused(DenseMatrix m) { return {Pathway::kFused, std::move(m)}; }

TEST(BuildNvMatrix, Examples) {
  const auto one = Track({{2.0, 4.0}});
  const LabelMatrix y = BuildNvMatrix(one, 6);
  EXPECT_EQ(Cells(y), oracle::NvMatrix(one, 6).cells);
  EXPECT_EQ(Cells(y), (std::vector<std::vector<int>>{{0, 0, 1, 1, 0, 0}}));
  EXPECT_TRUE(y.kept[0]);

  const LabelMatrix past = BuildNvMatrix(Track({{7.0, 9.0}}), 6);
  EXPECT_EQ(Cells(past), (std::vector<std::vector<int>>{{0, 0, 0, 0, 0, 0}}));
  EXPECT_FALSE(past.kept[0]);

  const auto overlapping = Track({{0.5, 3.5}, {2.0, 5.0}});
  const LabelMatrix two = BuildNvMatrix(overlapping, 6);
  EXPECT_EQ(Cells(two), oracle::NvMatrix(overlapping, 6).cells);
  EXPECT_NO_THROW(two.Validate());
}

TEST(BuildSvLabels, Examples) {
  const LabelMatrix a = BuildSvLabels(Fused({{0.1, 0.2, 0.9, 0.3}}), 0.65, 1);
  EXPECT_EQ(Cells(a), (std::vector<std::vector<int>>{{0, 1, 1, 1}}));
  EXPECT_TRUE(a.kept[0]);
  EXPECT_EQ(a.anchor[0], 2u);
  EXPECT_EQ(*a.gamma, 0.65);
  EXPECT_EQ(*a.window, 1u);

  const LabelMatrix b = BuildSvLabels(Fused({{0.1, 0.5, 0.2, 0.3}}), 0.65, 2);
  EXPECT_EQ(Cells(b), (std::vector<std::vector<int>>{{0, 0, 0, 0}}));
  EXPECT_FALSE(b.kept[0]);

  const LabelMatrix c = BuildSvLabels(Fused({{0.9, 0.1, 0.2, 0.3}}), 0.65, 2);
  EXPECT_EQ(Cells(c), (std::vector<std::vector<int>>{{1, 1, 1, 0}}));
}

TEST(BuildSvLabels, PeakEqualToGammaIsKept) {
  EXPECT_TRUE(BuildSvLabels(Fused({{0.65, 0.1}}), 0.65, 0).kept[0]);
}

TEST(BuildSvLabels, TiesAnchorAtSmallestIndex) {
  const LabelMatrix y = BuildSvLabels(Fused({{0.2, 0.8, 0.1, 0.1, 0.8, 0.0}}), 0.5, 0);
  EXPECT_EQ(y.anchor[0], 1u);
  EXPECT_EQ(Cells(y), (std::vector<std::vector<int>>{{0, 1, 0, 0, 0, 0}}));
}

TEST(BuildSvLabels, RejectsNonFusedInput) {
  EXPECT_THROW(BuildSvLabels({Pathway::kSvLong, {{0.9}}}, 0.65, 2), Error);
}

// Random instances with coarse values so exact ties and gamma hits occur.
DenseMatrix RandomScores(std::mt19937_64& rng, std::size_t L, std::size_t T) {
  std::uniform_int_distribution<int> q(0, 20);
  DenseMatrix m(L, T);
  for (double& v : m.data()) v = q(rng) / 20.0;
  return m;
}

TEST(BuildSvLabels, MatchesBruteForceOn1000Instances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> L(1, 8), T(1, 32), W(0, 5);
  std::uniform_int_distribution<int> g(0, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const DenseMatrix m = RandomScores(rng, L(rng), T(rng));
    const double gamma = g(rng) / 20.0;
    const std::size_t w = W(rng);
    const LabelMatrix got = BuildSvLabels(Fused(m), gamma, w);
    const auto want = oracle::SvLabels(m, gamma, w);
    ASSERT_EQ(Cells(got), want.cells) << "trial " << trial;
    ASSERT_EQ(got.kept, want.kept) << "trial " << trial;
  }
}

TEST(BuildNvMatrix, MatchesBruteForceOn1000Instances) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> K(0, 8), T(1, 32);
  std::uniform_real_distribution<double> start(0.0, 36.0), len(0.05, 8.0);
  for (int trial = 0; trial < 1000; ++trial) {
    NarrationTrack track;
    const std::size_t k = K(rng);
    for (std::size_t i = 0; i < k; ++i) {
      StepRecord r;
      double s = start(rng);
      double e = s + len(rng);
      if (i % 2) {
        s = std::floor(s);
        e = std::ceil(e);
      }
      r.start_sec = s;
      r.end_sec = e;
      track.items.push_back(r);
    }
    std::sort(track.items.begin(), track.items.end(),
              [](const StepRecord& a, const StepRecord& b) { return *a.start_sec < *b.start_sec; });
    const std::size_t t = T(rng);
    const LabelMatrix got = BuildNvMatrix(track, t);
    const auto want = oracle::NvMatrix(track, t);
    ASSERT_EQ(Cells(got), want.cells);
    ASSERT_EQ(got.kept, want.kept);
  }
}

TEST(BuildSvLabels, GammaMonotonicity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const DenseMatrix m = RandomScores(rng, 8, 20);
    std::size_t prev = m.rows() + 1;
    for (int g = 0; g <= 20; ++g) {
      const std::size_t kept = BuildSvLabels(Fused(m), g / 20.0, 2).KeptCount();
      EXPECT_LE(kept, prev);
      prev = kept;
    }
  }
}

TEST(BuildSvLabels, WindowMonotonicityAndContiguity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const DenseMatrix m = RandomScores(rng, 6, 24);
    LabelMatrix prev = BuildSvLabels(Fused(m), 0.5, 0);
    for (std::size_t w = 0; w <= 6; ++w) {
      const LabelMatrix cur = BuildSvLabels(Fused(m), 0.5, w);
      for (std::size_t r = 0; r < cur.rows(); ++r) {
        for (std::size_t c = 0; c < cur.cols(); ++c) {
          if (prev.m(r, c) > 0) EXPECT_GT(cur.m(r, c), 0);
        }
        if (!cur.kept[r]) continue;
        std::size_t first = cur.cols(), last = 0, count = 0;
        for (std::size_t c = 0; c < cur.cols(); ++c) {
          if (cur.m(r, c) > 0) {
            first = std::min(first, c);
            last = c;
            ++count;
          }
        }
        EXPECT_EQ(count, last - first + 1);
        EXPECT_LE(count, 2 * w + 1);
        EXPECT_LE(first, cur.anchor[r]);
        EXPECT_GE(last, cur.anchor[r]);
      }
      prev = cur;
    }
  }
}

TEST(ComputeLabelStats, KeptRatio) {
  const LabelMatrix one_of_three = BuildSvLabels(Fused({{0.9, 0.1}, {0.1, 0.2}, {0.3, 0.3}}), 0.65, 0);
  EXPECT_NEAR(ComputeLabelStats(one_of_three).kept_ratio, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(ComputeLabelStats(BuildSvLabels(Fused({{0.9, 0.1}}), 0.65, 1)).kept_ratio, 1.0);
  EXPECT_EQ(ComputeLabelStats(BuildSvLabels(Fused({{0.1, 0.1}}), 0.65, 1)).kept_ratio, 0.0);
  const LabelStats s = ComputeLabelStats(BuildSvLabels(Fused({{0.9, 0, 0, 0, 0}}), 0.65, 2));
  EXPECT_EQ(s.mean_window_width, 3.0);
}

TEST(LabelMatrix, ValidateCatchesBrokenInvariants) {
  LabelMatrix y = BuildSvLabels(Fused({{0.9, 0.1}}), 0.65, 0);
  EXPECT_NO_THROW(y.Validate());
  y.m(0, 1) = 0.5;
  EXPECT_THROW(y.Validate(), Error);
  y.m(0, 1) = 0;
  y.kept[0] = false;
  EXPECT_THROW(y.Validate(), Error);
}

TEST(ScoreLabels, CountsCellsAndSteps) {
  CorpusEntry e;
  e.num_segments = 8;
  e.steps.resize(3);
  e.steps[0].gt_start_sec = 1.0;
  e.steps[0].gt_end_sec = 3.0;
  e.steps[1].gt_start_sec = 5.0;
  e.steps[1].gt_end_sec = 7.0;
  const LabelMatrix truth = GroundTruthLabels(e);
  EXPECT_FALSE(truth.kept[2]);

  DenseMatrix fused(3, 8, 0.0);
  fused(0, 2) = 1.0;  // anchor in [1, 3); window 1..3 has two true cells
  fused(1, 0) = 1.0;  // anchor outside [5, 7)
  fused(2, 4) = 1.0;  // no ground truth
  const LabelQuality q = ScoreLabels(BuildSvLabels(Fused(fused), 0.5, 1), truth);
  EXPECT_EQ(q.steps, 2u);
  EXPECT_EQ(q.recovered_steps, 1u);
  // Rows without ground truth contribute no cells.
  EXPECT_EQ(q.positive_cells, 5u);
  EXPECT_EQ(q.true_positive_cells, 2u);
  EXPECT_DOUBLE_EQ(q.Precision(), 0.4);
  EXPECT_DOUBLE_EQ(q.Recall(), 0.5);
  EXPECT_DOUBLE_EQ(q.F1(), 2 * 0.4 * 0.5 / 0.9);

  LabelQuality sum = q;
  sum += q;
  EXPECT_EQ(sum.steps, 4u);
  EXPECT_DOUBLE_EQ(sum.F1(), q.F1());
}

TEST(LabelFiles, WriteReadRoundTrip) {
  TempDir dir;
  const LabelMatrix y =
      BuildSvLabels(Fused({{0.1, 0.2, 0.9, 0.3, 0.1}, {0.1, 0.1, 0.1, 0.1, 0.1}}), 0.65, 2);
  WriteLabels(y, "vid7", dir / "vid7.json");
  const auto j = nlohmann::json::parse(ReadFileBytes(dir / "vid7.json"));
  EXPECT_EQ(j["video_id"], "vid7");
  EXPECT_EQ(j["gamma"], 0.65);
  EXPECT_EQ(j["window"], 2);
  EXPECT_EQ(j["rows"][0]["kept"], true);
  EXPECT_EQ(j["rows"][0]["start_idx"], 0);
  EXPECT_EQ(j["rows"][0]["end_idx"], 4);
  EXPECT_TRUE(j["rows"][1]["start_idx"].is_null());

  const LabelFile back = ReadLabels(dir / "vid7.json", 5);
  EXPECT_EQ(back.video_id, "vid7");
  EXPECT_EQ(back.labels.m, y.m);
  EXPECT_EQ(back.labels.kept, y.kept);
  EXPECT_EQ(*back.labels.gamma, 0.65);
  EXPECT_EQ(*back.labels.window, 2u);
}

TEST(LabelFiles, RejectsOutOfRangeIndices) {
  TempDir dir;
  WriteFileBytes(dir / "bad.json",
                 R"({"video_id":"v","gamma":0.65,"window":2,"rows":[{"kept":true,"start_idx":3,"end_idx":9}]})");
  EXPECT_THROW(ReadLabels(dir / "bad.json", 5), Error);
}

}  // namespace
}  // namespace steplab
