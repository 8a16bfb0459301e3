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

#include "steplab/model.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "steplab/checkpoint.hpp"
#include "steplab/error.hpp"
#include "test_util.hpp"

namespace steplab {
namespace {

using testing::ExpectMatrixNear;
using testing::RandomMatrix;
using testing::TempDir;
using testing::TinyModelConfig;

TEST(ModelConfig, RejectsIndivisibleHeads) {
  ModelConfig c = TinyModelConfig();
  c.heads = 3;
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_THROW(InitParams(c, 0), Error);
}

TEST(ModelConfig, DefaultsMatchReferenceArchitecture) {
  const ModelConfig c;
  EXPECT_EQ(c.hidden_dim, 256u);
  EXPECT_EQ(c.layers, 2u);
  EXPECT_EQ(c.heads, 8u);
  EXPECT_EQ(c.max_positions, 1024u);
  EXPECT_FALSE(c.use_text_pe);
  EXPECT_EQ(c.ff_dim(), 1024u);
}

TEST(InitParams, DeterministicInSeed) {
  const ModelParams a = InitParams(TinyModelConfig(), 5);
  const ModelParams b = InitParams(TinyModelConfig(), 5);
  const ModelParams c = InitParams(TinyModelConfig(), 6);
  const auto ta = a.NamedTensors();
  const auto tb = b.NamedTensors();
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(*ta[i].second, *tb[i].second) << ta[i].first;
  EXPECT_NE(a.video_proj.weight, c.video_proj.weight);
}

TEST(InitParams, LayerNormAndBounds) {
  const ModelConfig cfg = TinyModelConfig();
  const ModelParams p = InitParams(cfg, 1);
  for (const auto& [name, t] : p.NamedTensors()) {
    if (name.ends_with("norm.scale")) {
      for (double v : t->data()) EXPECT_EQ(v, 1.0) << name;
    } else if (name.ends_with("norm.shift")) {
      for (double v : t->data()) EXPECT_EQ(v, 0.0) << name;
    }
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.video_input_dim));
  for (double v : p.video_proj.weight.data()) EXPECT_LE(std::abs(v), bound);
  EXPECT_EQ(p.positional.rows(), cfg.max_positions);
  EXPECT_EQ(p.video_proj.weight.rows(), cfg.video_input_dim);
  EXPECT_EQ(p.video_encoder.layers.size(), cfg.layers);
  EXPECT_EQ(p.joint_encoder.layers[0].ff_in.weight.cols(), cfg.ff_dim());
}

TEST(Forward, ShapeAndRange) {
  std::mt19937_64 rng(3);
  const ModelParams p = InitParams(TinyModelConfig(), 3);
  for (auto [T, L] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 3}, {16, 9}}) {
    const ForwardResult f = Forward(p, RandomMatrix(T, 6, rng), RandomMatrix(L, 5, rng));
    EXPECT_EQ(f.scores.rows(), L);
    EXPECT_EQ(f.scores.cols(), T);
    for (double v : f.scores.data()) {
      EXPECT_GE(v, -1.0 - 1e-6);
      EXPECT_LE(v, 1.0 + 1e-6);
    }
  }
}

TEST(Forward, InputErrors) {
  std::mt19937_64 rng(3);
  const ModelParams p = InitParams(TinyModelConfig(), 3);
  EXPECT_THROW(Forward(p, RandomMatrix(17, 6, rng), RandomMatrix(2, 5, rng)), Error);
  EXPECT_THROW(Forward(p, RandomMatrix(4, 5, rng), RandomMatrix(2, 5, rng)), Error);
  EXPECT_THROW(Forward(p, DenseMatrix(0, 6), RandomMatrix(2, 5, rng)), Error);
}

TEST(Forward, AttentionRowsAreStochastic) {
  std::mt19937_64 rng(4);
  const ModelParams p = InitParams(TinyModelConfig(), 4);
  const ForwardResult f = Forward(p, RandomMatrix(9, 6, rng, -5, 5), RandomMatrix(4, 5, rng, -5, 5));
  for (const TransformerCache* tc : {&f.cache.video, &f.cache.step, &f.cache.joint}) {
    for (const auto& layer : tc->layers) {
      ASSERT_EQ(layer.attention.size(), 2u);
      for (const auto& a : layer.attention) {
        for (Eigen::Index r = 0; r < a.rows(); ++r) EXPECT_NEAR(a.row(r).sum(), 1.0, 1e-6);
      }
    }
  }
}

TEST(Forward, StepOrderEquivariance) {
  std::mt19937_64 rng(5);
  const ModelParams p = InitParams(TinyModelConfig(), 5);
  const DenseMatrix seg = RandomMatrix(8, 6, rng);
  const DenseMatrix step = RandomMatrix(5, 5, rng);
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  DenseMatrix permuted(5, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t d = 0; d < 5; ++d) permuted(i, d) = step(perm[i], d);
  }
  const DenseMatrix a = Forward(p, seg, step).scores;
  const DenseMatrix b = Forward(p, seg, permuted).scores;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t t = 0; t < 8; ++t) EXPECT_NEAR(b(i, t), a(perm[i], t), 1e-12);
  }
}

TEST(Forward, TextPositionalBreaksStepOrderEquivariance) {
  std::mt19937_64 rng(5);
  ModelConfig cfg = TinyModelConfig();
  cfg.use_text_pe = true;
  const ModelParams p = InitParams(cfg, 5);
  const DenseMatrix seg = RandomMatrix(8, 6, rng);
  const DenseMatrix step = RandomMatrix(2, 5, rng);
  const DenseMatrix swapped = {{step(1, 0), step(1, 1), step(1, 2), step(1, 3), step(1, 4)},
                               {step(0, 0), step(0, 1), step(0, 2), step(0, 3), step(0, 4)}};
  const DenseMatrix a = Forward(p, seg, step).scores;
  const DenseMatrix b = Forward(p, seg, swapped).scores;
  EXPECT_GT(std::abs(a(0, 0) - b(1, 0)), 1e-9);
}

TEST(Forward, RepeatedCallsAreIdentical) {
  std::mt19937_64 rng(6);
  const ModelParams p = InitParams(TinyModelConfig(), 6);
  const DenseMatrix seg1 = RandomMatrix(8, 6, rng);
  const DenseMatrix seg2 = RandomMatrix(5, 6, rng);
  const DenseMatrix step = RandomMatrix(3, 5, rng);
  const DenseMatrix a1 = Forward(p, seg1, step).scores;
  const DenseMatrix a2 = Forward(p, seg2, step).scores;
  // Reversing the evaluation order reproduces each output bit for bit.
  EXPECT_EQ(Forward(p, seg2, step).scores, a2);
  EXPECT_EQ(Forward(p, seg1, step).scores, a1);
}

TEST(Forward, CosineHeadIgnoresFinalRowScale) {
  std::mt19937_64 rng(7);
  const ModelParams p = InitParams(TinyModelConfig(), 7);
  const ForwardResult f = Forward(p, RandomMatrix(6, 6, rng), RandomMatrix(3, 5, rng));
  RowMajorMatrix steps = f.cache.step_out;
  steps.row(1) *= 37.5;
  const DenseMatrix rescaled = CosineSimilarityMatrix(DenseMatrix::FromEigen(steps),
                                                      DenseMatrix::FromEigen(f.cache.video_out));
  ExpectMatrixNear(rescaled, f.scores, 1e-9);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(8);
  const ModelParams p = InitParams(TinyModelConfig(), 8);
  const ForwardResult f = Forward(p, RandomMatrix(6, 6, rng), RandomMatrix(3, 5, rng));
  const ModelParams g = Backward(p, f.cache, DenseMatrix(3, 6));
  for (const auto& [name, t] : g.NamedTensors()) {
    for (double v : t->data()) EXPECT_EQ(v, 0.0) << name;
  }
}

TEST(Backward, LinearInUpstreamGradient) {
  std::mt19937_64 rng(9);
  const ModelParams p = InitParams(TinyModelConfig(), 9);
  const ForwardResult f = Forward(p, RandomMatrix(6, 6, rng), RandomMatrix(3, 5, rng));
  const DenseMatrix up = RandomMatrix(3, 6, rng);
  DenseMatrix twice = up;
  for (double& v : twice.data()) v *= 2;
  const ModelParams g1 = Backward(p, f.cache, up);
  const ModelParams g2 = Backward(p, f.cache, twice);
  const auto t1 = g1.NamedTensors();
  const auto t2 = g2.NamedTensors();
  ASSERT_EQ(t1.size(), p.NamedTensors().size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    ASSERT_TRUE(t1[i].second->SameShape(*p.NamedTensors()[i].second));
    for (std::size_t k = 0; k < t1[i].second->size(); ++k) {
      EXPECT_NEAR(t2[i].second->data()[k], 2 * t1[i].second->data()[k], 1e-12) << t1[i].first;
    }
  }
}

TEST(Backward, StaleCacheIsRejected) {
  std::mt19937_64 rng(10);
  ModelParams p = InitParams(TinyModelConfig(), 10);
  const ForwardResult f = Forward(p, RandomMatrix(6, 6, rng), RandomMatrix(3, 5, rng));
  p.version += 1;
  try {
    Backward(p, f.cache, DenseMatrix(3, 6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStaleCache);
  }
  p.version -= 1;
  EXPECT_THROW(Backward(p, f.cache, DenseMatrix(2, 6)), Error);
}

TEST(Backward, MatchesFiniteDifferences) {
  const auto r = testing::CheckGradients(TinyModelConfig(), 7, 4, 11, 200);
  EXPECT_GE(r.sampled, 200u);
  EXPECT_EQ(r.groups.size(), 6u);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_LT(r.max_structural_abs, 1e-8);
}

TEST(Backward, MatchesFiniteDifferencesWithTextPositional) {
  ModelConfig cfg = TinyModelConfig();
  cfg.use_text_pe = true;
  cfg.layers = 1;
  const auto r = testing::CheckGradients(cfg, 5, 3, 12, 100);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_LT(r.max_structural_abs, 1e-8);
}

TEST(Checkpoint, RoundTripIsExact) {
  TempDir dir;
  ModelParams p = InitParams(TinyModelConfig(), 13);
  // Keep values float32-representable so EMB1 storage is lossless.
  for (auto& [name, t] : p.NamedTensors()) {
    for (double& v : t->data()) v = static_cast<float>(v);
  }
  SaveCheckpoint(p, 13, 42, dir / "ck");
  const Checkpoint c = LoadCheckpoint(dir / "ck");
  EXPECT_EQ(c.seed, 13u);
  EXPECT_EQ(c.step, 42u);
  EXPECT_EQ(c.params.config, p.config);
  const auto a = p.NamedTensors();
  const auto b = c.params.NamedTensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_EQ(*a[i].second, *b[i].second) << a[i].first;
  }
}

TEST(Checkpoint, MissingTensorIsReported) {
  TempDir dir;
  SaveCheckpoint(InitParams(TinyModelConfig(), 1), 1, 0, dir / "ck");
  std::filesystem::remove(dir / "ck" / "tensors" / "positional.emb");
  EXPECT_THROW(LoadCheckpoint(dir / "ck"), Error);
}

}  // namespace
}  // namespace steplab
