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

#ifndef STEPLAB_TRAIN_HPP_
#define STEPLAB_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "steplab/corpus.hpp"
#include "steplab/label_matrix.hpp"
#include "steplab/model.hpp"

namespace steplab {

struct TrainConfig {
  double eta = 0.07;
  double lr_peak = 2e-4;
  double weight_decay = 1e-5;
  std::size_t warmup_iters = 1000;
  std::size_t epochs = 12;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t jobs = 1;
  std::size_t checkpoint_every = 0;  // iterations; 0 disables periodic saves

  void Validate() const;
};

// Which corpus embeddings feed the model.
struct FeatureSource {
  std::string segment_encoder = "s3d";
  std::string step_encoder = "bow";
};

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;  // dLoss/dScores
};

// MIL-NCE over the kept rows of `labels`: the mean over kept rows of
// -log(sum_pos exp(s/eta) / sum_all exp(s/eta)), with the denominator taken
// over the segments of the same video. Throws EmptyBatchRow when no row is kept.
LossResult MilNceLoss(const LabelMatrix& labels, const DenseMatrix& scores, double eta);

// Linear warmup to lr_peak, then half-cosine decay reaching 0 at total_iters.
double LrAt(std::size_t iter, std::size_t total_iters, const TrainConfig& config);

struct OptimizerState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  static OptimizerState For(const ModelParams& params);
};

// AdamW with bias-corrected moments and decoupled weight decay lr*wd*theta.
void AdamWStep(ModelParams& params, const ModelParams& grads, OptimizerState& state,
               double lr, const TrainConfig& config);

using LabelMap = std::map<std::string, LabelMatrix>;

struct LossRecord {
  std::size_t iter = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<LossRecord> curve;
  std::size_t total_iters = 0;
  std::size_t videos_used = 0;
};

using CheckpointHook = std::function<void(std::size_t iter, const ModelParams& params)>;

// Videos without labels or without any kept row are skipped with a warning.
// Batches are drawn from a per-epoch shuffle seeded by config.seed.
TrainResult Train(const Corpus& corpus, const LabelMap& labels, const ModelConfig& model_config,
                  const TrainConfig& config, const FeatureSource& features = {},
                  const CheckpointHook& on_checkpoint = {});

// Mean per-video MIL-NCE of `params` over every labelled video.
double MeanLoss(const ModelParams& params, const Corpus& corpus, const LabelMap& labels,
                double eta, const FeatureSource& features = {});

// "iter,lr,loss" header plus one row per iteration.
void WriteLossCurve(const std::vector<LossRecord>& curve, const std::filesystem::path& path);

}  // namespace steplab

#endif  // STEPLAB_TRAIN_HPP_
