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

#include "steplab/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "steplab/error.hpp"
#include "steplab/log.hpp"
#include "steplab/parallel.hpp"

namespace steplab {

void TrainConfig::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (!(eta > 0.0)) fail("eta must be positive");
  if (!(lr_peak >= 0.0)) fail("learning rate must be non-negative");
  if (!(weight_decay >= 0.0)) fail("weight decay must be non-negative");
  if (warmup_iters == 0) fail("warmup_iters must be >= 1");
  if (epochs == 0) fail("epochs must be >= 1");
  if (batch_size == 0) fail("batch size must be >= 1");
}

LossResult MilNceLoss(const LabelMatrix& labels, const DenseMatrix& scores, double eta) {
  if (!labels.m.SameShape(scores)) {
    throw Error(ErrorCode::kShapeMismatch, "MIL-NCE: labels and scores differ in shape");
  }
  if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "MIL-NCE: eta must be positive");
  const std::size_t kept = labels.KeptCount();
  if (kept == 0) throw Error(ErrorCode::kEmptyBatchRow, "MIL-NCE: no kept rows");

  LossResult out{0.0, DenseMatrix(scores.rows(), scores.cols())};
  const double row_weight = 1.0 / static_cast<double>(kept);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    if (!labels.kept[i]) continue;
    const auto row = scores.row(i);
    // Separate max shifts keep both log-sum-exp terms finite when the
    // positive cells sit far below the row peak.
    double peak = -std::numeric_limits<double>::infinity();
    double pos_peak = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < row.size(); ++t) {
      peak = std::max(peak, row[t] / eta);
      if (labels.m(i, t) != 0.0) pos_peak = std::max(pos_peak, row[t] / eta);
    }
    if (!std::isfinite(pos_peak)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "MIL-NCE: kept row " + std::to_string(i) + " has no positive mass");
    }
    double total = 0.0;
    double positive = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t) {
      total += std::exp(row[t] / eta - peak);
      if (labels.m(i, t) != 0.0) positive += std::exp(row[t] / eta - pos_peak);
    }
    const double log_total = peak + std::log(total);
    const double log_positive = pos_peak + std::log(positive);
    out.loss -= row_weight * (log_positive - log_total);
    auto grad = out.grad.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) {
      const double z = row[t] / eta;
      const double all_share = std::exp(z - log_total);
      const double pos_share = labels.m(i, t) != 0.0 ? std::exp(z - log_positive) : 0.0;
      grad[t] = row_weight * (all_share - pos_share) / eta;
    }
  }
  return out;
}

double LrAt(std::size_t iter, std::size_t total_iters, const TrainConfig& config) {
  if (total_iters <= config.warmup_iters) {
    throw Error(ErrorCode::kInvalidArgument,
                "schedule needs total_iters (" + std::to_string(total_iters) +
                    ") > warmup_iters (" + std::to_string(config.warmup_iters) + ")");
  }
  if (iter > total_iters) throw Error(ErrorCode::kInvalidArgument, "iteration past schedule end");
  if (iter < config.warmup_iters) {
    return config.lr_peak * static_cast<double>(iter) / static_cast<double>(config.warmup_iters);
  }
  const double progress = static_cast<double>(iter - config.warmup_iters) /
                          static_cast<double>(total_iters - config.warmup_iters);
  return config.lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

OptimizerState OptimizerState::For(const ModelParams& params) {
  return {params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamWStep(ModelParams& params, const ModelParams& grads, OptimizerState& state,
               double lr, const TrainConfig& config) {
  auto theta = params.NamedTensors();
  const auto g = grads.NamedTensors();
  auto m = state.first_moment.NamedTensors();
  auto v = state.second_moment.NamedTensors();
  if (g.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw Error(ErrorCode::kShapeMismatch, "AdamW: parameter structure mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double m_correction = 1.0 - std::pow(config.beta1, t);
  const double v_correction = 1.0 - std::pow(config.beta2, t);
  for (std::size_t n = 0; n < theta.size(); ++n) {
    DenseMatrix& p = *theta[n].second;
    const DenseMatrix& grad = *g[n].second;
    if (!grad.SameShape(p) || !m[n].second->SameShape(p) || !v[n].second->SameShape(p)) {
      throw Error(ErrorCode::kShapeMismatch, "AdamW: shape mismatch at " + theta[n].first);
    }
    auto pd = p.data();
    const auto gd = grad.data();
    auto md = m[n].second->data();
    auto vd = v[n].second->data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = config.beta1 * md[i] + (1.0 - config.beta1) * gd[i];
      vd[i] = config.beta2 * vd[i] + (1.0 - config.beta2) * gd[i] * gd[i];
      const double m_hat = md[i] / m_correction;
      const double v_hat = vd[i] / v_correction;
      pd[i] -= lr * (m_hat / (std::sqrt(v_hat) + config.epsilon) + config.weight_decay * pd[i]);
    }
  }
  ++params.version;
}

namespace {

struct Example {
  const CorpusEntry* entry;
  const DenseMatrix* segments;
  const DenseMatrix* steps;
  const LabelMatrix* labels;
};

std::vector<Example> CollectExamples(const Corpus& corpus, const LabelMap& labels,
                                     const FeatureSource& features, bool warn) {
  std::vector<Example> out;
  for (const auto& entry : corpus.entries) {
    auto it = labels.find(entry.video_id);
    if (it == labels.end() || it->second.KeptCount() == 0) {
      if (warn) log::Warn("skipping video '" + entry.video_id + "': no kept pseudo-labels");
      continue;
    }
    auto seg = entry.segment_embeddings.find(features.segment_encoder);
    auto step = entry.step_embeddings.find(features.step_encoder);
    if (seg == entry.segment_embeddings.end() || step == entry.step_embeddings.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "video '" + entry.video_id + "' lacks model input embeddings");
    }
    if (!it->second.m.SameShape(DenseMatrix(step->second.rows(), seg->second.rows()))) {
      throw Error(ErrorCode::kShapeMismatch,
                  "labels for '" + entry.video_id + "' do not match its steps x segments");
    }
    out.push_back({&entry, &seg->second, &step->second, &it->second});
  }
  return out;
}

}  // namespace

TrainResult Train(const Corpus& corpus, const LabelMap& labels, const ModelConfig& model_config,
                  const TrainConfig& config, const FeatureSource& features,
                  const CheckpointHook& on_checkpoint) {
  config.Validate();
  const auto examples = CollectExamples(corpus, labels, features, /*warn=*/true);
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "training corpus has no labelled videos");
  }

  TrainResult result;
  result.params = InitParams(model_config, config.seed);
  result.videos_used = examples.size();
  const std::size_t per_epoch = (examples.size() + config.batch_size - 1) / config.batch_size;
  result.total_iters = per_epoch * config.epochs;

  OptimizerState state = OptimizerState::For(result.params);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(examples.size());
  std::size_t iter = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::vector<ModelParams> grads(count);
      std::vector<double> losses(count);
      ParallelFor(count, config.jobs, [&](std::size_t b) {
        const Example& ex = examples[order[start + b]];
        auto fwd = Forward(result.params, *ex.segments, *ex.steps);
        auto loss = MilNceLoss(*ex.labels, fwd.scores, config.eta);
        losses[b] = loss.loss;
        grads[b] = Backward(result.params, fwd.cache, loss.grad);
      });

      // Fixed-order reduction keeps results independent of thread count.
      ModelParams total = std::move(grads[0]);
      auto total_tensors = total.NamedTensors();
      double batch_loss = losses[0];
      for (std::size_t b = 1; b < count; ++b) {
        const auto tensors = grads[b].NamedTensors();
        for (std::size_t n = 0; n < tensors.size(); ++n) {
          total_tensors[n].second->eigen() += tensors[n].second->eigen();
        }
        batch_loss += losses[b];
      }
      const double inv = 1.0 / static_cast<double>(count);
      for (auto& [name, tensor] : total_tensors) tensor->eigen() *= inv;
      batch_loss *= inv;

      const double lr = LrAt(iter, result.total_iters, config);
      AdamWStep(result.params, total, state, lr, config);
      result.curve.push_back({iter, lr, batch_loss});
      ++iter;
      if (on_checkpoint && config.checkpoint_every > 0 && iter % config.checkpoint_every == 0) {
        on_checkpoint(iter, result.params);
      }
      log::Debug("iter " + std::to_string(iter) + " loss " + std::to_string(batch_loss));
    }
  }
  return result;
}

double MeanLoss(const ModelParams& params, const Corpus& corpus, const LabelMap& labels,
                double eta, const FeatureSource& features) {
  const auto examples = CollectExamples(corpus, labels, features, /*warn=*/false);
  if (examples.empty()) throw Error(ErrorCode::kInvalidArgument, "no labelled videos");
  double total = 0.0;
  for (const auto& ex : examples) {
    total += MilNceLoss(*ex.labels, Forward(params, *ex.segments, *ex.steps).scores, eta).loss;
  }
  return total / static_cast<double>(examples.size());
}

void WriteLossCurve(const std::vector<LossRecord>& curve, const std::filesystem::path& path) {
  std::string out = "iter,lr,loss\n";
  char line[96];
  for (const auto& r : curve) {
    std::snprintf(line, sizeof line, "%zu,%.10g,%.10g\n", r.iter, r.lr, r.loss);
    out += line;
  }
  WriteFileBytes(path, out);
}

}  // namespace steplab
