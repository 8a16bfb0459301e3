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

#ifndef STEPLAB_TESTS_GRADCHECK_HPP_
#define STEPLAB_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>

#include "steplab/model.hpp"
#include "steplab/pseudolabel.hpp"
#include "steplab/train.hpp"
#include "test_util.hpp"

namespace steplab::testing {

struct GradCheckResult {
  std::size_t sampled = 0;
  double max_rel_error = 0.0;
  std::string worst;
  std::set<std::string> groups;  // top-level parameter groups touched
  // Key biases shift every logit of an attention row equally, so softmax
  // cancels them and their exact gradient is zero. Those cells are checked
  // against an absolute bound instead of a relative one.
  std::size_t structural_zero = 0;
  double max_structural_abs = 0.0;
};

inline bool IsStructurallyZero(const std::string& name) {
  return name.find("key.bias") != std::string::npos;
}

// |a - n| / max(|a|, |n|); 0 when both vanish.
inline double RelativeError(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
}

// Compares Backward(MIL-NCE gradient) against central differences of the
// scalar loss on a small random model. Every named tensor is sampled at least
// once, round-robin, until `min_samples` entries are checked.
inline GradCheckResult CheckGradients(const ModelConfig& config, std::size_t T, std::size_t L,
                                      std::uint64_t seed, std::size_t min_samples,
                                      double h = 1e-5) {
  std::mt19937_64 rng(seed);
  ModelParams params = InitParams(config, seed);
  const DenseMatrix seg = RandomMatrix(T, config.video_input_dim, rng);
  const DenseMatrix step = RandomMatrix(L, config.step_input_dim, rng);
  const LabelMatrix labels =
      BuildSvLabels({Pathway::kFused, RandomMatrix(L, T, rng, 0.0, 1.0)}, 0.0, 1);
  const double eta = 0.07;

  auto loss_of = [&](const ModelParams& p) {
    return MilNceLoss(labels, Forward(p, seg, step).scores, eta).loss;
  };
  const ForwardResult fwd = Forward(params, seg, step);
  const LossResult loss = MilNceLoss(labels, fwd.scores, eta);
  ModelParams grads = Backward(params, fwd.cache, loss.grad);

  auto tensors = params.NamedTensors();
  auto grad_tensors = grads.NamedTensors();
  GradCheckResult result;
  std::size_t round = 0;
  while (result.sampled < min_samples || round == 0) {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      DenseMatrix& w = *tensors[i].second;
      // Positional rows past T never reach the loss.
      const std::size_t rows = tensors[i].first == "positional" ? std::min(T, w.rows()) : w.rows();
      std::uniform_int_distribution<std::size_t> r(0, rows - 1), c(0, w.cols() - 1);
      const std::size_t rr = r(rng);
      const std::size_t cc = c(rng);
      const double saved = w(rr, cc);
      w(rr, cc) = saved + h;
      const double up = loss_of(params);
      w(rr, cc) = saved - h;
      const double down = loss_of(params);
      w(rr, cc) = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = (*grad_tensors[i].second)(rr, cc);
      result.groups.insert(tensors[i].first.substr(0, tensors[i].first.find('.')));
      ++result.sampled;
      if (IsStructurallyZero(tensors[i].first)) {
        ++result.structural_zero;
        result.max_structural_abs =
            std::max({result.max_structural_abs, std::abs(analytic), std::abs(numeric)});
        continue;
      }
      const double err = RelativeError(analytic, numeric);
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = tensors[i].first + "[" + std::to_string(rr) + "," + std::to_string(cc) +
                       "] analytic=" + std::to_string(analytic) +
                       " numeric=" + std::to_string(numeric);
      }
    }
    ++round;
  }
  return result;
}

inline ModelConfig TinyModelConfig() {
  ModelConfig c;
  c.video_input_dim = 6;
  c.step_input_dim = 5;
  c.hidden_dim = 8;
  c.layers = 2;
  c.heads = 2;
  c.max_positions = 16;
  return c;
}

}  // namespace steplab::testing

#endif  // STEPLAB_TESTS_GRADCHECK_HPP_
