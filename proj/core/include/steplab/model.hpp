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

#ifndef STEPLAB_MODEL_HPP_
#define STEPLAB_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "steplab/nummath.hpp"

namespace steplab {

// Step-grounding network: per-modality projections, a learnable positional
// table on the video side, unimodal video and step transformers, a joint
// transformer over [video; steps], and a cosine similarity head.
//
// Transformer blocks are pre-norm: x + Attn(LN(x)), then x + FFN(LN(x)), with
// a 4*hidden feed-forward width and tanh-approximated GELU. No dropout.
struct ModelConfig {
  std::size_t video_input_dim = 512;
  std::size_t step_input_dim = 512;
  std::size_t hidden_dim = 256;
  std::size_t layers = 2;
  std::size_t heads = 8;
  std::size_t max_positions = 1024;
  bool use_text_pe = false;

  std::size_t ff_dim() const { return 4 * hidden_dim; }
  void Validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LinearParams {
  DenseMatrix weight;  // in x out
  DenseMatrix bias;    // 1 x out
};

struct LayerNormParams {
  DenseMatrix scale;  // 1 x D
  DenseMatrix shift;  // 1 x D
};

struct EncoderLayerParams {
  LayerNormParams attn_norm;
  LinearParams query;
  LinearParams key;
  LinearParams value;
  LinearParams attn_out;
  LayerNormParams ff_norm;
  LinearParams ff_in;
  LinearParams ff_out;
};

struct TransformerParams {
  std::vector<EncoderLayerParams> layers;
};

struct ModelParams {
  ModelConfig config;
  LinearParams video_proj;
  LinearParams step_proj;
  DenseMatrix positional;  // max_positions x D
  TransformerParams video_encoder;
  TransformerParams step_encoder;
  TransformerParams joint_encoder;
  // Bumped on every in-place update so stale forward caches are detectable.
  std::uint64_t version = 0;

  // Every learnable tensor with a stable dotted name, in a fixed order.
  std::vector<std::pair<std::string, DenseMatrix*>> NamedTensors();
  std::vector<std::pair<std::string, const DenseMatrix*>> NamedTensors() const;
  std::size_t ParameterCount() const;
  // Same structure, all entries zero.
  ModelParams ZerosLike() const;
};

// Linear weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); layer-norm
// scale 1, shift 0; positional table ~ N(0, 0.02^2). Deterministic in seed.
ModelParams InitParams(const ModelConfig& config, std::uint64_t seed);

struct LayerNormCache {
  RowMajorMatrix normalized;  // (x - mean) * rstd
  Eigen::VectorXd rstd;
};

struct EncoderLayerCache {
  RowMajorMatrix input;
  LayerNormCache attn_norm;
  RowMajorMatrix attn_in;
  RowMajorMatrix q, k, v;
  std::vector<RowMajorMatrix> attention;  // per head, rows sum to 1
  RowMajorMatrix context;
  RowMajorMatrix residual;  // input + attention output
  LayerNormCache ff_norm;
  RowMajorMatrix ff_in;
  RowMajorMatrix pre_activation;
  RowMajorMatrix activation;
};

struct TransformerCache {
  std::vector<EncoderLayerCache> layers;
};

struct ForwardCache {
  std::uint64_t params_version = 0;
  ModelConfig config;
  RowMajorMatrix segment_input;
  RowMajorMatrix step_input;
  TransformerCache video;
  TransformerCache step;
  TransformerCache joint;
  RowMajorMatrix video_out;  // joint output rows [0, T), before normalization
  RowMajorMatrix step_out;   // joint output rows [T, T + L)
  Eigen::VectorXd video_norms;
  Eigen::VectorXd step_norms;
  RowMajorMatrix video_unit;
  RowMajorMatrix step_unit;
};

struct ForwardResult {
  DenseMatrix scores;  // L x T cosine similarities
  ForwardCache cache;
};

ForwardResult Forward(const ModelParams& params, const DenseMatrix& segment_features,
                      const DenseMatrix& step_features);

// Gradients of a scalar loss w.r.t. every parameter, given dLoss/dScores.
// Throws StaleCache if params changed since the forward pass.
ModelParams Backward(const ModelParams& params, const ForwardCache& cache,
                     const DenseMatrix& score_grad);

}  // namespace steplab

#endif  // STEPLAB_MODEL_HPP_
