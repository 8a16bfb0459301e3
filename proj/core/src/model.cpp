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

#include <cmath>
#include <numbers>
#include <random>

#include "steplab/error.hpp"

namespace steplab {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kPositionalStddev = 0.02;

using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Parameter plumbing.

void AppendLinear(const std::string& name, LinearParams& p,
                  std::vector<std::pair<std::string, DenseMatrix*>>& out) {
  out.emplace_back(name + ".weight", &p.weight);
  out.emplace_back(name + ".bias", &p.bias);
}

void AppendNorm(const std::string& name, LayerNormParams& p,
                std::vector<std::pair<std::string, DenseMatrix*>>& out) {
  out.emplace_back(name + ".scale", &p.scale);
  out.emplace_back(name + ".shift", &p.shift);
}

void AppendTransformer(const std::string& name, TransformerParams& p,
                       std::vector<std::pair<std::string, DenseMatrix*>>& out) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string prefix = name + ".layer" + std::to_string(i);
    auto& layer = p.layers[i];
    AppendNorm(prefix + ".attn_norm", layer.attn_norm, out);
    AppendLinear(prefix + ".query", layer.query, out);
    AppendLinear(prefix + ".key", layer.key, out);
    AppendLinear(prefix + ".value", layer.value, out);
    AppendLinear(prefix + ".attn_out", layer.attn_out, out);
    AppendNorm(prefix + ".ff_norm", layer.ff_norm, out);
    AppendLinear(prefix + ".ff_in", layer.ff_in, out);
    AppendLinear(prefix + ".ff_out", layer.ff_out, out);
  }
}

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  LinearParams Linear(std::size_t in, std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    LinearParams p{DenseMatrix(in, out), DenseMatrix(1, out)};
    for (double& v : p.weight.data()) v = dist(rng_);
    for (double& v : p.bias.data()) v = dist(rng_);
    return p;
  }

  static LayerNormParams Norm(std::size_t dim) {
    return {DenseMatrix(1, dim, 1.0), DenseMatrix(1, dim, 0.0)};
  }

  DenseMatrix Positional(std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> dist(0.0, kPositionalStddev);
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = dist(rng_);
    return m;
  }

  TransformerParams Transformer(const ModelConfig& c) {
    TransformerParams t;
    for (std::size_t i = 0; i < c.layers; ++i) {
      EncoderLayerParams layer;
      layer.attn_norm = Norm(c.hidden_dim);
      layer.query = Linear(c.hidden_dim, c.hidden_dim);
      layer.key = Linear(c.hidden_dim, c.hidden_dim);
      layer.value = Linear(c.hidden_dim, c.hidden_dim);
      layer.attn_out = Linear(c.hidden_dim, c.hidden_dim);
      layer.ff_norm = Norm(c.hidden_dim);
      layer.ff_in = Linear(c.hidden_dim, c.ff_dim());
      layer.ff_out = Linear(c.ff_dim(), c.hidden_dim);
      t.layers.push_back(std::move(layer));
    }
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Primitive layers.

RowMajorMatrix Affine(const RowMajorMatrix& x, const LinearParams& p) {
  RowMajorMatrix y = x * p.weight.eigen();
  y.rowwise() += p.bias.eigen().row(0);
  return y;
}

// Accumulates weight/bias gradients into `grad` and returns dLoss/dx.
RowMajorMatrix AffineBackward(const RowMajorMatrix& x, const LinearParams& p,
                              const RowMajorMatrix& dy, LinearParams& grad) {
  grad.weight.eigen().noalias() += x.transpose() * dy;
  grad.bias.eigen().row(0) += dy.colwise().sum();
  return dy * p.weight.eigen().transpose();
}

RowMajorMatrix LayerNorm(const RowMajorMatrix& x, const LayerNormParams& p,
                         LayerNormCache& cache) {
  const auto n = x.rows();
  cache.normalized.resize(n, x.cols());
  cache.rstd.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    cache.rstd(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.normalized.row(r) = (x.row(r).array() - mean) * cache.rstd(r);
  }
  RowMajorMatrix y = cache.normalized.array().rowwise() * p.scale.eigen().row(0).array();
  y.rowwise() += p.shift.eigen().row(0);
  return y;
}

RowMajorMatrix LayerNormBackward(const LayerNormCache& cache, const LayerNormParams& p,
                                 const RowMajorMatrix& dy, LayerNormParams& grad) {
  grad.scale.eigen().row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  grad.shift.eigen().row(0) += dy.colwise().sum();
  const RowMajorMatrix dnorm = dy.array().rowwise() * p.scale.eigen().row(0).array();
  RowMajorMatrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dnorm.row(r).mean();
    const double mean_dx = dnorm.row(r).dot(cache.normalized.row(r)) /
                           static_cast<double>(dy.cols());
    dx.row(r) = cache.rstd(r) *
                (dnorm.row(r).array() - mean_d - cache.normalized.row(r).array() * mean_dx);
  }
  return dx;
}

// tanh approximation of GELU.
constexpr double kGeluCoeff = 0.044715;
const double kGeluScale = std::sqrt(2.0 / std::numbers::pi);

RowMajorMatrix Gelu(const RowMajorMatrix& u) {
  return u.unaryExpr([](double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCoeff * x * x * x)));
  });
}

RowMajorMatrix GeluBackward(const RowMajorMatrix& u, const RowMajorMatrix& dy) {
  const RowMajorMatrix slope = u.unaryExpr([](double x) {
    const double t = std::tanh(kGeluScale * (x + kGeluCoeff * x * x * x));
    return 0.5 * (1.0 + t) +
           0.5 * x * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCoeff * x * x);
  });
  return dy.cwiseProduct(slope);
}

void SoftmaxRowsInPlace(RowMajorMatrix& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double peak = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - peak).exp();
    s.row(r) /= s.row(r).sum();
  }
}

// ---------------------------------------------------------------------------
// Transformer blocks.

RowMajorMatrix EncoderLayerForward(const EncoderLayerParams& p, const ModelConfig& c,
                                   const RowMajorMatrix& x, EncoderLayerCache& cache) {
  const auto heads = static_cast<Eigen::Index>(c.heads);
  const auto head_dim = static_cast<Eigen::Index>(c.hidden_dim / c.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  cache.input = x;
  cache.attn_in = LayerNorm(x, p.attn_norm, cache.attn_norm);
  cache.q = Affine(cache.attn_in, p.query);
  cache.k = Affine(cache.attn_in, p.key);
  cache.v = Affine(cache.attn_in, p.value);
  cache.context.resize(x.rows(), x.cols());
  cache.attention.resize(c.heads);
  for (Eigen::Index h = 0; h < heads; ++h) {
    const auto cols = Eigen::seqN(h * head_dim, head_dim);
    RowMajorMatrix s = (cache.q(Eigen::all, cols) * cache.k(Eigen::all, cols).transpose()) * scale;
    SoftmaxRowsInPlace(s);
    cache.context(Eigen::all, cols) = s * cache.v(Eigen::all, cols);
    cache.attention[h] = std::move(s);
  }
  cache.residual = x + Affine(cache.context, p.attn_out);

  cache.ff_in = LayerNorm(cache.residual, p.ff_norm, cache.ff_norm);
  cache.pre_activation = Affine(cache.ff_in, p.ff_in);
  cache.activation = Gelu(cache.pre_activation);
  return cache.residual + Affine(cache.activation, p.ff_out);
}

RowMajorMatrix EncoderLayerBackward(const EncoderLayerParams& p, const ModelConfig& c,
                                    const EncoderLayerCache& cache, const RowMajorMatrix& dy,
                                    EncoderLayerParams& grad) {
  const auto heads = static_cast<Eigen::Index>(c.heads);
  const auto head_dim = static_cast<Eigen::Index>(c.hidden_dim / c.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  // Feed-forward branch.
  RowMajorMatrix d_act = AffineBackward(cache.activation, p.ff_out, dy, grad.ff_out);
  RowMajorMatrix d_pre = GeluBackward(cache.pre_activation, d_act);
  RowMajorMatrix d_ff_in = AffineBackward(cache.ff_in, p.ff_in, d_pre, grad.ff_in);
  RowMajorMatrix d_residual = dy + LayerNormBackward(cache.ff_norm, p.ff_norm, d_ff_in, grad.ff_norm);

  // Attention branch.
  RowMajorMatrix d_context = AffineBackward(cache.context, p.attn_out, d_residual, grad.attn_out);
  RowMajorMatrix dq(cache.q.rows(), cache.q.cols());
  RowMajorMatrix dk(cache.k.rows(), cache.k.cols());
  RowMajorMatrix dv(cache.v.rows(), cache.v.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const auto cols = Eigen::seqN(h * head_dim, head_dim);
    const RowMajorMatrix& probs = cache.attention[h];
    const RowMajorMatrix d_ctx_h = d_context(Eigen::all, cols);
    const RowMajorMatrix d_probs = d_ctx_h * cache.v(Eigen::all, cols).transpose();
    dv(Eigen::all, cols) = probs.transpose() * d_ctx_h;
    const Vector row_dot = (d_probs.array() * probs.array()).rowwise().sum();
    RowMajorMatrix d_scores = probs.array() * (d_probs.colwise() - row_dot).array();
    d_scores *= scale;
    dq(Eigen::all, cols) = d_scores * cache.k(Eigen::all, cols);
    dk(Eigen::all, cols) = d_scores.transpose() * cache.q(Eigen::all, cols);
  }
  RowMajorMatrix d_attn_in = AffineBackward(cache.attn_in, p.query, dq, grad.query);
  d_attn_in += AffineBackward(cache.attn_in, p.key, dk, grad.key);
  d_attn_in += AffineBackward(cache.attn_in, p.value, dv, grad.value);
  return d_residual + LayerNormBackward(cache.attn_norm, p.attn_norm, d_attn_in, grad.attn_norm);
}

RowMajorMatrix TransformerForward(const TransformerParams& p, const ModelConfig& c,
                                  RowMajorMatrix x, TransformerCache& cache) {
  cache.layers.resize(p.layers.size());
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    x = EncoderLayerForward(p.layers[i], c, x, cache.layers[i]);
  }
  return x;
}

RowMajorMatrix TransformerBackward(const TransformerParams& p, const ModelConfig& c,
                                   const TransformerCache& cache, RowMajorMatrix dy,
                                   TransformerParams& grad) {
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    dy = EncoderLayerBackward(p.layers[i], c, cache.layers[i], dy, grad.layers[i]);
  }
  return dy;
}

void NormalizeRows(const RowMajorMatrix& x, Vector& norms, RowMajorMatrix& unit) {
  norms = x.rowwise().norm();
  unit = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (norms(r) > 0.0) unit.row(r) /= norms(r);
  }
}

RowMajorMatrix NormalizeRowsBackward(const Vector& norms, const RowMajorMatrix& unit,
                                     const RowMajorMatrix& d_unit) {
  RowMajorMatrix dx = RowMajorMatrix::Zero(unit.rows(), unit.cols());
  for (Eigen::Index r = 0; r < unit.rows(); ++r) {
    if (norms(r) == 0.0) continue;
    const double along = unit.row(r).dot(d_unit.row(r));
    dx.row(r) = (d_unit.row(r) - along * unit.row(r)) / norms(r);
  }
  return dx;
}

}  // namespace

void ModelConfig::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (video_input_dim == 0 || step_input_dim == 0) fail("input dims must be positive");
  if (hidden_dim == 0 || heads == 0) fail("hidden dim and heads must be positive");
  if (hidden_dim % heads != 0) fail("hidden dim must be divisible by heads");
  if (max_positions == 0) fail("max positions must be positive");
}

std::vector<std::pair<std::string, DenseMatrix*>> ModelParams::NamedTensors() {
  std::vector<std::pair<std::string, DenseMatrix*>> out;
  AppendLinear("video_proj", video_proj, out);
  AppendLinear("step_proj", step_proj, out);
  out.emplace_back("positional", &positional);
  AppendTransformer("video_encoder", video_encoder, out);
  AppendTransformer("step_encoder", step_encoder, out);
  AppendTransformer("joint_encoder", joint_encoder, out);
  return out;
}

std::vector<std::pair<std::string, const DenseMatrix*>> ModelParams::NamedTensors() const {
  auto mutable_view = const_cast<ModelParams*>(this)->NamedTensors();
  return {mutable_view.begin(), mutable_view.end()};
}

std::size_t ModelParams::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& [name, t] : NamedTensors()) n += t->size();
  return n;
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams out = *this;
  for (auto& [name, t] : out.NamedTensors()) t->fill(0.0);
  return out;
}

ModelParams InitParams(const ModelConfig& config, std::uint64_t seed) {
  config.Validate();
  Initializer init(seed);
  ModelParams p;
  p.config = config;
  p.video_proj = init.Linear(config.video_input_dim, config.hidden_dim);
  p.step_proj = init.Linear(config.step_input_dim, config.hidden_dim);
  p.positional = init.Positional(config.max_positions, config.hidden_dim);
  p.video_encoder = init.Transformer(config);
  p.step_encoder = init.Transformer(config);
  p.joint_encoder = init.Transformer(config);
  return p;
}

ForwardResult Forward(const ModelParams& params, const DenseMatrix& segment_features,
                      const DenseMatrix& step_features) {
  const ModelConfig& c = params.config;
  const auto num_segments = static_cast<Eigen::Index>(segment_features.rows());
  const auto num_steps = static_cast<Eigen::Index>(step_features.rows());
  if (segment_features.cols() != c.video_input_dim || step_features.cols() != c.step_input_dim) {
    throw Error(ErrorCode::kShapeMismatch, "model input width does not match config");
  }
  if (segment_features.rows() > c.max_positions ||
      (c.use_text_pe && step_features.rows() > c.max_positions)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sequence of " + std::to_string(segment_features.rows()) +
                    " exceeds positional table of " + std::to_string(c.max_positions));
  }
  if (num_segments == 0 || num_steps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "model needs at least one segment and one step");
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.params_version = params.version;
  cache.config = c;
  cache.segment_input = segment_features.eigen();
  cache.step_input = step_features.eigen();

  RowMajorMatrix video = Affine(cache.segment_input, params.video_proj);
  video += params.positional.eigen().topRows(num_segments);
  RowMajorMatrix steps = Affine(cache.step_input, params.step_proj);
  if (c.use_text_pe) steps += params.positional.eigen().topRows(num_steps);

  video = TransformerForward(params.video_encoder, c, std::move(video), cache.video);
  steps = TransformerForward(params.step_encoder, c, std::move(steps), cache.step);

  RowMajorMatrix joint(num_segments + num_steps, static_cast<Eigen::Index>(c.hidden_dim));
  joint.topRows(num_segments) = video;
  joint.bottomRows(num_steps) = steps;
  joint = TransformerForward(params.joint_encoder, c, std::move(joint), cache.joint);
  cache.video_out = joint.topRows(num_segments);
  cache.step_out = joint.bottomRows(num_steps);

  NormalizeRows(cache.video_out, cache.video_norms, cache.video_unit);
  NormalizeRows(cache.step_out, cache.step_norms, cache.step_unit);
  result.scores = DenseMatrix::FromEigen(cache.step_unit * cache.video_unit.transpose());
  return result;
}

ModelParams Backward(const ModelParams& params, const ForwardCache& cache,
                     const DenseMatrix& score_grad) {
  if (cache.params_version != params.version || !(cache.config == params.config)) {
    throw Error(ErrorCode::kStaleCache, "forward cache does not belong to these parameters");
  }
  const auto num_segments = cache.video_unit.rows();
  const auto num_steps = cache.step_unit.rows();
  if (score_grad.rows() != static_cast<std::size_t>(num_steps) ||
      score_grad.cols() != static_cast<std::size_t>(num_segments)) {
    throw Error(ErrorCode::kShapeMismatch, "score gradient shape does not match forward pass");
  }
  const ModelConfig& c = params.config;
  ModelParams grad = params.ZerosLike();

  const auto d_scores = score_grad.eigen();
  const RowMajorMatrix d_step_unit = d_scores * cache.video_unit;
  const RowMajorMatrix d_video_unit = d_scores.transpose() * cache.step_unit;

  RowMajorMatrix d_joint(num_segments + num_steps, static_cast<Eigen::Index>(c.hidden_dim));
  d_joint.topRows(num_segments) =
      NormalizeRowsBackward(cache.video_norms, cache.video_unit, d_video_unit);
  d_joint.bottomRows(num_steps) =
      NormalizeRowsBackward(cache.step_norms, cache.step_unit, d_step_unit);
  d_joint = TransformerBackward(params.joint_encoder, c, cache.joint, std::move(d_joint),
                                grad.joint_encoder);

  RowMajorMatrix d_video = TransformerBackward(params.video_encoder, c, cache.video,
                                               d_joint.topRows(num_segments), grad.video_encoder);
  RowMajorMatrix d_steps = TransformerBackward(params.step_encoder, c, cache.step,
                                               d_joint.bottomRows(num_steps), grad.step_encoder);

  grad.positional.eigen().topRows(num_segments) += d_video;
  if (c.use_text_pe) grad.positional.eigen().topRows(num_steps) += d_steps;
  AffineBackward(cache.segment_input, params.video_proj, d_video, grad.video_proj);
  AffineBackward(cache.step_input, params.step_proj, d_steps, grad.step_proj);
  return grad;
}

}  // namespace steplab
