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

#include "steplab/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "steplab/error.hpp"
#include "steplab/parallel.hpp"
#include "steplab/pseudolabel.hpp"

namespace steplab {

namespace {

constexpr const char* kNarrationEncoder = "text";
constexpr const char* kStepOnlyEncoder = "bow";
constexpr const char* kSegmentOnlyEncoder = "s3d";

bool ObservesSegments(const std::string& encoder) {
  return encoder != kNarrationEncoder && encoder != kStepOnlyEncoder;
}

bool ObservesSteps(const std::string& encoder) { return encoder != kSegmentOnlyEncoder; }

std::uint64_t VideoSeed(std::uint64_t seed, std::size_t video) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (video + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> RandomUnit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

void WriteNoisyRow(std::span<double> out, std::span<const double> base, double sigma,
                   std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma > 0.0 ? sigma : 1.0);
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = base[d] + (sigma > 0.0 ? normal(rng) : 0.0);
  }
}

std::string VideoId(std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "vid%04zu", v);
  return buf;
}

struct Narration {
  StepRecord record;
  std::vector<double> embedding;
};

}  // namespace

void SynthConfig::SetNoise(double sigma) {
  for (auto& [name, enc] : encoders) enc.noise_sigma = sigma;
}

void SynthConfig::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (num_segments == 0 || steps_per_video == 0) fail("synth: need segments and steps");
  if (num_tasks == 0 || steps_per_task < steps_per_video) {
    fail("synth: steps_per_task must be >= steps_per_video");
  }
  if (min_span == 0 || max_span < min_span) fail("synth: need 1 <= min_span <= max_span");
  if (narrations_per_step == 0) fail("synth: narrations_per_step must be >= 1");
  if (!(timestamp_jitter_sec >= 0.0)) fail("synth: jitter must be >= 0");
  if (!(irrelevant_narration_ratio >= 0.0 && irrelevant_narration_ratio <= 1.0)) {
    fail("synth: irrelevant narration ratio must lie in [0, 1]");
  }
  for (const char* required : {kNarrationEncoder, kStepOnlyEncoder, kSegmentOnlyEncoder}) {
    if (!encoders.contains(required)) fail(std::string("synth: missing encoder ") + required);
  }
  for (const auto& [name, enc] : encoders) {
    if (enc.dim == 0) fail("synth: encoder '" + name + "' has zero dim");
    if (!(enc.noise_sigma >= 0.0)) fail("synth: encoder '" + name + "' has negative sigma");
  }
  if (steps_per_video * min_span > num_segments) {
    throw Error(ErrorCode::kInfeasiblePacking,
                "synth: " + std::to_string(steps_per_video) + " steps of at least " +
                    std::to_string(min_span) + "s do not fit in " +
                    std::to_string(num_segments) + " segments");
  }
}

SynthCorpus GenerateSynthetic(const SynthConfig& config, std::size_t jobs) {
  config.Validate();
  const std::size_t num_types = config.num_tasks * config.steps_per_task;
  const std::size_t T = config.num_segments;

  // Shared step-type prototypes, one table per encoder.
  std::map<std::string, std::vector<std::vector<double>>> prototypes;
  std::mt19937_64 proto_rng(config.seed);
  for (const auto& [name, enc] : config.encoders) {
    auto& table = prototypes[name];
    for (std::size_t k = 0; k < num_types; ++k) table.push_back(RandomUnit(enc.dim, proto_rng));
  }

  std::vector<CorpusEntry> entries(config.num_videos);
  ParallelFor(config.num_videos, jobs, [&](std::size_t v) {
    std::mt19937_64 rng(VideoSeed(config.seed, v));
    CorpusEntry& entry = entries[v];
    entry.video_id = VideoId(v);
    entry.num_segments = T;
    const std::size_t task = v % config.num_tasks;
    const std::string task_id = "task" + std::to_string(task);

    // Ordered subset of the task's step pool.
    std::vector<std::size_t> pool(config.steps_per_task);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> chosen(pool.begin(),
                                    pool.begin() + static_cast<std::ptrdiff_t>(config.steps_per_video));
    std::sort(chosen.begin(), chosen.end());
    const std::size_t L = chosen.size();

    // Span lengths, shrunk until they fit, then random gaps between them.
    std::uniform_int_distribution<std::size_t> span_len(config.min_span, config.max_span);
    std::vector<std::size_t> lengths(L);
    for (auto& len : lengths) len = span_len(rng);
    std::size_t used = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
    while (used > T) {
      auto longest = std::max_element(lengths.begin(), lengths.end());
      --*longest;
      --used;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> weights(L + 1);
    for (double& w : weights) w = unit(rng);
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    const std::size_t free = T - used;
    std::vector<std::size_t> gaps(L + 1);
    std::size_t assigned = 0;
    for (std::size_t g = 0; g <= L; ++g) {
      gaps[g] = static_cast<std::size_t>(std::floor(free * weights[g] / weight_sum));
      assigned += gaps[g];
    }
    gaps[L] += free - assigned;
    std::vector<SegmentSpan> spans(L);
    std::vector<int> owner(T, -1);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < L; ++i) {
      cursor += gaps[i];
      spans[i] = {cursor, cursor + lengths[i]};
      for (std::size_t t = spans[i].begin; t < spans[i].end; ++t) owner[t] = static_cast<int>(i);
      cursor += lengths[i];
    }

    // Steps.
    for (std::size_t i = 0; i < L; ++i) {
      StepRecord s;
      s.text = task_id + "/step" + std::to_string(chosen[i]);
      s.gt_start_sec = static_cast<double>(spans[i].begin);
      s.gt_end_sec = static_cast<double>(spans[i].end);
      s.task_id = task_id;
      entry.steps.push_back(std::move(s));
    }

    // Narrations: one per step unless every narration is irrelevant, plus
    // distractors making up the irrelevant share.
    std::vector<Narration> narrations;
    const double ratio = config.irrelevant_narration_ratio;
    const std::size_t real = ratio >= 1.0 ? 0 : L;
    const std::size_t relevant = real * config.narrations_per_step;
    const std::size_t distractors =
        ratio >= 1.0 ? L * config.narrations_per_step
                     : static_cast<std::size_t>(std::lround(static_cast<double>(relevant) * ratio /
                                                            (1.0 - ratio)));
    const SynthEncoder& text_enc = config.encoders.at(kNarrationEncoder);
    std::uniform_real_distribution<double> jitter(-config.timestamp_jitter_sec,
                                                  config.timestamp_jitter_sec);
    for (std::size_t i = 0; i < real; ++i) {
      const double span_begin = static_cast<double>(spans[i].begin);
      const double span_len = static_cast<double>(spans[i].size());
      for (std::size_t j = 0; j < config.narrations_per_step; ++j) {
        // A sentence covering part of the step, then misaligned as a whole.
        std::uniform_real_distribution<double> length_dist(std::min(2.0, span_len), span_len);
        const double length = length_dist(rng);
        std::uniform_real_distribution<double> offset_dist(0.0, span_len - length);
        const double offset = span_len > length ? offset_dist(rng) : 0.0;
        const double shift = config.timestamp_jitter_sec > 0.0 ? jitter(rng) : 0.0;
        const double start = std::max(0.0, span_begin + offset + shift);
        const double end = std::max(start + 0.5, span_begin + offset + length + shift);
        Narration n;
        n.record.text = "narration about " + entry.steps[i].text;
        n.record.start_sec = start;
        n.record.end_sec = end;
        n.embedding.resize(text_enc.dim);
        WriteNoisyRow(n.embedding,
                      prototypes.at(kNarrationEncoder)[task * config.steps_per_task + chosen[i]],
                      text_enc.noise_sigma, rng);
        narrations.push_back(std::move(n));
      }
    }
    std::uniform_real_distribution<double> distractor_start(0.0, static_cast<double>(T) - 1.0);
    std::uniform_real_distribution<double> distractor_len(1.0, 4.0);
    for (std::size_t i = 0; i < distractors; ++i) {
      Narration n;
      n.record.text = "unrelated remark " + std::to_string(i);
      n.record.start_sec = distractor_start(rng);
      n.record.end_sec = *n.record.start_sec + distractor_len(rng);
      n.embedding.resize(text_enc.dim);
      WriteNoisyRow(n.embedding, RandomUnit(text_enc.dim, rng), text_enc.noise_sigma, rng);
      narrations.push_back(std::move(n));
    }
    std::stable_sort(narrations.begin(), narrations.end(), [](const Narration& a, const Narration& b) {
      return *a.record.start_sec < *b.record.start_sec;
    });
    DenseMatrix narration_emb(narrations.size(), text_enc.dim);
    for (std::size_t k = 0; k < narrations.size(); ++k) {
      std::copy(narrations[k].embedding.begin(), narrations[k].embedding.end(),
                narration_emb.row(k).begin());
      entry.narrations.items.push_back(std::move(narrations[k].record));
    }
    entry.narration_embeddings.emplace(kNarrationEncoder, std::move(narration_emb));

    // Per-encoder step and segment observations.
    for (const auto& [name, enc] : config.encoders) {
      const auto& table = prototypes.at(name);
      if (ObservesSteps(name)) {
        DenseMatrix steps(L, enc.dim);
        for (std::size_t i = 0; i < L; ++i) {
          const auto& proto = table[task * config.steps_per_task + chosen[i]];
          std::copy(proto.begin(), proto.end(), steps.row(i).begin());
        }
        entry.step_embeddings.emplace(name, std::move(steps));
      }
      if (ObservesSegments(name)) {
        const std::vector<double> background = RandomUnit(enc.dim, rng);
        DenseMatrix segments(T, enc.dim);
        for (std::size_t t = 0; t < T; ++t) {
          const auto& base = owner[t] < 0
                                 ? background
                                 : table[task * config.steps_per_task +
                                         chosen[static_cast<std::size_t>(owner[t])]];
          WriteNoisyRow(segments.row(t), base, enc.noise_sigma, rng);
        }
        entry.segment_embeddings.emplace(name, std::move(segments));
      }
    }
  });

  SynthCorpus out;
  for (auto& entry : entries) {
    out.ground_truth.emplace(entry.video_id, GroundTruthLabels(entry));
    out.corpus.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace steplab
