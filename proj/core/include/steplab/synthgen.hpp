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

#ifndef STEPLAB_SYNTHGEN_HPP_
#define STEPLAB_SYNTHGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "steplab/corpus.hpp"
#include "steplab/train.hpp"

namespace steplab {

struct SynthEncoder {
  std::size_t dim = 32;
  double noise_sigma = 0.0;  // per-dimension Gaussian std added to observations
};

// Synthetic narrated-video corpora with known step boundaries.
//
// Each task owns a pool of step types; each step type has an independent unit
// prototype under every encoder. A video picks an ordered subset of its task's
// steps and lays them on disjoint ground-truth spans. Per encoder:
//  - segments inside a span observe the step prototype plus noise; other
//    segments observe a per-video background vector plus noise;
//  - LLM-steps observe the clean prototype;
//  - each step is narrated by several sentences ("text" encoder: prototype
//    plus noise), each covering part of the step and shifted in time by up to
//    +/- jitter; distractor sentences are random directions at random times
//    and make up the irrelevant share of the track.
// The "s3d" and "bow" encoders carry the model's inputs and use unrelated
// prototypes for the two modalities.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t num_videos = 8;
  std::size_t num_segments = 64;
  std::size_t steps_per_video = 6;
  std::size_t num_tasks = 4;
  std::size_t steps_per_task = 8;
  std::size_t min_span = 4;
  std::size_t max_span = 10;
  std::size_t narrations_per_step = 3;
  double timestamp_jitter_sec = 0.0;
  double irrelevant_narration_ratio = 0.0;
  std::map<std::string, SynthEncoder> encoders = {
      {"text", {}}, {"long", {}}, {"short", {}}, {"s3d", {}}, {"bow", {}}};

  // Same sigma on every encoder.
  void SetNoise(double sigma);
  void Validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  LabelMap ground_truth;  // video id -> steps x segments truth
};

// Deterministic in config.seed; throws InfeasiblePacking when the steps cannot
// fit into the video at min_span each.
SynthCorpus GenerateSynthetic(const SynthConfig& config, std::size_t jobs = 1);

}  // namespace steplab

#endif  // STEPLAB_SYNTHGEN_HPP_
