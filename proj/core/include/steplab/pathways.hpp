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

#ifndef STEPLAB_PATHWAYS_HPP_
#define STEPLAB_PATHWAYS_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steplab/corpus.hpp"
#include "steplab/label_matrix.hpp"
#include "steplab/nummath.hpp"

namespace steplab {

enum class Pathway { kSnv, kSvLong, kSvShort, kFused };

std::string_view PathwayName(Pathway p);
// Accepts SNV, SV_LONG, SV_SHORT, FUSED.
Pathway ParsePathway(std::string_view name);

// L x T step-to-segment alignment scores tagged with where they came from.
struct ScoreMatrix {
  Pathway pathway = Pathway::kFused;
  DenseMatrix m;
};

struct PathwayConfig {
  double tau = 0.07;
  bool harmonize = true;
  std::vector<Pathway> enabled = {Pathway::kSnv, Pathway::kSvLong, Pathway::kSvShort};
  // Text encoder shared by steps and narrations in the step-narration-video path.
  std::string narration_text_encoder = "text";
  std::string long_text_encoder = "long";
  std::string long_video_encoder = "long";
  std::string short_text_encoder = "short";
  std::string short_video_encoder = "short";

  void Validate() const;
};

// softmax(cos(steps, narrations) / tau) * Y^NV.
ScoreMatrix ComputeSnv(const DenseMatrix& step_emb, const DenseMatrix& narration_emb,
                       const LabelMatrix& y_nv, double tau);

// Cosine similarity between step and segment embeddings of one encoder pair.
ScoreMatrix ComputeSvDirect(const DenseMatrix& step_emb, const DenseMatrix& segment_emb,
                            Pathway pathway);

// Elementwise mean, after per-row min-max scaling when config.harmonize.
ScoreMatrix FusePathways(std::span<const ScoreMatrix> scores, const PathwayConfig& config);

struct VideoAlignment {
  std::vector<ScoreMatrix> pathways;  // in config.enabled order
  ScoreMatrix fused;
};

VideoAlignment AlignVideo(const CorpusEntry& entry, const PathwayConfig& config);

// Writes `<dir>/<video_id>.<PATHWAY>.emb` and a JSON sidecar naming the pathway.
void DumpScoreMatrix(const ScoreMatrix& score, const std::string& video_id,
                     const std::filesystem::path& dir);

}  // namespace steplab

#endif  // STEPLAB_PATHWAYS_HPP_
