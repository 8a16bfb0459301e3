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

#include "steplab/pathways.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "steplab/error.hpp"
#include "steplab/pseudolabel.hpp"

namespace steplab {

std::string_view PathwayName(Pathway p) {
  switch (p) {
    case Pathway::kSnv: return "SNV";
    case Pathway::kSvLong: return "SV_LONG";
    case Pathway::kSvShort: return "SV_SHORT";
    case Pathway::kFused: return "FUSED";
  }
  return "?";
}

Pathway ParsePathway(std::string_view name) {
  for (Pathway p : {Pathway::kSnv, Pathway::kSvLong, Pathway::kSvShort, Pathway::kFused}) {
    if (PathwayName(p) == name) return p;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown pathway '" + std::string(name) + "'");
}

void PathwayConfig::Validate() const {
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidConfig, "tau must be positive");
  if (enabled.empty()) throw Error(ErrorCode::kInvalidConfig, "no pathways enabled");
  for (Pathway p : enabled) {
    if (p == Pathway::kFused) {
      throw Error(ErrorCode::kInvalidConfig, "FUSED is not an input pathway");
    }
  }
}

ScoreMatrix ComputeSnv(const DenseMatrix& step_emb, const DenseMatrix& narration_emb,
                       const LabelMatrix& y_nv, double tau) {
  if (narration_emb.rows() != y_nv.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "S-N-V: narration count differs from Y^NV rows");
  }
  if (step_emb.cols() != narration_emb.cols() && narration_emb.rows() > 0) {
    throw Error(ErrorCode::kShapeMismatch, "S-N-V: embedding width mismatch");
  }
  if (narration_emb.rows() == 0) {
    return {Pathway::kSnv, DenseMatrix(step_emb.rows(), y_nv.cols())};
  }
  // L2-normalized embeddings make the dot product a cosine.
  const DenseMatrix step_to_narration =
      RowSoftmax(CosineSimilarityMatrix(step_emb, narration_emb), tau);
  return {Pathway::kSnv, MatMul(step_to_narration, y_nv.m)};
}

ScoreMatrix ComputeSvDirect(const DenseMatrix& step_emb, const DenseMatrix& segment_emb,
                            Pathway pathway) {
  if (pathway != Pathway::kSvLong && pathway != Pathway::kSvShort) {
    throw Error(ErrorCode::kInvalidArgument, "direct pathway must be SV_LONG or SV_SHORT");
  }
  return {pathway, CosineSimilarityMatrix(step_emb, segment_emb)};
}

ScoreMatrix FusePathways(std::span<const ScoreMatrix> scores, const PathwayConfig& config) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to fuse");
  std::vector<DenseMatrix> inputs;
  inputs.reserve(scores.size());
  for (const auto& s : scores) {
    if (!s.m.SameShape(scores.front().m)) {
      throw Error(ErrorCode::kShapeMismatch, "fusion inputs differ in shape");
    }
    if (s.m.empty()) {
      inputs.push_back(s.m);
    } else {
      inputs.push_back(config.harmonize ? RowMinMaxNormalize(s.m) : s.m);
    }
  }
  return {Pathway::kFused, MeanPoolMatrices(inputs)};
}

VideoAlignment AlignVideo(const CorpusEntry& entry, const PathwayConfig& config) {
  config.Validate();
  auto lookup = [&](const EmbeddingMap& group, const std::string& id,
                    const char* side) -> const DenseMatrix& {
    auto it = group.find(id);
    if (it == group.end()) {
      throw Error(ErrorCode::kInvalidArgument, "video '" + entry.video_id + "' lacks " +
                                                   side + " embeddings for encoder '" + id + "'");
    }
    return it->second;
  };

  VideoAlignment out;
  for (Pathway p : config.enabled) {
    switch (p) {
      case Pathway::kSnv: {
        const DenseMatrix& steps =
            lookup(entry.step_embeddings, config.narration_text_encoder, "step");
        if (entry.narrations.size() == 0) {
          out.pathways.push_back({p, DenseMatrix(steps.rows(), entry.num_segments)});
          break;
        }
        const LabelMatrix y_nv = BuildNvMatrix(entry.narrations, entry.num_segments);
        out.pathways.push_back(ComputeSnv(
            steps, lookup(entry.narration_embeddings, config.narration_text_encoder, "narration"),
            y_nv, config.tau));
        break;
      }
      case Pathway::kSvLong:
        out.pathways.push_back(ComputeSvDirect(
            lookup(entry.step_embeddings, config.long_text_encoder, "step"),
            lookup(entry.segment_embeddings, config.long_video_encoder, "segment"), p));
        break;
      case Pathway::kSvShort:
        out.pathways.push_back(ComputeSvDirect(
            lookup(entry.step_embeddings, config.short_text_encoder, "step"),
            lookup(entry.segment_embeddings, config.short_video_encoder, "segment"), p));
        break;
      case Pathway::kFused:
        break;
    }
  }
  out.fused = FusePathways(out.pathways, config);
  return out;
}

void DumpScoreMatrix(const ScoreMatrix& score, const std::string& video_id,
                     const std::filesystem::path& dir) {
  const std::string stem = video_id + "." + std::string(PathwayName(score.pathway));
  SaveEmbeddingMatrix(score.m, dir / (stem + ".emb"));
  nlohmann::ordered_json sidecar;
  sidecar["video_id"] = video_id;
  sidecar["pathway"] = PathwayName(score.pathway);
  sidecar["rows"] = score.m.rows();
  sidecar["cols"] = score.m.cols();
  WriteFileBytes(dir / (stem + ".json"), sidecar.dump(2) + "\n");
}

}  // namespace steplab
