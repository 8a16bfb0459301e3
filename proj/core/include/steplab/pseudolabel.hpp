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

#ifndef STEPLAB_PSEUDOLABEL_HPP_
#define STEPLAB_PSEUDOLABEL_HPP_

#include <cstddef>
#include <filesystem>
#include <string>

#include "steplab/corpus.hpp"
#include "steplab/label_matrix.hpp"
#include "steplab/pathways.hpp"

namespace steplab {

inline constexpr double kDefaultGamma = 0.65;
inline constexpr std::size_t kDefaultWindow = 2;

// Row k is one exactly on the segments overlapping narration k. Narrations
// falling entirely past the end of the video give dropped, all-zero rows.
LabelMatrix BuildNvMatrix(const NarrationTrack& track, std::size_t num_segments);

// For each step: anchor k = argmax of the fused row (smallest index on ties).
// Rows whose peak is below gamma are dropped; kept rows are one on
// |j - k| <= window, clipped to the video.
LabelMatrix BuildSvLabels(const ScoreMatrix& fused, double gamma, std::size_t window);

// Ground-truth step x segment matrix from each step's gt boundaries. Steps
// without ground truth are dropped rows.
LabelMatrix GroundTruthLabels(const CorpusEntry& entry);

struct LabelStats {
  std::size_t rows = 0;
  std::size_t kept = 0;
  double kept_ratio = 0.0;
  double mean_window_width = 0.0;  // positives per kept row
};

LabelStats ComputeLabelStats(const LabelMatrix& labels);

// Pseudo-label quality against ground truth. Precision counts positive cells
// inside the true span over all positive cells; recall counts steps that are
// kept with their anchor inside the true span over all steps with ground
// truth. Counts are additive across videos.
struct LabelQuality {
  std::size_t positive_cells = 0;
  std::size_t true_positive_cells = 0;
  std::size_t steps = 0;
  std::size_t recovered_steps = 0;

  LabelQuality& operator+=(const LabelQuality& other);
  double Precision() const;
  double Recall() const;
  double F1() const;
};

LabelQuality ScoreLabels(const LabelMatrix& predicted, const LabelMatrix& truth);

// {video_id, gamma, window, rows: [{kept, start_idx, end_idx}]}; end_idx is
// inclusive and both indices are null on dropped rows.
void WriteLabels(const LabelMatrix& labels, const std::string& video_id,
                 const std::filesystem::path& path);
struct LabelFile {
  std::string video_id;
  LabelMatrix labels;
};
LabelFile ReadLabels(const std::filesystem::path& path, std::size_t num_segments);

}  // namespace steplab

#endif  // STEPLAB_PSEUDOLABEL_HPP_
