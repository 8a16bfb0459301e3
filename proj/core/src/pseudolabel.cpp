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

#include "steplab/pseudolabel.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "steplab/error.hpp"

namespace steplab {

std::size_t LabelMatrix::KeptCount() const {
  return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), true));
}

void LabelMatrix::Validate() const {
  if (kept.size() != rows() || anchor.size() != rows()) {
    throw Error(ErrorCode::kInvalidArgument, "label matrix metadata size mismatch");
  }
  for (std::size_t r = 0; r < rows(); ++r) {
    bool any = false;
    for (double v : m.row(r)) {
      if (v != 0.0 && v != 1.0) throw Error(ErrorCode::kInvalidArgument, "non-binary label");
      any = any || v == 1.0;
    }
    if (kept[r] != any) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label row " + std::to_string(r) + " keep flag disagrees with its entries");
    }
  }
}

namespace {

LabelMatrix EmptyLabels(std::size_t rows, std::size_t cols) {
  LabelMatrix out;
  out.m = DenseMatrix(rows, cols);
  out.kept.assign(rows, false);
  out.anchor.assign(rows, 0);
  return out;
}

void MarkSpan(LabelMatrix& labels, std::size_t row, SegmentSpan span) {
  if (span.empty()) return;
  for (std::size_t t = span.begin; t < span.end; ++t) labels.m(row, t) = 1.0;
  labels.kept[row] = true;
  labels.anchor[row] = span.begin;
}

}  // namespace

LabelMatrix BuildNvMatrix(const NarrationTrack& track, std::size_t num_segments) {
  if (num_segments == 0) throw Error(ErrorCode::kInvalidArgument, "T must be >= 1");
  track.Validate();
  LabelMatrix out = EmptyLabels(track.size(), num_segments);
  for (std::size_t k = 0; k < track.size(); ++k) {
    const auto& n = track.items[k];
    MarkSpan(out, k, TimestampsToSegmentSpan(*n.start_sec, *n.end_sec, num_segments));
  }
  return out;
}

LabelMatrix BuildSvLabels(const ScoreMatrix& fused, double gamma, std::size_t window) {
  if (fused.pathway != Pathway::kFused) {
    throw Error(ErrorCode::kInvalidArgument, "pseudo-labels need the fused score matrix");
  }
  const std::size_t num_segments = fused.m.cols();
  if (num_segments == 0 && fused.m.rows() > 0) {
    throw Error(ErrorCode::kInvalidArgument, "score matrix has no segments");
  }
  LabelMatrix out = EmptyLabels(fused.m.rows(), num_segments);
  out.gamma = gamma;
  out.window = window;
  for (std::size_t i = 0; i < fused.m.rows(); ++i) {
    const auto row = fused.m.row(i);
    const std::size_t k = RowArgmax(row);
    out.anchor[i] = k;
    if (row[k] < gamma) continue;
    const std::size_t lo = k >= window ? k - window : 0;
    const std::size_t hi = std::min(num_segments - 1, k + window);
    MarkSpan(out, i, SegmentSpan{lo, hi + 1});
    out.anchor[i] = k;
  }
  return out;
}

LabelMatrix GroundTruthLabels(const CorpusEntry& entry) {
  LabelMatrix out = EmptyLabels(entry.steps.size(), entry.num_segments);
  for (std::size_t i = 0; i < entry.steps.size(); ++i) {
    const auto& s = entry.steps[i];
    if (!s.HasGroundTruth()) continue;
    MarkSpan(out, i, TimestampsToSegmentSpan(*s.gt_start_sec, *s.gt_end_sec,
                                             entry.num_segments));
  }
  return out;
}

LabelStats ComputeLabelStats(const LabelMatrix& labels) {
  LabelStats stats;
  stats.rows = labels.rows();
  stats.kept = labels.KeptCount();
  if (stats.rows > 0) {
    stats.kept_ratio = static_cast<double>(stats.kept) / static_cast<double>(stats.rows);
  }
  if (stats.kept > 0) {
    double positives = 0.0;
    for (double v : labels.m.data()) positives += v;
    stats.mean_window_width = positives / static_cast<double>(stats.kept);
  }
  return stats;
}

LabelQuality& LabelQuality::operator+=(const LabelQuality& other) {
  positive_cells += other.positive_cells;
  true_positive_cells += other.true_positive_cells;
  steps += other.steps;
  recovered_steps += other.recovered_steps;
  return *this;
}

double LabelQuality::Precision() const {
  return positive_cells == 0 ? 0.0
                             : static_cast<double>(true_positive_cells) /
                                   static_cast<double>(positive_cells);
}

double LabelQuality::Recall() const {
  return steps == 0 ? 0.0
                    : static_cast<double>(recovered_steps) / static_cast<double>(steps);
}

double LabelQuality::F1() const {
  const double p = Precision();
  const double r = Recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

LabelQuality ScoreLabels(const LabelMatrix& predicted, const LabelMatrix& truth) {
  if (!predicted.m.SameShape(truth.m)) {
    throw Error(ErrorCode::kShapeMismatch, "label quality: shape mismatch");
  }
  LabelQuality q;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    if (!truth.kept[i]) continue;
    ++q.steps;
    if (!predicted.kept[i]) continue;
    for (std::size_t t = 0; t < truth.cols(); ++t) {
      if (predicted.m(i, t) == 0.0) continue;
      ++q.positive_cells;
      if (truth.m(i, t) != 0.0) ++q.true_positive_cells;
    }
    if (truth.m(i, predicted.anchor[i]) != 0.0) ++q.recovered_steps;
  }
  return q;
}

void WriteLabels(const LabelMatrix& labels, const std::string& video_id,
                 const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["video_id"] = video_id;
  doc["gamma"] = labels.gamma ? nlohmann::ordered_json(*labels.gamma) : nlohmann::ordered_json(nullptr);
  doc["window"] = labels.window ? nlohmann::ordered_json(*labels.window) : nlohmann::ordered_json(nullptr);
  doc["num_segments"] = labels.cols();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    nlohmann::ordered_json row;
    row["kept"] = static_cast<bool>(labels.kept[r]);
    if (labels.kept[r]) {
      const auto values = labels.m.row(r);
      const auto first = std::find(values.begin(), values.end(), 1.0);
      const auto last = std::find(values.rbegin(), values.rend(), 1.0);
      row["start_idx"] = first - values.begin();
      row["end_idx"] = static_cast<std::ptrdiff_t>(values.size()) - 1 - (last - values.rbegin());
    } else {
      row["start_idx"] = nullptr;
      row["end_idx"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  WriteFileBytes(path, doc.dump(2) + "\n");
}

LabelFile ReadLabels(const std::filesystem::path& path, std::size_t num_segments) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ReadFileBytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  try {
    const auto& rows = doc.at("rows");
    LabelFile out;
    out.video_id = doc.at("video_id").get<std::string>();
    out.labels = EmptyLabels(rows.size(), num_segments);
    if (!doc.value("gamma", nlohmann::json()).is_null()) out.labels.gamma = doc["gamma"].get<double>();
    if (!doc.value("window", nlohmann::json()).is_null()) {
      out.labels.window = doc["window"].get<std::size_t>();
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].at("kept").get<bool>()) continue;
      const auto start = rows[r].at("start_idx").get<std::size_t>();
      const auto end = rows[r].at("end_idx").get<std::size_t>();
      if (start > end || end >= num_segments) {
        throw Error(ErrorCode::kParse, path.string() + ": label row " + std::to_string(r) +
                                           " out of range");
      }
      MarkSpan(out.labels, r, SegmentSpan{start, end + 1});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace steplab
