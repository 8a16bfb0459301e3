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

#ifndef STEPLAB_CORPUS_HPP_
#define STEPLAB_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steplab/nummath.hpp"

namespace steplab {

// One LLM-step or narration sentence. Timestamps are seconds from video start;
// gt_* boundaries are only consulted by evaluation.
struct StepRecord {
  std::string text;
  std::optional<double> start_sec;
  std::optional<double> end_sec;
  std::optional<double> gt_start_sec;
  std::optional<double> gt_end_sec;
  std::optional<std::string> task_id;

  bool HasGroundTruth() const { return gt_start_sec && gt_end_sec; }
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

// Narrations carry mandatory timestamps and are ordered by start time.
struct NarrationTrack {
  std::vector<StepRecord> items;

  std::size_t size() const { return items.size(); }
  // Throws InvalidArgument unless every item has start < end and items are
  // sorted by start_sec.
  void Validate() const;
};

using EmbeddingMap = std::map<std::string, DenseMatrix>;

struct CorpusEntry {
  std::string video_id;
  std::size_t num_segments = 0;
  EmbeddingMap segment_embeddings;    // encoder id -> T x D
  NarrationTrack narrations;
  EmbeddingMap narration_embeddings;  // encoder id -> K x D
  std::vector<StepRecord> steps;
  EmbeddingMap step_embeddings;       // encoder id -> L x D

  // Checks row counts against T, K and L, and that every id in
  // `required_encoders` is present on the side that needs it.
  void Validate(std::span<const std::string> required_segment_encoders = {},
                std::span<const std::string> required_step_encoders = {},
                std::span<const std::string> required_narration_encoders = {}) const;
};

struct Corpus {
  std::vector<CorpusEntry> entries;  // sorted by video_id

  const CorpusEntry* Find(const std::string& video_id) const;
};

// Whole-file helpers; missing inputs raise MissingInput, write failures Io.
// Parent directories are created on write.
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, const std::string& bytes);

inline constexpr std::size_t kDefaultMaxSegments = 1024;

// Binary EMB1 tensors: "EMB1", u32 rows, u32 cols, rows*cols float32, all
// little-endian.
DenseMatrix LoadEmbeddingMatrix(const std::filesystem::path& path);
void SaveEmbeddingMatrix(const DenseMatrix& m, const std::filesystem::path& path);

// Segment t covers [t, t+1) seconds.
struct SegmentSpan {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  bool empty() const { return begin >= end; }
  std::size_t size() const { return empty() ? 0 : end - begin; }
  friend bool operator==(const SegmentSpan&, const SegmentSpan&) = default;
};

// All segments whose interval overlaps [start_sec, end_sec) with positive
// measure, clipped to [0, num_segments).
SegmentSpan TimestampsToSegmentSpan(double start_sec, double end_sec,
                                    std::size_t num_segments);

std::vector<StepRecord> ReadTrack(const std::filesystem::path& path);
void WriteTrack(std::span<const StepRecord> records,
                const std::filesystem::path& path);
NarrationTrack ReadNarrationTrack(const std::filesystem::path& path);

struct LoadOptions {
  std::size_t max_segments = kDefaultMaxSegments;
};

// Manifest: {video_id: {"segments": {enc: path}, "steps": {enc: path},
// "narrations": {enc: path}, "step_track": path, "narration_track": path}}.
// Relative paths resolve against the manifest's directory.
Corpus LoadCorpus(const std::filesystem::path& manifest,
                  const LoadOptions& options = {});

// Writes `<dir>/manifest.json` plus one subdirectory per video.
std::filesystem::path SaveCorpus(const Corpus& corpus,
                                 const std::filesystem::path& dir);

}  // namespace steplab

#endif  // STEPLAB_CORPUS_HPP_
