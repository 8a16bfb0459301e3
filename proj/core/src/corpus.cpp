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

#include "steplab/corpus.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "steplab/error.hpp"
#include "steplab/log.hpp"

namespace steplab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderBytes = 12;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void AppendU32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

std::optional<double> OptionalNumber(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "' is not a number");
  }
  return it->get<double>();
}

ordered_json OptionalToJson(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

EmbeddingMap LoadEmbeddingGroup(const json& group, const fs::path& base) {
  EmbeddingMap out;
  if (group.is_null()) return out;
  for (const auto& [encoder, path] : group.items()) {
    out.emplace(encoder, LoadEmbeddingMatrix(Resolve(base, path.get<std::string>())));
  }
  return out;
}

}  // namespace

std::string ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingInput, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void NarrationTrack::Validate() const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& n = items[i];
    if (!n.start_sec || !n.end_sec || !(*n.start_sec < *n.end_sec)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "narration " + std::to_string(i) + " needs start < end");
    }
    if (i > 0 && *n.start_sec < *items[i - 1].start_sec) {
      throw Error(ErrorCode::kInvalidArgument,
                  "narrations are not ordered by start time");
    }
  }
}

void CorpusEntry::Validate(std::span<const std::string> required_segment_encoders,
                           std::span<const std::string> required_step_encoders,
                           std::span<const std::string> required_narration_encoders) const {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "video '" + video_id + "': " + what);
  };
  for (const auto& [enc, m] : segment_embeddings) {
    if (m.rows() != num_segments) fail("segment embedding '" + enc + "' row count");
  }
  for (const auto& [enc, m] : step_embeddings) {
    if (m.rows() != steps.size()) fail("step embedding '" + enc + "' row count");
  }
  for (const auto& [enc, m] : narration_embeddings) {
    if (m.rows() != narrations.size()) fail("narration embedding '" + enc + "' row count");
  }
  for (const auto& enc : required_segment_encoders) {
    if (!segment_embeddings.contains(enc)) fail("missing segment encoder '" + enc + "'");
  }
  for (const auto& enc : required_step_encoders) {
    if (!step_embeddings.contains(enc)) fail("missing step encoder '" + enc + "'");
  }
  for (const auto& enc : required_narration_encoders) {
    if (!narration_embeddings.contains(enc)) fail("missing narration encoder '" + enc + "'");
  }
  for (const auto& s : steps) {
    if (s.start_sec && s.end_sec && !(*s.start_sec < *s.end_sec)) fail("step with start >= end");
  }
  narrations.Validate();
}

const CorpusEntry* Corpus::Find(const std::string& video_id) const {
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const CorpusEntry& e) { return e.video_id == video_id; });
  return it == entries.end() ? nullptr : &*it;
}

DenseMatrix LoadEmbeddingMatrix(const fs::path& path) {
  const std::string bytes = ReadFileBytes(path);
  if (bytes.size() < kHeaderBytes) {
    if (bytes.size() >= 4 && !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
      throw Error(ErrorCode::kMagicMismatch, "bad magic in " + path.string());
    }
    throw Error(ErrorCode::kTruncated, "header truncated in " + path.string());
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kMagicMismatch, "bad magic in " + path.string());
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = ReadU32(raw + 4);
  const std::uint64_t cols = ReadU32(raw + 8);
  const std::uint64_t count = rows * cols;
  if (count > kMaxElements) {
    throw Error(ErrorCode::kShapeOverflow,
                "declared shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " too large in " + path.string());
  }
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (payload < count * 4) {
    throw Error(ErrorCode::kTruncated, "payload truncated in " + path.string());
  }
  if (payload > count * 4) {
    throw Error(ErrorCode::kParse, "trailing bytes in " + path.string());
  }
  std::vector<double> values(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(ReadU32(raw + kHeaderBytes + 4 * i));
  }
  return DenseMatrix(rows, cols, std::move(values));
}

void SaveEmbeddingMatrix(const DenseMatrix& m, const fs::path& path) {
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw Error(ErrorCode::kShapeOverflow, "matrix too large for EMB1");
  }
  std::string bytes(kMagic.begin(), kMagic.end());
  bytes.reserve(kHeaderBytes + 4 * m.size());
  AppendU32(bytes, static_cast<std::uint32_t>(m.rows()));
  AppendU32(bytes, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) {
    AppendU32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  WriteFileBytes(path, bytes);
}

SegmentSpan TimestampsToSegmentSpan(double start_sec, double end_sec,
                                    std::size_t num_segments) {
  if (!(start_sec < end_sec) || start_sec < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "timestamps need 0 <= start < end");
  }
  if (num_segments == 0) {
    throw Error(ErrorCode::kInvalidArgument, "video has no segments");
  }
  // [t, t+1) overlaps [s, e) with positive measure iff floor(s) <= t < ceil(e).
  const double t_max = static_cast<double>(num_segments);
  const double lo = std::min(std::floor(start_sec), t_max);
  const double hi = std::min(std::ceil(end_sec), t_max);
  SegmentSpan span{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  if (span.end < span.begin) span.end = span.begin;
  return span;
}

std::vector<StepRecord> ReadTrack(const fs::path& path) {
  std::istringstream lines(ReadFileBytes(path));
  std::vector<StepRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string()) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": record needs a string 'text'");
    }
    StepRecord r;
    r.text = obj["text"].get<std::string>();
    r.start_sec = OptionalNumber(obj, "start");
    r.end_sec = OptionalNumber(obj, "end");
    r.gt_start_sec = OptionalNumber(obj, "gt_start");
    r.gt_end_sec = OptionalNumber(obj, "gt_end");
    if (auto it = obj.find("task_id"); it != obj.end() && !it->is_null()) {
      r.task_id = it->get<std::string>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

void WriteTrack(std::span<const StepRecord> records, const fs::path& path) {
  std::string bytes;
  for (const auto& r : records) {
    ordered_json obj;
    obj["text"] = r.text;
    obj["start"] = OptionalToJson(r.start_sec);
    obj["end"] = OptionalToJson(r.end_sec);
    obj["gt_start"] = OptionalToJson(r.gt_start_sec);
    obj["gt_end"] = OptionalToJson(r.gt_end_sec);
    obj["task_id"] = r.task_id ? ordered_json(*r.task_id) : ordered_json(nullptr);
    bytes += obj.dump();
    bytes += '\n';
  }
  WriteFileBytes(path, bytes);
}

NarrationTrack ReadNarrationTrack(const fs::path& path) {
  NarrationTrack track{ReadTrack(path)};
  track.Validate();
  return track;
}

Corpus LoadCorpus(const fs::path& manifest, const LoadOptions& options) {
  json root;
  try {
    root = json::parse(ReadFileBytes(manifest));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, manifest.string() + ": " + e.what());
  }
  if (!root.is_object()) {
    throw Error(ErrorCode::kParse, manifest.string() + ": manifest must be an object");
  }
  const fs::path base = manifest.parent_path();
  Corpus corpus;
  for (const auto& [video_id, video] : root.items()) {
    CorpusEntry entry;
    entry.video_id = video_id;
    entry.segment_embeddings = LoadEmbeddingGroup(video.value("segments", json()), base);
    entry.step_embeddings = LoadEmbeddingGroup(video.value("steps", json()), base);
    entry.narration_embeddings = LoadEmbeddingGroup(video.value("narrations", json()), base);
    if (auto it = video.find("narration_track"); it != video.end()) {
      entry.narrations = ReadNarrationTrack(Resolve(base, it->get<std::string>()));
    }
    if (auto it = video.find("step_track"); it != video.end()) {
      entry.steps = ReadTrack(Resolve(base, it->get<std::string>()));
    }
    if (entry.segment_embeddings.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "video '" + video_id + "' has no segment embeddings");
    }
    entry.num_segments = entry.segment_embeddings.begin()->second.rows();
    for (const auto& [enc, m] : entry.segment_embeddings) {
      if (m.rows() != entry.num_segments) {
        throw Error(ErrorCode::kInvalidArgument,
                    "video '" + video_id + "': segment encoders disagree on T");
      }
    }
    if (entry.num_segments > options.max_segments) {
      log::Warn("video '" + video_id + "' has " + std::to_string(entry.num_segments) +
                " segments; truncating to " + std::to_string(options.max_segments));
      for (auto& [enc, m] : entry.segment_embeddings) {
        m = DenseMatrix::FromEigen(m.eigen().topRows(
            static_cast<Eigen::Index>(options.max_segments)));
      }
      entry.num_segments = options.max_segments;
    }
    entry.Validate();
    corpus.entries.push_back(std::move(entry));
  }
  std::sort(corpus.entries.begin(), corpus.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.video_id < b.video_id; });
  return corpus;
}

fs::path SaveCorpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  ordered_json manifest = ordered_json::object();
  for (const auto& entry : corpus.entries) {
    ordered_json video;
    auto save_group = [&](const EmbeddingMap& group, const std::string& kind) {
      ordered_json paths = ordered_json::object();
      for (const auto& [enc, m] : group) {
        const std::string rel = entry.video_id + "/" + kind + "." + enc + ".emb";
        SaveEmbeddingMatrix(m, dir / rel);
        paths[enc] = rel;
      }
      return paths;
    };
    video["segments"] = save_group(entry.segment_embeddings, "segments");
    video["steps"] = save_group(entry.step_embeddings, "steps");
    video["narrations"] = save_group(entry.narration_embeddings, "narrations");
    const std::string narr_rel = entry.video_id + "/narrations.jsonl";
    const std::string step_rel = entry.video_id + "/steps.jsonl";
    WriteTrack(entry.narrations.items, dir / narr_rel);
    WriteTrack(entry.steps, dir / step_rel);
    video["narration_track"] = narr_rel;
    video["step_track"] = step_rel;
    manifest[entry.video_id] = std::move(video);
  }
  const fs::path manifest_path = dir / "manifest.json";
  WriteFileBytes(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace steplab
