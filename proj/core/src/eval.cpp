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

#include "steplab/eval.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "steplab/error.hpp"
#include "steplab/parallel.hpp"

namespace steplab {

std::vector<std::size_t> GroundSteps(const DenseMatrix& scores) {
  if (scores.rows() == 0 || scores.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "grounding needs a non-empty score matrix");
  }
  std::vector<std::size_t> out(scores.rows());
  for (std::size_t i = 0; i < scores.rows(); ++i) out[i] = RowArgmax(scores.row(i));
  return out;
}

bool IsRecalled(const GroundingResult& r) {
  const double t = static_cast<double>(r.predicted);
  return std::max(t, r.gt_start_sec) < std::min(t + 1.0, r.gt_end_sec);
}

double RecallAt1(std::span<const GroundingResult> results) {
  if (results.empty()) throw Error(ErrorCode::kInvalidArgument, "recall of no steps");
  const auto hits = std::count_if(results.begin(), results.end(), IsRecalled);
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::map<std::string, double> RecallByTask(std::span<const GroundingResult> results) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // hits, total
  for (const auto& r : results) {
    if (!r.task_id) {
      throw Error(ErrorCode::kInvalidArgument, "step in video '" + r.video_id + "' has no task id");
    }
    auto& [hits, total] = counts[*r.task_id];
    hits += IsRecalled(r) ? 1 : 0;
    ++total;
  }
  std::map<std::string, double> out;
  for (const auto& [task, c] : counts) {
    out[task] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

double AvgRecallByTask(std::span<const GroundingResult> results) {
  if (results.empty()) throw Error(ErrorCode::kInvalidArgument, "recall of no steps");
  const auto per_task = RecallByTask(results);
  double sum = 0.0;
  for (const auto& [task, recall] : per_task) sum += recall;
  return sum / static_cast<double>(per_task.size());
}

std::vector<GroundingResult> GroundVideo(const ModelParams& params, const CorpusEntry& entry,
                                         const FeatureSource& features) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < entry.steps.size(); ++i) {
    if (entry.steps[i].HasGroundTruth()) rows.push_back(i);
  }
  if (rows.empty()) return {};
  auto seg = entry.segment_embeddings.find(features.segment_encoder);
  auto step = entry.step_embeddings.find(features.step_encoder);
  if (seg == entry.segment_embeddings.end() || step == entry.step_embeddings.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "video '" + entry.video_id + "' lacks model input embeddings");
  }
  const DenseMatrix scores = Forward(params, seg->second, step->second).scores;
  const auto predicted = GroundSteps(scores);
  std::vector<GroundingResult> out;
  for (std::size_t i : rows) {
    const auto& s = entry.steps[i];
    out.push_back({entry.video_id, s.task_id, predicted[i], scores(i, predicted[i]),
                   *s.gt_start_sec, *s.gt_end_sec});
  }
  return out;
}

std::string_view MetricName(Metric m) {
  return m == Metric::kRecallAt1 ? "R@1" : "Avg.R@1";
}

Metric ParseMetric(std::string_view name) {
  if (name == "R@1" || name == "r1") return Metric::kRecallAt1;
  if (name == "Avg.R@1" || name == "avg_r1") return Metric::kAvgRecallByTask;
  throw Error(ErrorCode::kInvalidConfig, "unknown metric '" + std::string(name) + "'");
}

EvalReport BuildReport(std::span<const GroundingResult> results, std::string dataset_id,
                       Metric metric) {
  EvalReport report;
  report.dataset_id = std::move(dataset_id);
  report.metric = metric;
  report.steps = results.size();
  report.value = metric == Metric::kRecallAt1 ? RecallAt1(results) : AvgRecallByTask(results);
  const bool all_tasked = std::all_of(results.begin(), results.end(),
                                      [](const GroundingResult& r) { return r.task_id.has_value(); });
  if (all_tasked) report.per_task = RecallByTask(results);
  std::map<std::string, std::vector<GroundingResult>> by_video;
  for (const auto& r : results) by_video[r.video_id].push_back(r);
  for (const auto& [video, rs] : by_video) report.per_video[video] = RecallAt1(rs);
  return report;
}

EvalReport EvaluateCorpus(const ModelParams& params, const Corpus& corpus,
                          std::string dataset_id, Metric metric,
                          const FeatureSource& features, std::size_t jobs) {
  std::vector<std::vector<GroundingResult>> per_video(corpus.entries.size());
  ParallelFor(corpus.entries.size(), jobs, [&](std::size_t i) {
    per_video[i] = GroundVideo(params, corpus.entries[i], features);
  });
  std::vector<GroundingResult> all;
  for (auto& rs : per_video) all.insert(all.end(), rs.begin(), rs.end());
  return BuildReport(all, std::move(dataset_id), metric);
}

void WriteReport(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["dataset_id"] = report.dataset_id;
  doc["metric"] = MetricName(report.metric);
  doc["value"] = report.value;
  doc["steps"] = report.steps;
  doc["per_task"] = nlohmann::ordered_json::object();
  for (const auto& [task, v] : report.per_task) doc["per_task"][task] = v;
  doc["per_video"] = nlohmann::ordered_json::object();
  for (const auto& [video, v] : report.per_video) doc["per_video"][video] = v;
  WriteFileBytes(path, doc.dump(2) + "\n");
}

}  // namespace steplab
