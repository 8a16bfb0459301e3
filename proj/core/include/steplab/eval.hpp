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

#ifndef STEPLAB_EVAL_HPP_
#define STEPLAB_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steplab/corpus.hpp"
#include "steplab/model.hpp"
#include "steplab/train.hpp"

namespace steplab {

struct GroundingResult {
  std::string video_id;
  std::optional<std::string> task_id;
  std::size_t predicted = 0;  // segment index
  double score = 0.0;
  double gt_start_sec = 0.0;
  double gt_end_sec = 0.0;
};

// Per-row argmax, smallest index on ties.
std::vector<std::size_t> GroundSteps(const DenseMatrix& scores);

// A step is recalled when its predicted segment [t, t+1) overlaps the
// ground-truth interval with positive measure.
bool IsRecalled(const GroundingResult& r);

double RecallAt1(std::span<const GroundingResult> results);
std::map<std::string, double> RecallByTask(std::span<const GroundingResult> results);
// Unweighted mean of per-task R@1. Every result needs a task_id.
double AvgRecallByTask(std::span<const GroundingResult> results);

// Grounds every step of `entry` that has ground truth.
std::vector<GroundingResult> GroundVideo(const ModelParams& params, const CorpusEntry& entry,
                                         const FeatureSource& features = {});

enum class Metric { kRecallAt1, kAvgRecallByTask };
std::string_view MetricName(Metric m);
Metric ParseMetric(std::string_view name);

struct EvalReport {
  std::string dataset_id;
  Metric metric = Metric::kRecallAt1;
  double value = 0.0;
  std::map<std::string, double> per_task;   // R@1 per task id
  std::map<std::string, double> per_video;  // R@1 per video
  std::size_t steps = 0;
};

EvalReport BuildReport(std::span<const GroundingResult> results, std::string dataset_id,
                       Metric metric);
EvalReport EvaluateCorpus(const ModelParams& params, const Corpus& corpus,
                          std::string dataset_id, Metric metric,
                          const FeatureSource& features = {}, std::size_t jobs = 1);

// {dataset_id, metric, value, per_task, per_video}
void WriteReport(const EvalReport& report, const std::filesystem::path& path);

}  // namespace steplab

#endif  // STEPLAB_EVAL_HPP_
