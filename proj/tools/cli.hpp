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

#ifndef STEPLAB_TOOLS_CLI_HPP_
#define STEPLAB_TOOLS_CLI_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "steplab/eval.hpp"
#include "steplab/model.hpp"
#include "steplab/pathways.hpp"
#include "steplab/pseudolabel.hpp"
#include "steplab/stepsource.hpp"
#include "steplab/synthgen.hpp"
#include "steplab/train.hpp"

namespace steplab::cli {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMissingInput = 3;
inline constexpr int kExitValidation = 4;

struct PipelineConfig {
  // Training corpus manifest. When unset, `pipeline` synthesizes one.
  std::optional<std::filesystem::path> corpus;
  // Held-out corpus used for evaluation; defaults to the synthetic held-out
  // split, then to the training corpus.
  std::optional<std::filesystem::path> eval_corpus;
  std::filesystem::path output = "steplab_out";

  SynthConfig synth;
  std::size_t synth_heldout_videos = 0;

  PathwayConfig pathways;
  double gamma = kDefaultGamma;
  std::size_t window = kDefaultWindow;

  ModelConfig model;
  TrainConfig train;
  FeatureSource features;

  std::string dataset_id = "synthetic";
  Metric metric = Metric::kRecallAt1;

  LlmClientConfig llm;
  PromptTemplate prompt;
  std::optional<std::filesystem::path> steps_file;

  std::size_t jobs = 1;
  std::size_t max_segments = kDefaultMaxSegments;

  // Throws InvalidConfig on bad values and MissingInput when a referenced
  // input path does not exist.
  void Validate() const;
};

// Relative paths inside the file resolve against the file's directory.
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path);

// Entry point shared by the executable and the tests. args excludes argv[0].
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace steplab::cli

#endif  // STEPLAB_TOOLS_CLI_HPP_
