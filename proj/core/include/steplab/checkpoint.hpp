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

#ifndef STEPLAB_CHECKPOINT_HPP_
#define STEPLAB_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "steplab/model.hpp"

namespace steplab {

nlohmann::ordered_json ModelConfigToJson(const ModelConfig& config);
// Missing keys keep their defaults.
ModelConfig ModelConfigFromJson(const nlohmann::json& j, ModelConfig base = {});

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

// `<dir>/checkpoint.json` (config, seed, step, tensor index) plus one EMB1 file
// per named tensor under `<dir>/tensors/`.
void SaveCheckpoint(const ModelParams& params, std::uint64_t seed, std::uint64_t step,
                    const std::filesystem::path& dir);
Checkpoint LoadCheckpoint(const std::filesystem::path& dir);

}  // namespace steplab

#endif  // STEPLAB_CHECKPOINT_HPP_
