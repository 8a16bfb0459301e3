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

#include "steplab/checkpoint.hpp"

#include "steplab/corpus.hpp"
#include "steplab/error.hpp"

namespace steplab {

namespace fs = std::filesystem;

nlohmann::ordered_json ModelConfigToJson(const ModelConfig& config) {
  nlohmann::ordered_json j;
  j["video_input_dim"] = config.video_input_dim;
  j["step_input_dim"] = config.step_input_dim;
  j["hidden_dim"] = config.hidden_dim;
  j["layers"] = config.layers;
  j["heads"] = config.heads;
  j["max_positions"] = config.max_positions;
  j["use_text_pe"] = config.use_text_pe;
  return j;
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j, ModelConfig base) {
  try {
    base.video_input_dim = j.value("video_input_dim", base.video_input_dim);
    base.step_input_dim = j.value("step_input_dim", base.step_input_dim);
    base.hidden_dim = j.value("hidden_dim", base.hidden_dim);
    base.layers = j.value("layers", base.layers);
    base.heads = j.value("heads", base.heads);
    base.max_positions = j.value("max_positions", base.max_positions);
    base.use_text_pe = j.value("use_text_pe", base.use_text_pe);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("model config: ") + e.what());
  }
  return base;
}

void SaveCheckpoint(const ModelParams& params, std::uint64_t seed, std::uint64_t step,
                    const fs::path& dir) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "steplab-checkpoint-1";
  manifest["config"] = ModelConfigToJson(params.config);
  manifest["seed"] = seed;
  manifest["step"] = step;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto& [name, tensor] : params.NamedTensors()) {
    const std::string rel = "tensors/" + name + ".emb";
    SaveEmbeddingMatrix(*tensor, dir / rel);
    tensors[name] = rel;
  }
  manifest["tensors"] = std::move(tensors);
  WriteFileBytes(dir / "checkpoint.json", manifest.dump(2) + "\n");
}

Checkpoint LoadCheckpoint(const fs::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadFileBytes(dir / "checkpoint.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, (dir / "checkpoint.json").string() + ": " + e.what());
  }
  Checkpoint out;
  const ModelConfig config = ModelConfigFromJson(manifest.at("config"));
  out.params = InitParams(config, 0);
  out.seed = manifest.value("seed", std::uint64_t{0});
  out.step = manifest.value("step", std::uint64_t{0});
  const auto& tensors = manifest.at("tensors");
  for (auto& [name, tensor] : out.params.NamedTensors()) {
    if (!tensors.contains(name)) {
      throw Error(ErrorCode::kParse, "checkpoint lacks tensor '" + name + "'");
    }
    DenseMatrix loaded = LoadEmbeddingMatrix(dir / tensors[name].get<std::string>());
    if (!loaded.SameShape(*tensor)) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint tensor '" + name + "' has wrong shape");
    }
    *tensor = std::move(loaded);
  }
  return out;
}

}  // namespace steplab
