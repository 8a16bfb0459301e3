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

#ifndef STEPLAB_STEPSOURCE_HPP_
#define STEPLAB_STEPSOURCE_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "steplab/corpus.hpp"

namespace steplab {

inline constexpr std::string_view kStepExtractionInstruction =
    "I will give you the text narrations extracted from an instruction video. "
    "Your task is to summarize the procedure steps that are relevant to the "
    "task of the video from the inputs. Please filter colloquial sentences in "
    "the speech.";

struct PromptTemplate {
  std::string instruction_text{kStepExtractionInstruction};
  std::size_t chunk_size = 10;
};

struct LlmClientConfig {
  std::string endpoint_url;  // e.g. http://localhost:8080/generate
  std::string model_name = "llama-2-7b";
  double timeout_sec = 60.0;
  std::size_t max_retries = 2;
};

// Request/response interface to a text-generation backend. Implementations
// throw Error(kEndpointUnavailable) when the backend cannot be reached.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string Complete(const std::string& prompt) = 0;
};

// POSTs {"model", "prompt"} as JSON and reads {"text"} from the response.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(LlmClientConfig config);
  std::string Complete(const std::string& prompt) override;

 private:
  LlmClientConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

// Offline stand-in that answers every prompt through a user-supplied function.
class ScriptedLlmClient : public LlmClient {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;
  explicit ScriptedLlmClient(Responder responder) : responder_(std::move(responder)) {}
  std::string Complete(const std::string& prompt) override { return responder_(prompt); }

 private:
  Responder responder_;
};

using NarrationChunk = std::vector<StepRecord>;

std::vector<NarrationChunk> ChunkNarrations(const NarrationTrack& track,
                                            std::size_t chunk_size);

// Instruction text, then each narration sentence on its own line.
std::string BuildPrompt(const PromptTemplate& prompt, const NarrationChunk& chunk);

// One step per non-empty line, with leading "1." / "1)" / "-" / "*" markers
// and surrounding whitespace removed.
std::vector<std::string> ParseLlmOutput(std::string_view raw);

struct ExtractOptions {
  PromptTemplate prompt;
  LlmClient* client = nullptr;
  std::size_t max_retries = 2;
  std::optional<std::filesystem::path> fallback_file;  // step-track JSONL
  std::size_t jobs = 1;
};

// Steps from all chunks, concatenated in chunk order, without timestamps.
// When a chunk still fails after max_retries, the whole result comes from
// fallback_file if set; otherwise EndpointUnavailable propagates.
std::vector<StepRecord> ExtractSteps(const NarrationTrack& track,
                                     const ExtractOptions& options);

}  // namespace steplab

#endif  // STEPLAB_STEPSOURCE_HPP_
