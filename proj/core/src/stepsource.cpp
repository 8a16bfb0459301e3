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

#include "steplab/stepsource.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "steplab/error.hpp"
#include "steplab/log.hpp"
#include "steplab/parallel.hpp"

namespace steplab {

HttpLlmClient::HttpLlmClient(LlmClientConfig config) : config_(std::move(config)) {
  if (!(config_.timeout_sec > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "LLM client timeout must be positive");
  }
  const auto scheme_end = config_.endpoint_url.find("://");
  const auto path_start = config_.endpoint_url.find(
      '/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig,
                "endpoint URL needs a scheme: " + config_.endpoint_url);
  }
  base_ = config_.endpoint_url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint_url.substr(path_start);
}

std::string HttpLlmClient::Complete(const std::string& prompt) {
  httplib::Client client(base_);
  const auto secs = static_cast<time_t>(config_.timeout_sec);
  const auto usecs = static_cast<time_t>((config_.timeout_sec - std::floor(config_.timeout_sec)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);

  const nlohmann::json request = {{"model", config_.model_name}, {"prompt", prompt}};
  auto response = client.Post(path_, request.dump(), "application/json");
  if (!response) {
    throw Error(ErrorCode::kEndpointUnavailable,
                "LLM endpoint " + config_.endpoint_url + ": " +
                    httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error(ErrorCode::kEndpointUnavailable,
                "LLM endpoint returned HTTP " + std::to_string(response->status));
  }
  try {
    return nlohmann::json::parse(response->body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed LLM response: ") + e.what());
  }
}

std::vector<NarrationChunk> ChunkNarrations(const NarrationTrack& track,
                                            std::size_t chunk_size) {
  if (chunk_size == 0) throw Error(ErrorCode::kInvalidArgument, "chunk size must be >= 1");
  std::vector<NarrationChunk> chunks;
  for (std::size_t i = 0; i < track.items.size(); i += chunk_size) {
    const auto first = track.items.begin() + static_cast<std::ptrdiff_t>(i);
    const auto last = track.items.begin() +
                      static_cast<std::ptrdiff_t>(std::min(i + chunk_size, track.items.size()));
    chunks.emplace_back(first, last);
  }
  return chunks;
}

std::string BuildPrompt(const PromptTemplate& prompt, const NarrationChunk& chunk) {
  if (chunk.empty()) throw Error(ErrorCode::kInvalidArgument, "empty narration chunk");
  std::string out = prompt.instruction_text;
  for (const auto& n : chunk) {
    out += '\n';
    out += n.text;
  }
  return out;
}

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view StripMarker(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '*')) return Trim(s.substr(1));
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
    return Trim(s.substr(digits + 1));
  }
  return s;
}

}  // namespace

std::vector<std::string> ParseLlmOutput(std::string_view raw) {
  std::vector<std::string> steps;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const auto nl = raw.find('\n', pos);
    const auto line = raw.substr(pos, nl == std::string_view::npos ? raw.size() - pos : nl - pos);
    const auto text = StripMarker(Trim(line));
    if (!text.empty()) steps.emplace_back(text);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return steps;
}

std::vector<StepRecord> ExtractSteps(const NarrationTrack& track,
                                     const ExtractOptions& options) {
  auto from_fallback = [&]() {
    auto steps = ReadTrack(*options.fallback_file);
    for (auto& s : steps) {
      s.start_sec.reset();
      s.end_sec.reset();
    }
    return steps;
  };
  if (options.client == nullptr) {
    if (options.fallback_file) return from_fallback();
    throw Error(ErrorCode::kEndpointUnavailable, "no LLM client and no fallback file");
  }

  const auto chunks = ChunkNarrations(track, options.prompt.chunk_size);
  std::vector<std::vector<std::string>> parsed(chunks.size());
  try {
    ParallelFor(chunks.size(), options.jobs, [&](std::size_t i) {
      const std::string prompt = BuildPrompt(options.prompt, chunks[i]);
      for (std::size_t attempt = 0;; ++attempt) {
        try {
          parsed[i] = ParseLlmOutput(options.client->Complete(prompt));
          return;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kEndpointUnavailable || attempt >= options.max_retries) {
            throw;
          }
          log::Debug("retrying chunk " + std::to_string(i) + ": " + e.what());
        }
      }
    });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEndpointUnavailable) throw;
    if (!options.fallback_file) throw;
    log::Warn(std::string("LLM unavailable, using fallback steps: ") + e.what());
    return from_fallback();
  }

  std::vector<StepRecord> steps;
  for (const auto& chunk_steps : parsed) {
    for (const auto& text : chunk_steps) {
      StepRecord step;
      step.text = text;
      steps.push_back(std::move(step));
    }
  }
  return steps;
}

}  // namespace steplab
