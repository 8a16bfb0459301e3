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

#include "steplab/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace steplab::log {
namespace {

std::shared_ptr<spdlog::logger> Logger() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("steplab");
    l->set_level(spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return logger;
}

}  // namespace

void InitFromEnv() {
  const char* level = std::getenv("STEPLAB_LOG");
  if (level == nullptr) return;
  Logger()->set_level(spdlog::level::from_str(level));
}

void Debug(std::string_view message) { Logger()->debug(message); }
void Info(std::string_view message) { Logger()->info(message); }
void Warn(std::string_view message) { Logger()->warn(message); }

}  // namespace steplab::log
