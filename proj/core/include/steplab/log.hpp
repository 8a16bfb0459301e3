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

#ifndef STEPLAB_LOG_HPP_
#define STEPLAB_LOG_HPP_

#include <string_view>

namespace steplab::log {

// Reads STEPLAB_LOG (trace|debug|info|warn|error|off). Defaults to warn.
void InitFromEnv();

void Debug(std::string_view message);
void Info(std::string_view message);
void Warn(std::string_view message);

}  // namespace steplab::log

#endif  // STEPLAB_LOG_HPP_
