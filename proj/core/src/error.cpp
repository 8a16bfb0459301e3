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

#include "steplab/error.hpp"

namespace steplab {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMagicMismatch: return "MagicMismatch";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kShapeOverflow: return "ShapeOverflow";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kEndpointUnavailable: return "EndpointUnavailable";
    case ErrorCode::kEmptyBatchRow: return "EmptyBatchRow";
    case ErrorCode::kStaleCache: return "StaleCache";
    case ErrorCode::kInfeasiblePacking: return "InfeasiblePacking";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kMissingInput: return "MissingInput";
  }
  return "Unknown";
}

}  // namespace steplab
