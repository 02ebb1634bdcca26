// Copyright 2026 The MEGCF Authors.
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

#include "megcf/common.h"

namespace megcf {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kDanglingEntity: return "DanglingEntity";
    case ErrorCode::kZeroDegree: return "ZeroDegree";
    case ErrorCode::kEmptyReviewList: return "EmptyReviewList";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kNonFiniteEmbedding: return "NonFiniteEmbedding";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kNonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::kNonFiniteScore: return "NonFiniteScore";
    case ErrorCode::kUserWithAllItems: return "UserWithAllItems";
    case ErrorCode::kTooFewInteractions: return "TooFewInteractions";
    case ErrorCode::kTooFewCandidates: return "TooFewCandidates";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kInfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

bool Error::IsNumerical() const {
  switch (code_) {
    case ErrorCode::kNonFiniteEmbedding:
    case ErrorCode::kNonFiniteGradient:
    case ErrorCode::kNonFiniteParameter:
    case ErrorCode::kNonFiniteScore:
      return true;
    default:
      return false;
  }
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace megcf
