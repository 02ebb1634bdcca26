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

#ifndef MEGCF_COMMON_H_
#define MEGCF_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace megcf {

enum class ErrorCode {
  // graph
  kDuplicateEdge,
  kIndexOutOfRange,
  kEmptyGraph,
  kDanglingEntity,
  kZeroDegree,
  // sentiment
  kEmptyReviewList,
  kScoreOutOfRange,
  // numerics
  kNonFiniteEmbedding,
  kNonFiniteGradient,
  kNonFiniteParameter,
  kNonFiniteScore,
  // training / evaluation
  kUserWithAllItems,
  kTooFewInteractions,
  kTooFewCandidates,
  // ingestion
  kEmptyAfterFilter,
  kInfeasibleSpec,
  kParseError,
  kIoError,
  kVersionMismatch,
  kShapeMismatch,
  kCorruptFile,
  // configuration
  kInvalidConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure the engine reports carries one of the codes above so callers
// (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

  // True for the NonFinite* family.
  bool IsNumerical() const;

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace megcf

#endif  // MEGCF_COMMON_H_
