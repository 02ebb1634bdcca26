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


#ifndef MEGCF_EXPERIMENT_H_
#define MEGCF_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "megcf/checkpoint.h"
#include "megcf/common.h"
#include "megcf/config.h"
#include "megcf/evaluation.h"
#include "megcf/ingestion.h"
#include "megcf/report.h"
#include "megcf/training.h"

namespace megcf {

EvalSplit MakeExperimentSplit(const IndexedDataset& data,
                              const ExperimentConfig& config);

struct RunResult {
  std::string variant;
  std::uint64_t seed = 0;
  MetricSet test;
  FitResult fit;
  double seconds = 0.0;
  // Set when the run failed; metrics are then empty.
  std::optional<ErrorCode> error;
  std::string error_message;

  bool ok() const { return !error.has_value(); }
};

struct RunOptions {
  std::function<void(const EpochRecord&)> on_epoch;
  // Receives the trained model state when set.
  Checkpoint* checkpoint = nullptr;
};

// Trains config.train on the split's training edges with validation-based
// early stopping, then evaluates on the test items. Errors propagate.
RunResult TrainAndEvaluate(const IndexedDataset& data, const EvalSplit& split,
                           const ExperimentConfig& config,
                           const RunOptions& options = {});

struct AblationOptions {
  ExperimentConfig base;
  std::vector<std::string> variants = {"full"};
  std::vector<std::uint64_t> seeds = {1};
  // Runs seeds on separate threads; variants stay sequential per seed.
  bool parallel_seeds = false;
  std::function<void(const RunResult&)> on_result;
};

// Each seed sets train.seed and, unless base.split_seed is fixed, the split
// seed, so all variants of one seed share a split. Failed runs are recorded,
// not rethrown. Results are ordered by (seed, variant).
std::vector<RunResult> RunAblation(const IndexedDataset& data,
                                   const AblationOptions& options);

std::vector<MetricRecord> RecordsOf(const std::vector<RunResult>& runs);

}  // namespace megcf

#endif  // MEGCF_EXPERIMENT_H_
