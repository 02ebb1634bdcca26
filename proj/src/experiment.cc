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


#include "megcf/experiment.h"

#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

namespace megcf {

EvalSplit MakeExperimentSplit(const IndexedDataset& data,
                              const ExperimentConfig& config) {
  SplitOptions options;
  options.num_negatives = config.num_negatives;
  return MakeSplit(data.interactions, data.num_users(), data.num_items(),
                   config.effective_split_seed(), options);
}

RunResult TrainAndEvaluate(const IndexedDataset& data, const EvalSplit& split,
                           const ExperimentConfig& config,
                           const RunOptions& options) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.seed = config.train.seed;
  Model model(MakeTrainingData(data, split), config.train);
  FitOptions fit;
  fit.validation = &split;
  fit.on_epoch = options.on_epoch;
  result.fit = Fit(model, fit);
  const ForwardPass pass = model.Forward();
  result.test = Evaluate(split, EvalTarget::kTest, model.Scorer(pass), config.ks);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (options.checkpoint != nullptr) {
    Checkpoint& ck = *options.checkpoint;
    ck.config = config;
    ck.dataset = data;
    ck.dataset.interactions.clear();
    ck.split = split;
    ck.parameters = model.parameters();
  }
  return result;
}

namespace {

std::vector<RunResult> RunSeed(const IndexedDataset& data,
                               const AblationOptions& options, std::uint64_t seed,
                               std::mutex& callback_mutex) {
  std::vector<RunResult> out;
  ExperimentConfig base = options.base;
  base.train.seed = seed;
  std::optional<EvalSplit> split;
  std::optional<Error> split_error;
  try {
    split = MakeExperimentSplit(data, base);
  } catch (const Error& e) {
    split_error = e;
  }
  for (const std::string& variant : options.variants) {
    RunResult result;
    try {
      if (split_error) throw *split_error;
      ExperimentConfig config = base;
      config.train = ApplyVariant(variant, base.train);
      result = TrainAndEvaluate(data, *split, config);
    } catch (const Error& e) {
      result.error = e.code();
      result.error_message = e.what();
      spdlog::error("run {} seed {} failed: {}", variant, seed, e.what());
    }
    result.variant = variant;
    result.seed = seed;
    if (options.on_result) {
      std::lock_guard<std::mutex> lock(callback_mutex);
      options.on_result(result);
    }
    out.push_back(std::move(result));
  }
  return out;
}

}  // namespace

std::vector<RunResult> RunAblation(const IndexedDataset& data,
                                   const AblationOptions& options) {
  for (const auto& v : options.variants) CanonicalVariantId(v);
  std::mutex callback_mutex;
  std::vector<std::vector<RunResult>> per_seed(options.seeds.size());
  if (options.parallel_seeds && options.seeds.size() > 1) {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(options.seeds.size());
    for (std::size_t s = 0; s < options.seeds.size(); ++s) {
      threads.emplace_back([&, s] {
        try {
          per_seed[s] = RunSeed(data, options, options.seeds[s], callback_mutex);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t s = 0; s < options.seeds.size(); ++s) {
      per_seed[s] = RunSeed(data, options, options.seeds[s], callback_mutex);
    }
  }
  std::vector<RunResult> out;
  for (auto& runs : per_seed) {
    for (auto& r : runs) out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricRecord> RecordsOf(const std::vector<RunResult>& runs) {
  std::vector<MetricRecord> out;
  for (const RunResult& r : runs) {
    if (!r.ok()) continue;
    auto records = ToRecords(r.variant, r.seed, r.test);
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

}  // namespace megcf
