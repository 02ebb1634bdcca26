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


#ifndef MEGCF_EVALUATION_H_
#define MEGCF_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "megcf/graph.h"

namespace megcf {

inline constexpr std::size_t kDefaultNegatives = 99;
inline constexpr std::size_t kMinUserInteractions = 5;

// Leave-one-out holdout for one user. negatives exclude every item the user
// interacted with, including the test and validation items.
struct UserSplit {
  std::uint32_t test_item = 0;
  std::uint32_t validation_item = 0;
  std::vector<std::uint32_t> training_items;  // sorted
  std::vector<std::uint32_t> negatives;       // in sampling order

  friend bool operator==(const UserSplit&, const UserSplit&) = default;
};

struct EvalSplit {
  std::size_t num_items = 0;
  std::vector<UserSplit> users;

  std::size_t num_users() const { return users.size(); }
  std::vector<InteractionEdge> TrainingEdges() const;

  friend bool operator==(const EvalSplit&, const EvalSplit&) = default;
};

struct SplitOptions {
  std::size_t num_negatives = kDefaultNegatives;
  std::size_t min_interactions = kMinUserInteractions;
};

// One test and one validation item per user, drawn uniformly, plus a frozen
// negative candidate list. Per-user streams derive from seed, so the result
// depends only on (interactions, seed). Throws kTooFewInteractions,
// kTooFewCandidates, kIndexOutOfRange.
EvalSplit MakeSplit(std::span<const InteractionEdge> interactions,
                    std::size_t num_users, std::size_t num_items,
                    std::uint64_t seed, const SplitOptions& options = {});

// scores[0] is the held-out positive, the rest are its negatives. Ties with
// the positive count half (expected rank under a random tie order).
// Throws kNonFiniteScore.
double RankOfPositive(std::span<const double> scores);

double HitRatioAtK(std::span<const double> ranks, int k);
double NdcgAtK(std::span<const double> ranks, int k);

inline const std::vector<int>& DefaultKs() {
  static const std::vector<int> ks = {5, 10, 20};
  return ks;
}

struct MetricSet {
  std::vector<int> ks;
  std::vector<double> hr;
  std::vector<double> ndcg;
  std::size_t events = 0;

  // Throws kInvalidConfig if k was not evaluated.
  double hr_at(int k) const;
  double ndcg_at(int k) const;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

MetricSet ComputeMetrics(std::span<const double> ranks, std::span<const int> ks);

enum class EvalTarget { kTest, kValidation };

// Writes one score per candidate item for the given user. Called
// concurrently for different users.
using CandidateScorer = std::function<void(
    std::uint32_t user, std::span<const std::uint32_t> items,
    std::span<double> scores)>;

// Per-user ranks of the held-out item among its candidates, in user order.
std::vector<double> RankUsers(const EvalSplit& split, EvalTarget target,
                              const CandidateScorer& scorer);

MetricSet Evaluate(const EvalSplit& split, EvalTarget target,
                   const CandidateScorer& scorer,
                   std::span<const int> ks = DefaultKs());

}  // namespace megcf

#endif  // MEGCF_EVALUATION_H_
