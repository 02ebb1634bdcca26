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


#include "megcf/evaluation.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "megcf/common.h"
#include "megcf/parallel.h"
#include "megcf/random.h"

namespace megcf {

std::vector<InteractionEdge> EvalSplit::TrainingEdges() const {
  std::vector<InteractionEdge> edges;
  for (std::uint32_t u = 0; u < users.size(); ++u) {
    for (std::uint32_t i : users[u].training_items) edges.push_back({u, i});
  }
  return edges;
}

EvalSplit MakeSplit(std::span<const InteractionEdge> interactions,
                    std::size_t num_users, std::size_t num_items,
                    std::uint64_t seed, const SplitOptions& options) {
  std::vector<std::vector<std::uint32_t>> by_user(num_users);
  for (const auto& e : interactions) {
    if (e.user >= num_users || e.item >= num_items) {
      Fail(ErrorCode::kIndexOutOfRange,
           "interaction (" + std::to_string(e.user) + ", " +
               std::to_string(e.item) + ") out of range");
    }
    by_user[e.user].push_back(e.item);
  }

  EvalSplit split;
  split.num_items = num_items;
  split.users.resize(num_users);
  const std::size_t min_interactions = std::max<std::size_t>(options.min_interactions, 3);
  for (std::uint32_t u = 0; u < num_users; ++u) {
    auto& items = by_user[u];
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (items.size() < min_interactions) {
      Fail(ErrorCode::kTooFewInteractions,
           "user " + std::to_string(u) + " has " +
               std::to_string(items.size()) + " interactions, need " +
               std::to_string(min_interactions));
    }
    const std::size_t pool = num_items - items.size();
    if (pool < options.num_negatives) {
      Fail(ErrorCode::kTooFewCandidates,
           "user " + std::to_string(u) + " has only " + std::to_string(pool) +
               " non-interacted items");
    }

    Rng rng = Rng::Stream(seed, u);
    UserSplit& out = split.users[u];
    const std::size_t test_pos = rng.UniformIndex(items.size());
    std::size_t val_pos = rng.UniformIndex(items.size() - 1);
    if (val_pos >= test_pos) ++val_pos;
    out.test_item = items[test_pos];
    out.validation_item = items[val_pos];
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (k != test_pos && k != val_pos) out.training_items.push_back(items[k]);
    }

    auto interacted = [&](std::uint32_t item) {
      return std::binary_search(items.begin(), items.end(), item);
    };
    out.negatives.reserve(options.num_negatives);
    if (pool >= 2 * options.num_negatives) {
      std::vector<std::uint32_t> taken;
      while (out.negatives.size() < options.num_negatives) {
        const auto j = static_cast<std::uint32_t>(rng.UniformIndex(num_items));
        if (interacted(j)) continue;
        auto at = std::lower_bound(taken.begin(), taken.end(), j);
        if (at != taken.end() && *at == j) continue;
        taken.insert(at, j);
        out.negatives.push_back(j);
      }
    } else {
      // Dense case: partial Fisher-Yates over the explicit complement.
      std::vector<std::uint32_t> complement;
      complement.reserve(pool);
      for (std::uint32_t j = 0; j < num_items; ++j) {
        if (!interacted(j)) complement.push_back(j);
      }
      for (std::size_t k = 0; k < options.num_negatives; ++k) {
        const std::size_t pick = k + rng.UniformIndex(complement.size() - k);
        std::swap(complement[k], complement[pick]);
        out.negatives.push_back(complement[k]);
      }
    }
  }
  return split;
}

double RankOfPositive(std::span<const double> scores) {
  if (scores.empty()) Fail(ErrorCode::kInvalidConfig, "no candidates to rank");
  const double positive = scores[0];
  if (!std::isfinite(positive)) {
    Fail(ErrorCode::kNonFiniteScore, "positive score is not finite");
  }
  std::size_t greater = 0;
  std::size_t tied = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (!std::isfinite(scores[k])) {
      Fail(ErrorCode::kNonFiniteScore, "candidate score is not finite");
    }
    if (scores[k] > positive) {
      ++greater;
    } else if (scores[k] == positive) {
      ++tied;
    }
  }
  return 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(tied);
}

double HitRatioAtK(std::span<const double> ranks, int k) {
  if (ranks.empty()) return 0.0;
  double hits = 0.0;
  for (double r : ranks) {
    if (r <= k) hits += 1.0;
  }
  return hits / static_cast<double>(ranks.size());
}

double NdcgAtK(std::span<const double> ranks, int k) {
  if (ranks.empty()) return 0.0;
  double gain = 0.0;
  for (double r : ranks) {
    if (r <= k) gain += 1.0 / std::log2(r + 1.0);
  }
  return gain / static_cast<double>(ranks.size());
}

namespace {

std::size_t IndexOfK(const std::vector<int>& ks, int k) {
  auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) {
    Fail(ErrorCode::kInvalidConfig, "metrics were not computed at k=" + std::to_string(k));
  }
  return static_cast<std::size_t>(it - ks.begin());
}

}  // namespace

double MetricSet::hr_at(int k) const { return hr[IndexOfK(ks, k)]; }
double MetricSet::ndcg_at(int k) const { return ndcg[IndexOfK(ks, k)]; }

MetricSet ComputeMetrics(std::span<const double> ranks,
                         std::span<const int> ks) {
  MetricSet m;
  m.ks.assign(ks.begin(), ks.end());
  m.events = ranks.size();
  for (int k : ks) {
    m.hr.push_back(HitRatioAtK(ranks, k));
    m.ndcg.push_back(NdcgAtK(ranks, k));
  }
  return m;
}

std::vector<double> RankUsers(const EvalSplit& split, EvalTarget target,
                              const CandidateScorer& scorer) {
  std::vector<double> ranks(split.users.size());
  ParallelFor(split.users.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> candidates;
    std::vector<double> scores;
    for (std::size_t u = begin; u < end; ++u) {
      const UserSplit& us = split.users[u];
      candidates.clear();
      candidates.push_back(target == EvalTarget::kTest ? us.test_item
                                                       : us.validation_item);
      candidates.insert(candidates.end(), us.negatives.begin(),
                        us.negatives.end());
      scores.assign(candidates.size(), 0.0);
      scorer(static_cast<std::uint32_t>(u), candidates, scores);
      ranks[u] = RankOfPositive(scores);
    }
  }, 64);
  return ranks;
}

MetricSet Evaluate(const EvalSplit& split, EvalTarget target,
                   const CandidateScorer& scorer, std::span<const int> ks) {
  const std::vector<double> ranks = RankUsers(split, target, scorer);
  return ComputeMetrics(ranks, ks);
}

}  // namespace megcf
