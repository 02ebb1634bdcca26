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


#ifndef MEGCF_SENTIMENT_H_
#define MEGCF_SENTIMENT_H_

#include <cstddef>
#include <span>
#include <vector>

namespace megcf {

// Scores below this are clamped before exponentiation.
inline constexpr double kMinSentimentScore = 1e-6;
inline constexpr double kDefaultGamma = 0.1;

// Per-item aggregation weights w_i = s_i^gamma * |I| / sum_j s_j^gamma.
struct SentimentWeights {
  std::vector<double> raw_scores;
  double gamma = kDefaultGamma;
  std::vector<double> weights;
  // The weight a score of exactly 1.0 would receive. Used for the user and
  // entity self terms.
  double self_loop_weight = 1.0;
  bool enabled = false;

  std::size_t num_items() const { return weights.size(); }
  double item(std::size_t i) const { return weights[i]; }

  // Disabled weights: everything is exactly 1.0.
  static SentimentWeights Uniform(std::size_t num_items);
};

// Mean review score per item. Throws kEmptyReviewList / kScoreOutOfRange.
std::vector<double> AggregateReviewScores(
    const std::vector<std::vector<double>>& per_item_reviews);

// Throws kScoreOutOfRange for scores outside [0, 1] and kInvalidConfig for a
// negative gamma or an empty score list.
SentimentWeights NormalizeWeights(std::span<const double> raw_scores,
                                  double gamma, bool enabled);

}  // namespace megcf

#endif  // MEGCF_SENTIMENT_H_
