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


#include "megcf/sentiment.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "megcf/common.h"

namespace megcf {
namespace {

void CheckScore(double s, std::size_t item) {
  if (!(s >= 0.0 && s <= 1.0)) {
    Fail(ErrorCode::kScoreOutOfRange, "item " + std::to_string(item) +
                                          " has sentiment score " +
                                          std::to_string(s));
  }
}

}  // namespace

SentimentWeights SentimentWeights::Uniform(std::size_t num_items) {
  SentimentWeights w;
  w.raw_scores.assign(num_items, 1.0);
  w.weights.assign(num_items, 1.0);
  w.self_loop_weight = 1.0;
  w.enabled = false;
  return w;
}

std::vector<double> AggregateReviewScores(
    const std::vector<std::vector<double>>& per_item_reviews) {
  std::vector<double> out;
  out.reserve(per_item_reviews.size());
  for (std::size_t i = 0; i < per_item_reviews.size(); ++i) {
    const auto& reviews = per_item_reviews[i];
    if (reviews.empty()) {
      Fail(ErrorCode::kEmptyReviewList,
           "item " + std::to_string(i) + " has no review scores");
    }
    double sum = 0.0;
    for (double s : reviews) {
      CheckScore(s, i);
      sum += s;
    }
    out.push_back(sum / static_cast<double>(reviews.size()));
  }
  return out;
}

SentimentWeights NormalizeWeights(std::span<const double> raw_scores,
                                  double gamma, bool enabled) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    Fail(ErrorCode::kInvalidConfig, "gamma must be non-negative");
  }
  if (!enabled) {
    SentimentWeights w = SentimentWeights::Uniform(raw_scores.size());
    w.raw_scores.assign(raw_scores.begin(), raw_scores.end());
    w.gamma = gamma;
    return w;
  }
  if (raw_scores.empty()) {
    Fail(ErrorCode::kInvalidConfig, "no items to weight");
  }

  SentimentWeights w;
  w.raw_scores.assign(raw_scores.begin(), raw_scores.end());
  w.gamma = gamma;
  w.enabled = true;
  w.weights.resize(raw_scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    CheckScore(raw_scores[i], i);
    const double s = std::max(raw_scores[i], kMinSentimentScore);
    w.weights[i] = std::pow(s, gamma);
    total += w.weights[i];
  }
  // Denominator covers real items only; self terms are not counted.
  const double scale = static_cast<double>(raw_scores.size()) / total;
  for (double& v : w.weights) v *= scale;
  w.self_loop_weight = scale;  // 1.0^gamma * |I| / total
  return w;
}

}  // namespace megcf
