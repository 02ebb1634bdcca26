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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "megcf/common.h"
#include "megcf/sentiment.h"

namespace megcf {
namespace {

double MeanOf(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

TEST_SUITE("sentiment") {
  TEST_CASE("review scores average per item") {
    const auto s = AggregateReviewScores({{0.2, 0.4, 0.6}, {1.0}, {0.95, 0.05}});
    CHECK(s[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(s[1] == 1.0);
    CHECK(s[2] == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("review score errors") {
    try {
      AggregateReviewScores({{0.5}, {}});
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyReviewList);
    }
    try {
      AggregateReviewScores({{1.5}});
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kScoreOutOfRange);
    }
  }

  TEST_CASE("two-item worked example") {
    const std::vector<double> raw = {0.5, 1.0};
    const auto w = NormalizeWeights(raw, 0.1, true);
    // mpmath, 30 digits: 2 * 0.5^0.1 / (0.5^0.1 + 1) and 2 / (0.5^0.1 + 1).
    CHECK(std::fabs(w.item(0) - 0.965356510335629496) < 1e-15);
    CHECK(std::fabs(w.item(1) - 1.034643489664370504) < 1e-15);
    CHECK(std::fabs(w.self_loop_weight - 1.034643489664370504) < 1e-15);
    CHECK(w.enabled);
  }

  TEST_CASE("uniform scores give unit weights") {
    for (double c : {0.01, 0.3, 1.0}) {
      const std::vector<double> raw(5, c);
      const auto w = NormalizeWeights(raw, 0.1, true);
      for (double x : w.weights) CHECK(std::fabs(x - 1.0) < 1e-14);
    }
  }

  TEST_CASE("disabled weights are exactly one") {
    const std::vector<double> raw = {0.1, 0.9, 0.4};
    const auto w = NormalizeWeights(raw, 0.1, false);
    for (double x : w.weights) CHECK(x == 1.0);
    CHECK(w.self_loop_weight == 1.0);
    CHECK_FALSE(w.enabled);
  }

  TEST_CASE("normalization properties on random scores") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> score(0.001, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> raw(1 + rng() % 200);
      for (double& s : raw) s = score(rng);
      const auto w = NormalizeWeights(raw, 0.1, true);
      CHECK(std::fabs(MeanOf(w.weights) - 1.0) < 1e-12);
      for (double x : w.weights) CHECK(x > 0.0);

      // Scale invariance.
      std::vector<double> scaled = raw;
      for (double& s : scaled) s *= 0.37;
      const auto ws = NormalizeWeights(scaled, 0.1, true);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        CHECK(std::fabs(ws.item(i) - w.item(i)) < 1e-12);
      }

      // Order preservation.
      for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
        if (raw[i] > raw[i + 1]) CHECK(w.item(i) > w.item(i + 1));
        if (raw[i] < raw[i + 1]) CHECK(w.item(i) < w.item(i + 1));
      }

      // Small-gamma limit.
      const double gamma = 1e-4;
      const auto wg = NormalizeWeights(raw, gamma, true);
      const double s_min = *std::min_element(raw.begin(), raw.end());
      for (double x : wg.weights) {
        CHECK(std::fabs(x - 1.0) < gamma * std::fabs(std::log(s_min)) + 1e-12);
      }
    }
  }

  TEST_CASE("zero scores are clamped") {
    const std::vector<double> raw = {0.0, 1.0};
    const auto w = NormalizeWeights(raw, 0.1, true);
    const double tiny = std::pow(1e-6, 0.1);
    CHECK(w.item(0) == doctest::Approx(2.0 * tiny / (tiny + 1.0)));
    CHECK(w.item(0) > 0.0);
  }

  TEST_CASE("invalid inputs") {
    const std::vector<double> raw = {0.5};
    CHECK_THROWS_AS(NormalizeWeights(raw, -0.1, true), Error);
    const std::vector<double> bad = {1.2};
    CHECK_THROWS_AS(NormalizeWeights(bad, 0.1, true), Error);
  }
}

}  // namespace
}  // namespace megcf
