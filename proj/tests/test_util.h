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


#ifndef MEGCF_TESTS_TEST_UTIL_H_
#define MEGCF_TESTS_TEST_UTIL_H_

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "dense_oracle.h"
#include "megcf/propagation.h"
#include "megcf/training.h"

namespace megcf::testing {

inline TrainingData ToTrainingData(const oracle::Instance& g) {
  TrainingData d;
  d.num_users = g.users;
  d.num_items = g.items;
  for (auto [u, i] : g.user_item) d.train_edges.push_back({u, i});
  for (auto [i, e] : g.item_entity) d.item_entities.push_back({i, e});
  for (std::size_t e = 0; e < g.entities; ++e) {
    d.entity_kinds.push_back(g.entity_kind.empty() || g.entity_kind[e] == 0
                                 ? EntityKind::kVisual
                                 : EntityKind::kTextual);
  }
  d.item_scores = g.scores;
  return d;
}

// Reads the config the way the model documentation describes each preset.
inline oracle::Settings SettingsFor(const TrainConfig& c) {
  oracle::Settings s;
  s.alpha = c.flags.use_pn ? c.alpha : 0.0;
  s.gamma = c.gamma;
  s.sentiment = c.flags.use_sentiment;
  s.keep_visual = c.flags.use_visual;
  s.keep_textual = c.flags.use_textual;
  s.lambda1 = c.lambda1;
  s.lambda2 = c.lambda2;
  s.reg_layer0 = c.regularize_layer0;
  s.layers = c.layers;
  switch (c.model) {
    case ModelKind::kMegcf:
      s.g1_branch = c.flags.use_g1_branch;
      s.g2_branch = c.flags.use_g2_branch;
      s.g1_loss = c.flags.use_g1_loss;
      s.g2_loss = c.flags.use_g2_loss;
      break;
    case ModelKind::kBprmf:
      s.g1_branch = s.g1_loss = true;
      s.g2_branch = s.g2_loss = false;
      s.layers = 0;
      break;
    case ModelKind::kLightGcn:
      s.g1_branch = s.g1_loss = true;
      s.g2_branch = s.g2_loss = false;
      s.self_loops = false;
      s.mean_of_layers = true;
      break;
  }
  return s;
}

inline oracle::Dense ToDense(const EmbeddingTable& t) {
  const auto v = t.values().values();
  return {v.begin(), v.end()};
}

inline void FillRandom(EmbeddingTable& t, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& x : t.values().values()) x = dist(rng);
}

inline double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return a.size() == b.size() ? m : INFINITY;
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("megcf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace megcf::testing

#endif  // MEGCF_TESTS_TEST_UTIL_H_
