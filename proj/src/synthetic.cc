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


#include "megcf/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "megcf/common.h"
#include "megcf/random.h"

namespace megcf {
namespace {

using Vector = std::vector<double>;

Vector RandomDirection(Rng& rng, std::size_t dim) {
  Vector v(dim);
  double norm = 0.0;
  do {
    for (double& x : v) x = rng.Normal();
    norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  } while (norm == 0.0);
  for (double& x : v) x /= norm;
  return v;
}

// k distinct indices from [0, n), uniformly.
std::vector<std::size_t> DistinctIndices(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t j = 0; j < k; ++j) {
    std::swap(pool[j], pool[j + rng.UniformIndex(n - j)]);
  }
  pool.resize(k);
  return pool;
}

std::size_t Poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  // Knuth's method; means here are small.
  const double limit = std::exp(-mean);
  std::size_t k = 0;
  double p = rng.Uniform();
  while (p > limit) {
    ++k;
    p *= rng.Uniform();
  }
  return k;
}

Vector MixtureWithNoise(Rng& rng, const std::vector<Vector>& centers,
                        const std::vector<std::size_t>& members, double noise,
                        std::size_t dim) {
  Vector v(dim, 0.0);
  for (std::size_t e : members) {
    for (std::size_t k = 0; k < dim; ++k) v[k] += centers[e][k];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  const double scale = noise / std::sqrt(static_cast<double>(dim));
  for (double& x : v) x = x * inv + scale * rng.Normal();
  return v;
}

}  // namespace

void SyntheticSpec::Validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) Fail(ErrorCode::kInfeasibleSpec, message);
  };
  require(num_users >= 5 && num_items >= 5, "need at least 5 users and 5 items");
  require(num_entities >= 1, "need at least one entity");
  require(latent_dim >= 1, "latent_dim must be positive");
  require(entity_signal >= 0.0 && entity_signal <= 1.0,
          "entity signal strength must lie in [0, 1]");
  require(sentiment_signal >= 0.0 && sentiment_signal <= 1.0,
          "sentiment signal strength must lie in [0, 1]");
  require(visual_fraction >= 0.0 && visual_fraction <= 1.0,
          "visual fraction must lie in [0, 1]");
  require(entities_per_item >= 1 && entities_per_item <= num_entities,
          "entities per item must lie in [1, num_entities]");
  require(favorite_entities >= 1 && favorite_entities <= num_entities,
          "favorite entities must lie in [1, num_entities]");
  require(target_density > 0.0 && target_density < 1.0,
          "target density must lie in (0, 1)");
  const double mean_user_degree = target_density * static_cast<double>(num_items);
  const double mean_item_degree = target_density * static_cast<double>(num_users);
  require(mean_user_degree >= 5.0 && mean_item_degree >= 5.0,
          "target density " + std::to_string(target_density) +
              " cannot give every user and item 5 interactions");
  require(mean_user_degree <= 0.5 * static_cast<double>(num_items),
          "target density leaves too few negative items");
}

RawDataset GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  const std::size_t dim = spec.latent_dim;
  Rng rng(spec.seed);

  std::vector<Vector> centers(spec.num_entities);
  for (auto& c : centers) c = RandomDirection(rng, dim);

  std::vector<Vector> item_factors(spec.num_items);
  std::vector<double> quality(spec.num_items);
  // Entity corruption draws from its own stream so that the interactions do
  // not depend on entity_signal.
  Rng entity_rng = Rng::Stream(spec.seed, 1);
  std::vector<std::vector<std::size_t>> observed(spec.num_items);
  for (std::size_t i = 0; i < spec.num_items; ++i) {
    const auto truth = DistinctIndices(rng, spec.num_entities, spec.entities_per_item);
    item_factors[i] = MixtureWithNoise(rng, centers, truth, spec.item_noise, dim);
    quality[i] = rng.Uniform();
    // Each slot keeps its true entity with probability entity_signal.
    std::vector<std::size_t>& obs = observed[i];
    std::vector<bool> keep(truth.size());
    for (std::size_t s = 0; s < truth.size(); ++s) {
      keep[s] = entity_rng.Uniform() < spec.entity_signal;
      if (keep[s]) obs.push_back(truth[s]);
    }
    for (std::size_t s = 0; s < truth.size(); ++s) {
      if (keep[s]) continue;
      std::size_t e;
      do {
        e = entity_rng.UniformIndex(spec.num_entities);
      } while (std::find(obs.begin(), obs.end(), e) != obs.end());
      obs.push_back(e);
    }
    std::sort(obs.begin(), obs.end());
  }

  const double mean_degree = spec.target_density * static_cast<double>(spec.num_items);
  std::vector<Vector> user_factors(spec.num_users);
  std::vector<std::size_t> degree(spec.num_users);
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    const auto favorites = DistinctIndices(rng, spec.num_entities, spec.favorite_entities);
    user_factors[u] = MixtureWithNoise(rng, centers, favorites, spec.user_noise, dim);
    degree[u] = std::min(5 + Poisson(rng, mean_degree - 5.0), spec.num_items / 2);
  }
  auto logit = [&](std::size_t u, std::size_t i) {
    const double affinity = std::inner_product(
        user_factors[u].begin(), user_factors[u].end(), item_factors[i].begin(), 0.0);
    return spec.affinity_scale * affinity + spec.quality_scale * (quality[i] - 0.5);
  };
  auto gumbel = [&rng] {
    double uniform;
    do {
      uniform = rng.Uniform();
    } while (uniform <= 0.0);
    return -std::log(-std::log(uniform));
  };
  auto by_key = [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  };

  // Gumbel top-k: sampling without replacement proportional to exp(logit).
  std::vector<std::vector<std::size_t>> chosen(spec.num_users);
  std::vector<std::size_t> item_degree(spec.num_items, 0);
  std::vector<std::pair<double, std::size_t>> keys(spec.num_items);
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    for (std::size_t i = 0; i < spec.num_items; ++i) keys[i] = {logit(u, i) + gumbel(), i};
    const auto k = static_cast<std::ptrdiff_t>(degree[u]);
    std::partial_sort(keys.begin(), keys.begin() + k, keys.end(), by_key);
    for (std::ptrdiff_t r = 0; r < k; ++r) {
      chosen[u].push_back(keys[r].second);
      ++item_degree[keys[r].second];
    }
  }

  // Items left below five interactions draw extra users the same way.
  std::vector<std::pair<double, std::size_t>> user_keys;
  std::vector<std::vector<std::size_t>> extra(spec.num_users);
  for (std::size_t i = 0; i < spec.num_items; ++i) {
    if (item_degree[i] >= 5) continue;
    user_keys.clear();
    for (std::size_t u = 0; u < spec.num_users; ++u) {
      if (std::find(chosen[u].begin(), chosen[u].end(), i) != chosen[u].end() ||
          std::find(extra[u].begin(), extra[u].end(), i) != extra[u].end()) {
        continue;
      }
      user_keys.push_back({logit(u, i) + gumbel(), u});
    }
    const std::size_t need = std::min(5 - item_degree[i], user_keys.size());
    const auto k = static_cast<std::ptrdiff_t>(need);
    std::partial_sort(user_keys.begin(), user_keys.begin() + k, user_keys.end(), by_key);
    for (std::ptrdiff_t r = 0; r < k; ++r) extra[user_keys[r].second].push_back(i);
    item_degree[i] += need;
  }

  // Give the surplus back, round robin over users, from each user's least
  // preferred pick while both ends keep five interactions.
  std::size_t total = 0;
  for (std::size_t u = 0; u < spec.num_users; ++u) total += chosen[u].size() + extra[u].size();
  const auto target = static_cast<std::size_t>(std::llround(
      spec.target_density * static_cast<double>(spec.num_users * spec.num_items)));
  for (bool progress = true; total > target && progress;) {
    progress = false;
    for (std::size_t u = 0; u < spec.num_users && total > target; ++u) {
      auto& picks = chosen[u];
      if (picks.size() + extra[u].size() <= 5) continue;
      for (std::size_t r = picks.size(); r-- > 0;) {
        if (item_degree[picks[r]] <= 5) continue;
        --item_degree[picks[r]];
        picks.erase(picks.begin() + static_cast<std::ptrdiff_t>(r));
        --total;
        progress = true;
        break;
      }
    }
  }
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    chosen[u].insert(chosen[u].end(), extra[u].begin(), extra[u].end());
  }

  RawDataset raw;
  raw.has_sentiments = true;
  for (std::size_t u = 0; u < spec.num_users; ++u) {
    for (std::size_t i : chosen[u]) {
      raw.interactions.push_back({"u" + std::to_string(u), "i" + std::to_string(i)});
      // One review per interaction.
      const double noise = rng.Uniform();
      double score = spec.sentiment_signal * quality[i] +
                     (1.0 - spec.sentiment_signal) * noise + 0.05 * rng.Normal();
      score = std::clamp(score, 0.01, 0.99);
      raw.sentiments.push_back({"i" + std::to_string(i), score});
    }
  }

  const std::size_t num_visual = static_cast<std::size_t>(
      std::llround(spec.visual_fraction * static_cast<double>(spec.num_entities)));
  for (std::size_t i = 0; i < spec.num_items; ++i) {
    for (std::size_t e : observed[i]) {
      raw.item_entities.push_back(
          {"i" + std::to_string(i), "e" + std::to_string(e),
           e < num_visual ? EntityKind::kVisual : EntityKind::kTextual});
    }
  }
  try {
    return FiveCoreFilter(raw);
  } catch (const Error& e) {
    Fail(ErrorCode::kInfeasibleSpec, std::string("generated data is empty after 5-core: ") + e.what());
  }
}

std::string SyntheticSpecJson(const SyntheticSpec& spec) {
  nlohmann::json j;
  j["users"] = spec.num_users;
  j["items"] = spec.num_items;
  j["entities"] = spec.num_entities;
  j["latent_dim"] = spec.latent_dim;
  j["entity_signal"] = spec.entity_signal;
  j["sentiment_signal"] = spec.sentiment_signal;
  j["density"] = spec.target_density;
  j["seed"] = spec.seed;
  j["entities_per_item"] = spec.entities_per_item;
  j["favorite_entities"] = spec.favorite_entities;
  j["visual_fraction"] = spec.visual_fraction;
  j["affinity_scale"] = spec.affinity_scale;
  j["quality_scale"] = spec.quality_scale;
  j["item_noise"] = spec.item_noise;
  j["user_noise"] = spec.user_noise;
  return j.dump(2);
}

}  // namespace megcf
