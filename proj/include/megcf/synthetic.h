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


#ifndef MEGCF_SYNTHETIC_H_
#define MEGCF_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "megcf/ingestion.h"

namespace megcf {

// Planted-structure dataset. Entities are directions in a latent space; each
// item is built from a few "true" entities, users prefer a few entities, and
// interactions follow user-item affinity plus item quality. The observed
// entity list of an item keeps each true entity with probability
// entity_signal (otherwise a random entity takes its place), and review
// scores track item quality with weight sentiment_signal.
struct SyntheticSpec {
  std::size_t num_users = 500;
  std::size_t num_items = 300;
  std::size_t num_entities = 60;
  std::size_t latent_dim = 8;
  double entity_signal = 0.8;
  double sentiment_signal = 0.8;
  double target_density = 0.02;
  std::uint64_t seed = 7;
  std::size_t entities_per_item = 3;
  std::size_t favorite_entities = 2;
  double visual_fraction = 0.5;
  // Sharpness of the user-item affinity and the weight of item quality.
  double affinity_scale = 8.0;
  double quality_scale = 3.0;
  // Spread of item factors around their entity mixture.
  double item_noise = 0.25;
  double user_noise = 0.25;

  // Throws kInfeasibleSpec.
  void Validate() const;
};

// Deterministic per spec. Items short of five interactions draw extra users,
// so the result already satisfies the 5-core condition.
RawDataset GenerateSynthetic(const SyntheticSpec& spec);

std::string SyntheticSpecJson(const SyntheticSpec& spec);

}  // namespace megcf

#endif  // MEGCF_SYNTHETIC_H_
