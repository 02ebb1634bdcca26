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


#ifndef MEGCF_CONFIG_H_
#define MEGCF_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "megcf/evaluation.h"
#include "megcf/training.h"

namespace megcf {

// Training config plus the evaluation protocol around it.
struct ExperimentConfig {
  TrainConfig train;
  std::vector<int> ks = DefaultKs();
  std::size_t num_negatives = kDefaultNegatives;
  // Defaults to train.seed when unset.
  std::optional<std::uint64_t> split_seed;

  std::uint64_t effective_split_seed() const {
    return split_seed.value_or(train.seed);
  }
  // Throws kInvalidConfig.
  void Validate() const;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

// Keys are sorted, doubles round-trip exactly.
nlohmann::json ToJson(const TrainConfig& config);
nlohmann::json ToJson(const ExperimentConfig& config);
// Unknown keys and wrong types throw kInvalidConfig. Missing keys keep the
// defaults.
TrainConfig TrainConfigFromJson(const nlohmann::json& j);
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

// Sectioned "key = value" text:
//   [model]     model dim layers alpha gamma
//   [train]     learning_rate lambda1 lambda2 regularize_layer0 batch_size
//               epochs patience eval_every seed beta1 beta2 epsilon
//   [ablation]  use_g1_loss use_g2_loss use_sentiment use_pn use_visual
//               use_textual use_g1_branch use_g2_branch
//   [eval]      ks num_negatives split_seed
// Keys absent from the text leave `base` untouched.
ExperimentConfig ParseConfigText(std::string_view text,
                                 const ExperimentConfig& base = {});
ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                const ExperimentConfig& base = {});
std::string FormatConfigText(const ExperimentConfig& config);

// Named ablation variants.
struct Variant {
  std::string id;    // "wo_vt"
  std::string name;  // "w/o V&T"
};

const std::vector<Variant>& KnownVariants();
// Applies a preset on top of the given config. Accepts ids and display
// names. Throws kInvalidConfig.
TrainConfig ApplyVariant(std::string_view variant, TrainConfig config);
// Canonical id for an id or display name. Throws kInvalidConfig.
std::string CanonicalVariantId(std::string_view variant);
std::string VariantDisplayName(std::string_view variant);

// "5,10,20" -> {5, 10, 20}. Throws kInvalidConfig.
std::vector<int> ParseKs(std::string_view text);
std::string FormatKs(const std::vector<int>& ks);

}  // namespace megcf

#endif  // MEGCF_CONFIG_H_
