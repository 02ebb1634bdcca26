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


#ifndef MEGCF_INGESTION_H_
#define MEGCF_INGESTION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "megcf/evaluation.h"
#include "megcf/graph.h"
#include "megcf/training.h"

namespace megcf {

// File names inside a dataset directory.
inline constexpr std::string_view kInteractionsFile = "interactions.tsv";
inline constexpr std::string_view kEntitiesFile = "entities.tsv";
inline constexpr std::string_view kSentimentsFile = "sentiments.tsv";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct RawInteraction {
  std::string user;
  std::string item;

  friend bool operator==(const RawInteraction&, const RawInteraction&) = default;
};

struct RawItemEntity {
  std::string item;
  std::string entity;
  EntityKind kind = EntityKind::kVisual;

  friend bool operator==(const RawItemEntity&, const RawItemEntity&) = default;
};

// One row per review (or one per item when scores are pre-aggregated).
struct RawSentiment {
  std::string item;
  double score = 1.0;

  friend bool operator==(const RawSentiment&, const RawSentiment&) = default;
};

struct RawDataset {
  std::vector<RawInteraction> interactions;
  std::vector<RawItemEntity> item_entities;
  std::vector<RawSentiment> sentiments;
  // False when the corpus has no reviews at all (sentiment weighting off).
  bool has_sentiments = false;

  friend bool operator==(const RawDataset&, const RawDataset&) = default;
};

std::string_view EntityKindName(EntityKind kind);
// Accepts "visual"/"v" and "textual"/"t". Throws kParseError.
EntityKind ParseEntityKind(std::string_view text);

// Line-oriented TSV readers. '#' lines and blank lines are skipped; any other
// malformed row throws kParseError naming the source and line number.
// Duplicate rows are collapsed with a warning.
std::vector<RawInteraction> ParseInteractions(std::string_view text,
                                              std::string_view source = "interactions");
std::vector<RawItemEntity> ParseItemEntities(std::string_view text,
                                             std::string_view source = "entities");
std::vector<RawSentiment> ParseSentiments(std::string_view text,
                                          std::string_view source = "sentiments");

std::string FormatInteractions(std::span<const RawInteraction> rows);
std::string FormatItemEntities(std::span<const RawItemEntity> rows);
std::string FormatSentiments(std::span<const RawSentiment> rows);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Loads the three files of a dataset directory. The entity and sentiment
// files are optional.
RawDataset LoadDataset(const std::filesystem::path& dir);
void SaveDataset(const std::filesystem::path& dir, const RawDataset& data);

// Iteratively drops users and items with fewer than min_degree distinct
// interactions, then drops entity and sentiment rows of removed items.
// Throws kEmptyAfterFilter.
RawDataset FiveCoreFilter(const RawDataset& raw, std::size_t min_degree = 5);

// Key <-> dense index dictionary, indices in first-appearance order.
class IdMap {
 public:
  std::uint32_t Add(const std::string& key);
  std::optional<std::uint32_t> Find(const std::string& key) const;
  const std::string& key(std::uint32_t index) const { return keys_[index]; }
  std::size_t size() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }

  static IdMap FromKeys(std::vector<std::string> keys);

  friend bool operator==(const IdMap& a, const IdMap& b) {
    return a.keys_ == b.keys_;
  }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct IndexedDataset {
  IdMap users;
  IdMap items;
  // Entity identity is (kind, key). Visual entities take indices
  // [0, num_visual), textual ones follow.
  IdMap entities;
  std::vector<EntityKind> entity_kinds;
  std::vector<InteractionEdge> interactions;
  std::vector<ItemEntityEdge> item_entities;
  // Mean review score per item when has_sentiments; items without reviews
  // get 1.0.
  std::vector<double> item_scores;
  bool has_sentiments = false;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }
  std::size_t num_entities() const { return entities.size(); }
};

// Sentiment rows for unknown items are ignored; entity rows for unknown items
// are dropped (both with warnings).
IndexedDataset RemapIds(const RawDataset& raw);

// Dense model inputs for a given split.
TrainingData MakeTrainingData(const IndexedDataset& data,
                              const EvalSplit& split);

// Text persistence of an EvalSplit, byte-stable for identical splits:
//   # megcf-split v1
//   users <U> items <I>
//   <user>\t<test>\t<validation>\t<train,...>\t<neg,...>
std::string FormatSplit(const EvalSplit& split);
EvalSplit ParseSplit(std::string_view text, std::string_view source = "split");

}  // namespace megcf

#endif  // MEGCF_INGESTION_H_
