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


#include "megcf/ingestion.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "megcf/common.h"
#include "megcf/sentiment.h"

namespace megcf {
namespace {

// Calls fn(line_number, fields) for every data line.
void ForEachRow(std::string_view text, std::string_view source,
                std::size_t expected_fields,
                const std::function<void(std::size_t, const std::vector<std::string_view>&)>& fn) {
  std::size_t line_number = 0;
  std::vector<std::string_view> fields;
  while (!text.empty()) {
    ++line_number;
    const std::size_t newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{}
                                             : text.substr(newline + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != expected_fields) {
      Fail(ErrorCode::kParseError,
           std::string(source) + ":" + std::to_string(line_number) +
               ": expected " + std::to_string(expected_fields) +
               " tab-separated fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (fields[f].empty()) {
        Fail(ErrorCode::kParseError,
             std::string(source) + ":" + std::to_string(line_number) +
                 ": field " + std::to_string(f + 1) + " is empty");
      }
    }
    fn(line_number, fields);
  }
}

std::string EntityKey(EntityKind kind, const std::string& entity) {
  return std::string(EntityKindName(kind)) + ":" + entity;
}

}  // namespace

std::string_view EntityKindName(EntityKind kind) {
  return kind == EntityKind::kVisual ? "visual" : "textual";
}

EntityKind ParseEntityKind(std::string_view text) {
  if (text == "visual" || text == "v") return EntityKind::kVisual;
  if (text == "textual" || text == "t") return EntityKind::kTextual;
  Fail(ErrorCode::kParseError,
       "unknown entity kind '" + std::string(text) + "'");
}

std::vector<RawInteraction> ParseInteractions(std::string_view text,
                                              std::string_view source) {
  std::vector<RawInteraction> rows;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t duplicates = 0;
  ForEachRow(text, source, 2, [&](std::size_t, const auto& f) {
    RawInteraction row{std::string(f[0]), std::string(f[1])};
    if (!seen.emplace(row.user, row.item).second) {
      ++duplicates;
      return;
    }
    rows.push_back(std::move(row));
  });
  if (duplicates > 0) {
    spdlog::warn("{}: collapsed {} duplicate user-item rows", source, duplicates);
  }
  return rows;
}

std::vector<RawItemEntity> ParseItemEntities(std::string_view text,
                                             std::string_view source) {
  std::vector<RawItemEntity> rows;
  std::set<std::string> seen;
  std::size_t duplicates = 0;
  ForEachRow(text, source, 3, [&](std::size_t line, const auto& f) {
    RawItemEntity row;
    row.item = std::string(f[0]);
    row.entity = std::string(f[1]);
    try {
      row.kind = ParseEntityKind(f[2]);
    } catch (const Error&) {
      Fail(ErrorCode::kParseError, std::string(source) + ":" +
                                       std::to_string(line) +
                                       ": unknown entity kind '" +
                                       std::string(f[2]) + "'");
    }
    if (!seen.insert(row.item + '\t' + EntityKey(row.kind, row.entity)).second) {
      ++duplicates;
      return;
    }
    rows.push_back(std::move(row));
  });
  if (duplicates > 0) {
    spdlog::warn("{}: collapsed {} duplicate item-entity rows", source, duplicates);
  }
  return rows;
}

std::vector<RawSentiment> ParseSentiments(std::string_view text,
                                          std::string_view source) {
  std::vector<RawSentiment> rows;
  ForEachRow(text, source, 2, [&](std::size_t line, const auto& f) {
    double score = 0.0;
    const auto [end, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), score);
    if (ec != std::errc() || end != f[1].data() + f[1].size()) {
      Fail(ErrorCode::kParseError, std::string(source) + ":" +
                                       std::to_string(line) + ": bad score '" +
                                       std::string(f[1]) + "'");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      Fail(ErrorCode::kScoreOutOfRange, std::string(source) + ":" +
                                            std::to_string(line) + ": score " +
                                            std::string(f[1]) + " outside [0, 1]");
    }
    rows.push_back({std::string(f[0]), score});
  });
  return rows;
}

std::string FormatInteractions(std::span<const RawInteraction> rows) {
  std::string out = "# user\titem\n";
  for (const auto& r : rows) out += r.user + '\t' + r.item + '\n';
  return out;
}

std::string FormatItemEntities(std::span<const RawItemEntity> rows) {
  std::string out = "# item\tentity\tkind\n";
  for (const auto& r : rows) {
    out += r.item + '\t' + r.entity + '\t' + std::string(EntityKindName(r.kind)) + '\n';
  }
  return out;
}

std::string FormatSentiments(std::span<const RawSentiment> rows) {
  std::string out = "# item\tscore\n";
  char buffer[64];
  for (const auto& r : rows) {
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), r.score);
    out += r.item + '\t' + std::string(buffer, end) + '\n';
  }
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) Fail(ErrorCode::kIoError, "short write to " + path.string());
}

RawDataset LoadDataset(const std::filesystem::path& dir) {
  RawDataset data;
  const auto interactions = dir / kInteractionsFile;
  data.interactions = ParseInteractions(ReadFile(interactions), interactions.string());
  const auto entities = dir / kEntitiesFile;
  if (std::filesystem::exists(entities)) {
    data.item_entities = ParseItemEntities(ReadFile(entities), entities.string());
  }
  const auto sentiments = dir / kSentimentsFile;
  if (std::filesystem::exists(sentiments)) {
    data.sentiments = ParseSentiments(ReadFile(sentiments), sentiments.string());
    data.has_sentiments = true;
  }
  return data;
}

void SaveDataset(const std::filesystem::path& dir, const RawDataset& data) {
  std::filesystem::create_directories(dir);
  WriteFile(dir / kInteractionsFile, FormatInteractions(data.interactions));
  WriteFile(dir / kEntitiesFile, FormatItemEntities(data.item_entities));
  if (data.has_sentiments) {
    WriteFile(dir / kSentimentsFile, FormatSentiments(data.sentiments));
  }
}

RawDataset FiveCoreFilter(const RawDataset& raw, std::size_t min_degree) {
  std::vector<RawInteraction> rows;
  {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : raw.interactions) {
      if (seen.emplace(r.user, r.item).second) rows.push_back(r);
    }
  }
  while (true) {
    std::unordered_map<std::string, std::size_t> user_degree;
    std::unordered_map<std::string, std::size_t> item_degree;
    for (const auto& r : rows) {
      ++user_degree[r.user];
      ++item_degree[r.item];
    }
    std::vector<RawInteraction> kept;
    kept.reserve(rows.size());
    for (const auto& r : rows) {
      if (user_degree[r.user] >= min_degree && item_degree[r.item] >= min_degree) {
        kept.push_back(r);
      }
    }
    if (kept.size() == rows.size()) break;
    rows = std::move(kept);
  }
  if (rows.empty()) {
    Fail(ErrorCode::kEmptyAfterFilter,
         "no interactions survive the " + std::to_string(min_degree) + "-core filter");
  }

  RawDataset out;
  out.has_sentiments = raw.has_sentiments;
  std::unordered_set<std::string> items;
  for (const auto& r : rows) items.insert(r.item);
  out.interactions = std::move(rows);
  for (const auto& e : raw.item_entities) {
    if (items.contains(e.item)) out.item_entities.push_back(e);
  }
  for (const auto& s : raw.sentiments) {
    if (items.contains(s.item)) out.sentiments.push_back(s);
  }
  return out;
}

std::uint32_t IdMap::Add(const std::string& key) {
  auto [it, inserted] = index_.emplace(key, static_cast<std::uint32_t>(keys_.size()));
  if (inserted) keys_.push_back(key);
  return it->second;
}

std::optional<std::uint32_t> IdMap::Find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

IdMap IdMap::FromKeys(std::vector<std::string> keys) {
  IdMap map;
  for (const auto& k : keys) {
    if (map.Find(k)) Fail(ErrorCode::kCorruptFile, "duplicate id key '" + k + "'");
    map.Add(k);
  }
  return map;
}

IndexedDataset RemapIds(const RawDataset& raw) {
  IndexedDataset data;
  data.has_sentiments = raw.has_sentiments;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& r : raw.interactions) {
    const std::uint32_t u = data.users.Add(r.user);
    const std::uint32_t i = data.items.Add(r.item);
    if (seen.emplace(u, i).second) data.interactions.push_back({u, i});
  }

  std::size_t unknown_items = 0;
  for (EntityKind kind : {EntityKind::kVisual, EntityKind::kTextual}) {
    for (const auto& e : raw.item_entities) {
      if (e.kind != kind) continue;
      if (!data.items.Find(e.item)) {
        ++unknown_items;
        continue;
      }
      const std::size_t before = data.entities.size();
      data.entities.Add(EntityKey(kind, e.entity));
      if (data.entities.size() > before) data.entity_kinds.push_back(kind);
    }
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen_entities;
  for (const auto& e : raw.item_entities) {
    const auto item = data.items.Find(e.item);
    if (!item) continue;
    const std::uint32_t entity = *data.entities.Find(EntityKey(e.kind, e.entity));
    if (seen_entities.emplace(*item, entity).second) {
      data.item_entities.push_back({*item, entity});
    }
  }
  if (unknown_items > 0) {
    spdlog::warn("dropped {} entity rows for items without interactions", unknown_items);
  }

  if (raw.has_sentiments) {
    std::vector<std::vector<double>> reviews(data.num_items());
    std::size_t unknown = 0;
    for (const auto& s : raw.sentiments) {
      const auto item = data.items.Find(s.item);
      if (!item) {
        ++unknown;
        continue;
      }
      reviews[*item].push_back(s.score);
    }
    if (unknown > 0) {
      spdlog::warn("ignored {} sentiment rows for unknown items", unknown);
    }
    std::size_t missing = 0;
    for (auto& r : reviews) {
      if (r.empty()) {
        r.push_back(1.0);
        ++missing;
      }
    }
    if (missing > 0) {
      spdlog::warn("{} items have no sentiment score; using 1.0", missing);
    }
    data.item_scores = AggregateReviewScores(reviews);
  }
  return data;
}

TrainingData MakeTrainingData(const IndexedDataset& data,
                              const EvalSplit& split) {
  if (split.num_users() != data.num_users() || split.num_items != data.num_items()) {
    Fail(ErrorCode::kShapeMismatch, "split shape does not match dataset");
  }
  TrainingData out;
  out.num_users = data.num_users();
  out.num_items = data.num_items();
  out.train_edges = split.TrainingEdges();
  out.item_entities = data.item_entities;
  out.entity_kinds = data.entity_kinds;
  if (data.has_sentiments) out.item_scores = data.item_scores;
  return out;
}

namespace {

void AppendList(std::string& out, std::span<const std::uint32_t> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += ',';
    out += std::to_string(values[k]);
  }
}

std::vector<std::uint32_t> ParseList(std::string_view text,
                                     std::string_view where) {
  std::vector<std::uint32_t> out;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view token = text.substr(0, comma);
    std::uint32_t value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size()) {
      Fail(ErrorCode::kParseError, std::string(where) + ": bad index '" + std::string(token) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::string FormatSplit(const EvalSplit& split) {
  std::string out = "# megcf-split v1\n";
  out += "users " + std::to_string(split.num_users()) + " items " +
         std::to_string(split.num_items) + "\n";
  for (std::size_t u = 0; u < split.users.size(); ++u) {
    const UserSplit& us = split.users[u];
    out += std::to_string(u) + '\t' + std::to_string(us.test_item) + '\t' +
           std::to_string(us.validation_item) + '\t';
    AppendList(out, us.training_items);
    out += '\t';
    AppendList(out, us.negatives);
    out += '\n';
  }
  return out;
}

EvalSplit ParseSplit(std::string_view text, std::string_view source) {
  constexpr std::string_view kHeader = "# megcf-split v1\n";
  if (!text.starts_with(kHeader)) {
    Fail(ErrorCode::kVersionMismatch, std::string(source) + ": missing split header");
  }
  text.remove_prefix(kHeader.size());
  const std::size_t newline = text.find('\n');
  std::istringstream shape{std::string(text.substr(0, newline))};
  std::string users_word, items_word;
  std::size_t num_users = 0, num_items = 0;
  if (!(shape >> users_word >> num_users >> items_word >> num_items) ||
      users_word != "users" || items_word != "items") {
    Fail(ErrorCode::kParseError, std::string(source) + ":2: bad shape line");
  }
  text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);

  EvalSplit split;
  split.num_items = num_items;
  split.users.resize(num_users);
  std::vector<bool> seen(num_users, false);
  // Data lines start at line 3; ForEachRow counts from the remaining text.
  ForEachRow(text, source, 5, [&](std::size_t line, const auto& f) {
    const std::string where = std::string(source) + ":" + std::to_string(line + 2);
    const auto user = ParseList(f[0], where);
    const auto test = ParseList(f[1], where);
    const auto val = ParseList(f[2], where);
    if (user.size() != 1 || test.size() != 1 || val.size() != 1 ||
        user[0] >= num_users || seen[user[0]]) {
      Fail(ErrorCode::kParseError, where + ": bad user row");
    }
    seen[user[0]] = true;
    UserSplit& us = split.users[user[0]];
    us.test_item = test[0];
    us.validation_item = val[0];
    us.training_items = ParseList(f[3], where);
    us.negatives = ParseList(f[4], where);
    auto in_range = [&](std::uint32_t i) { return i < num_items; };
    if (!in_range(us.test_item) || !in_range(us.validation_item) ||
        !std::all_of(us.training_items.begin(), us.training_items.end(), in_range) ||
        !std::all_of(us.negatives.begin(), us.negatives.end(), in_range)) {
      Fail(ErrorCode::kIndexOutOfRange, where + ": item index out of range");
    }
  });
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    Fail(ErrorCode::kParseError, std::string(source) + ": missing user rows");
  }
  return split;
}

}  // namespace megcf
