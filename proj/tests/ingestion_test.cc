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
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "megcf/common.h"
#include "megcf/evaluation.h"
#include "megcf/ingestion.h"
#include "test_util.h"

namespace megcf {
namespace {

using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidConfig;
}

// Fixed point of "drop every node with degree < k", evaluated naively.
std::set<std::pair<std::string, std::string>> NaiveCore(
    std::set<std::pair<std::string, std::string>> edges, std::size_t k) {
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::string, std::size_t> du, di;
    for (const auto& [u, i] : edges) {
      ++du[u];
      ++di[i];
    }
    for (auto it = edges.begin(); it != edges.end();) {
      if (du[it->first] < k || di[it->second] < k) {
        it = edges.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return edges;
}

std::set<std::pair<std::string, std::string>> EdgeSet(const RawDataset& d) {
  std::set<std::pair<std::string, std::string>> s;
  for (const auto& r : d.interactions) s.insert({r.user, r.item});
  return s;
}

RawDataset Complete(std::size_t users, std::size_t items) {
  RawDataset d;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t i = 0; i < items; ++i) {
      d.interactions.push_back({"u" + std::to_string(u), "i" + std::to_string(i)});
    }
  }
  return d;
}

TEST_SUITE("ingestion") {
  TEST_CASE("interaction parsing") {
    const auto rows = ParseInteractions("# header\nalice\tbook\n\nbob\tpen\r\nalice\tbook\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == RawInteraction{"alice", "book"});
    CHECK(rows[1] == RawInteraction{"bob", "pen"});
  }

  TEST_CASE("malformed rows name their line") {
    std::string msg;
    CHECK(CodeOf([] { ParseInteractions("a\tb\nc\n", "inter.tsv"); }, &msg) ==
          ErrorCode::kParseError);
    CHECK(msg.find("inter.tsv:2") != std::string::npos);
    CHECK(CodeOf([] { ParseInteractions("a\t\n"); }) == ErrorCode::kParseError);
    CHECK(CodeOf([] { ParseItemEntities("i\te\tsmell\n", "ent"); }, &msg) ==
          ErrorCode::kParseError);
    CHECK(msg.find("ent:1") != std::string::npos);
    CHECK(CodeOf([] { ParseSentiments("i\tnot-a-number\n"); }) == ErrorCode::kParseError);
    CHECK(CodeOf([] { ParseSentiments("i\t1.5\n"); }) == ErrorCode::kScoreOutOfRange);
  }

  TEST_CASE("entity and sentiment parsing") {
    const auto e = ParseItemEntities("i1\tbag\tvisual\ni1\tbag\tv\ni2\tred\tt\n");
    REQUIRE(e.size() == 2);
    CHECK(e[1].kind == EntityKind::kTextual);
    const auto s = ParseSentiments("i1\t0.25\ni1\t0.75\n");
    REQUIRE(s.size() == 2);
    CHECK(s[1].score == 0.75);
  }

  TEST_CASE("format and parse round trip") {
    const std::vector<RawInteraction> inter = {{"u", "i"}, {"v", "j"}};
    CHECK(ParseInteractions(FormatInteractions(inter)) == inter);
    const std::vector<RawItemEntity> ent = {{"i", "x", EntityKind::kVisual},
                                            {"j", "y", EntityKind::kTextual}};
    CHECK(ParseItemEntities(FormatItemEntities(ent)) == ent);
    const std::vector<RawSentiment> sent = {{"i", 0.1}, {"j", 0.30000000000000004}};
    CHECK(ParseSentiments(FormatSentiments(sent)) == sent);
  }

  TEST_CASE("datasets round trip through a directory") {
    TempDir dir;
    RawDataset d = Complete(5, 5);
    d.item_entities = {{"i0", "x", EntityKind::kVisual}};
    d.sentiments = {{"i0", 0.5}};
    d.has_sentiments = true;
    SaveDataset(dir.path(), d);
    CHECK(LoadDataset(dir.path()) == d);

    RawDataset bare = Complete(5, 5);
    TempDir dir2;
    SaveDataset(dir2.path(), bare);
    const auto loaded = LoadDataset(dir2.path());
    CHECK_FALSE(loaded.has_sentiments);
    CHECK(loaded.item_entities.empty());
    CHECK(CodeOf([] { LoadDataset("/nonexistent/megcf"); }) == ErrorCode::kIoError);
  }

  TEST_CASE("five-core filter keeps a complete core unchanged") {
    RawDataset d = Complete(6, 5);
    d.item_entities = {{"i0", "x", EntityKind::kVisual}};
    CHECK(FiveCoreFilter(d) == d);
  }

  TEST_CASE("removals cascade to a fixed point") {
    // With k = 2: z has one user, so it goes; c then has one item and goes.
    RawDataset d;
    d.interactions = {{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}, {"c", "y"}, {"c", "z"}};
    d.item_entities = {{"z", "e", EntityKind::kVisual}, {"x", "e", EntityKind::kVisual}};
    d.sentiments = {{"z", 0.5}, {"y", 0.2}};
    d.has_sentiments = true;
    const auto f = FiveCoreFilter(d, 2);
    const std::set<std::pair<std::string, std::string>> expected = {
        {"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "y"}};
    CHECK(EdgeSet(f) == expected);
    CHECK(EdgeSet(f) == NaiveCore(EdgeSet(d), 2));
    CHECK(f.item_entities.size() == 1);
    CHECK(f.sentiments == std::vector<RawSentiment>{{"y", 0.2}});
  }

  TEST_CASE("five-core output matches the naive fixed point") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
      RawDataset d;
      const std::size_t users = 10 + rng() % 30, items = 10 + rng() % 30;
      for (std::size_t k = 0; k < users * items / 4; ++k) {
        d.interactions.push_back({"u" + std::to_string(rng() % users),
                                  "i" + std::to_string(rng() % items)});
      }
      std::set<std::pair<std::string, std::string>> unique;
      for (const auto& r : d.interactions) unique.insert({r.user, r.item});
      const auto expected = NaiveCore(unique, 5);
      if (expected.empty()) {
        CHECK(CodeOf([&] { FiveCoreFilter(d); }) == ErrorCode::kEmptyAfterFilter);
        continue;
      }
      const auto f = FiveCoreFilter(d);
      CHECK(EdgeSet(f) == expected);
      CHECK(f.interactions.size() == expected.size());
      std::map<std::string, int> du, di;
      for (const auto& r : f.interactions) {
        ++du[r.user];
        ++di[r.item];
      }
      for (auto& [k, v] : du) CHECK(v >= 5);
      for (auto& [k, v] : di) CHECK(v >= 5);
      CHECK(FiveCoreFilter(f) == f);
    }
  }

  TEST_CASE("empty after filtering") {
    RawDataset d = Complete(3, 3);
    CHECK(CodeOf([&] { FiveCoreFilter(d); }) == ErrorCode::kEmptyAfterFilter);
  }

  TEST_CASE("ids follow first appearance") {
    IdMap m;
    CHECK(m.Add("b") == 0);
    CHECK(m.Add("a") == 1);
    CHECK(m.Add("b") == 0);
    CHECK(m.size() == 2);
    for (std::uint32_t k = 0; k < m.size(); ++k) CHECK(*m.Find(m.key(k)) == k);
    CHECK_FALSE(m.Find("c").has_value());
    CHECK(IdMap::FromKeys({"b", "a"}) == m);
  }

  TEST_CASE("remap builds dense indices, entity kinds and scores") {
    RawDataset d;
    d.interactions = {{"u2", "i9"}, {"u1", "i9"}, {"u2", "i3"}};
    d.item_entities = {{"i3", "red", EntityKind::kTextual},
                       {"i9", "red", EntityKind::kVisual},
                       {"i9", "bag", EntityKind::kVisual},
                       {"ghost", "bag", EntityKind::kVisual}};
    d.sentiments = {{"i9", 0.2}, {"i9", 0.6}};
    d.has_sentiments = true;
    const auto x = RemapIds(d);
    CHECK(x.users.keys() == std::vector<std::string>{"u2", "u1"});
    CHECK(x.items.keys() == std::vector<std::string>{"i9", "i3"});
    CHECK(x.entities.keys() ==
          std::vector<std::string>{"visual:red", "visual:bag", "textual:red"});
    CHECK(x.entity_kinds == std::vector<EntityKind>{EntityKind::kVisual, EntityKind::kVisual,
                                                     EntityKind::kTextual});
    CHECK(x.interactions == std::vector<InteractionEdge>{{0, 0}, {1, 0}, {0, 1}});
    CHECK(x.item_entities.size() == 3);
    REQUIRE(x.item_scores.size() == 2);
    CHECK(x.item_scores[0] == doctest::Approx(0.4));
    CHECK(x.item_scores[1] == 1.0);
  }

  TEST_CASE("split text round trip") {
    std::vector<InteractionEdge> edges;
    for (std::uint32_t u = 0; u < 4; ++u) {
      for (std::uint32_t i = 0; i < 6; ++i) edges.push_back({u, (u + i * 7) % 120});
    }
    const auto split = MakeSplit(edges, 4, 120, 3);
    const std::string text = FormatSplit(split);
    CHECK(ParseSplit(text) == split);
    CHECK(FormatSplit(ParseSplit(text)) == text);
    CHECK(CodeOf([&] { ParseSplit("# megcf-split v9\n" + text.substr(text.find('\n') + 1)); }) ==
          ErrorCode::kVersionMismatch);
    std::string broken = text;
    broken.back() = 'x';
    CHECK(CodeOf([&] { ParseSplit(broken); }) == ErrorCode::kParseError);
  }

  TEST_CASE("training data for a split") {
    RawDataset raw;
    for (int u = 0; u < 6; ++u) {
      for (int i = u % 2; i < 110; i += 2) {
        raw.interactions.push_back({"u" + std::to_string(u), "i" + std::to_string(i)});
      }
    }
    raw.has_sentiments = true;
    raw.sentiments = {{"i0", 0.5}};
    const IndexedDataset data = RemapIds(raw);
    SplitOptions opts;
    opts.num_negatives = 5;
    const auto split = MakeSplit(data.interactions, data.num_users(), data.num_items(), 1, opts);
    const auto td = MakeTrainingData(data, split);
    CHECK(td.train_edges.size() == 6 * 53);
    CHECK(td.item_scores.size() == 110);
    EvalSplit wrong = split;
    wrong.num_items = 3;
    CHECK(CodeOf([&] { MakeTrainingData(data, wrong); }) == ErrorCode::kShapeMismatch);
  }
}

}  // namespace
}  // namespace megcf
