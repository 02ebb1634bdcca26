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


#include "megcf/graph.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "megcf/common.h"

namespace megcf {
namespace {

using Pair = std::pair<std::uint32_t, std::uint32_t>;

void RejectDuplicates(std::vector<Pair> sorted, const char* what) {
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    Fail(ErrorCode::kDuplicateEdge,
         std::string(what) + " (" + std::to_string(dup->first) + ", " +
             std::to_string(dup->second) + ") appears more than once");
  }
}

}  // namespace

Adjacency Adjacency::FromPairs(std::size_t num_nodes,
                               std::span<const Pair> pairs) {
  Adjacency adj;
  adj.offsets_.assign(num_nodes + 1, 0);
  for (const auto& [node, neighbor] : pairs) ++adj.offsets_[node + 1];
  for (std::size_t n = 0; n < num_nodes; ++n) {
    adj.offsets_[n + 1] += adj.offsets_[n];
  }
  adj.neighbors_.resize(pairs.size());
  std::vector<std::size_t> cursor(adj.offsets_.begin(), adj.offsets_.end() - 1);
  for (const auto& [node, neighbor] : pairs) {
    adj.neighbors_[cursor[node]++] = neighbor;
  }
  for (std::size_t n = 0; n < num_nodes; ++n) {
    std::sort(adj.neighbors_.begin() + adj.offsets_[n],
              adj.neighbors_.begin() + adj.offsets_[n + 1]);
  }
  return adj;
}

bool Adjacency::Contains(std::size_t node, std::uint32_t neighbor) const {
  auto list = neighbors(node);
  return std::binary_search(list.begin(), list.end(), neighbor);
}

InteractionGraph InteractionGraph::Build(std::span<const InteractionEdge> edges,
                                         std::size_t num_users,
                                         std::size_t num_items) {
  if (edges.empty()) Fail(ErrorCode::kEmptyGraph, "no interactions");
  std::vector<Pair> by_user;
  std::vector<Pair> by_item;
  by_user.reserve(edges.size());
  by_item.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.user >= num_users || e.item >= num_items) {
      Fail(ErrorCode::kIndexOutOfRange,
           "interaction (" + std::to_string(e.user) + ", " +
               std::to_string(e.item) + ") outside " +
               std::to_string(num_users) + " users x " +
               std::to_string(num_items) + " items");
    }
    by_user.emplace_back(e.user, e.item);
    by_item.emplace_back(e.item, e.user);
  }
  RejectDuplicates(by_user, "interaction");

  InteractionGraph g;
  g.num_users_ = num_users;
  g.num_items_ = num_items;
  g.user_adj_ = Adjacency::FromPairs(num_users, by_user);
  g.item_adj_ = Adjacency::FromPairs(num_items, by_item);
  return g;
}

double InteractionGraph::density() const {
  return static_cast<double>(num_edges()) /
         (static_cast<double>(num_users_) * static_cast<double>(num_items_));
}

std::vector<InteractionEdge> InteractionGraph::Edges() const {
  std::vector<InteractionEdge> out;
  out.reserve(num_edges());
  for (std::uint32_t u = 0; u < num_users_; ++u) {
    for (std::uint32_t i : user_neighbors(u)) out.push_back({u, i});
  }
  return out;
}

TripartiteGraph TripartiteGraph::Build(
    const InteractionGraph& interactions,
    std::span<const ItemEntityEdge> item_entities, std::size_t num_entities,
    std::span<const EntityKind> entity_kinds) {
  if (!entity_kinds.empty() && entity_kinds.size() != num_entities) {
    Fail(ErrorCode::kIndexOutOfRange,
         "entity kind list has " + std::to_string(entity_kinds.size()) +
             " entries for " + std::to_string(num_entities) + " entities");
  }
  const std::size_t num_items = interactions.num_items();
  std::vector<Pair> by_item;
  std::vector<Pair> by_entity;
  by_item.reserve(item_entities.size());
  by_entity.reserve(item_entities.size());
  for (const auto& e : item_entities) {
    if (e.item >= num_items || e.entity >= num_entities) {
      Fail(ErrorCode::kIndexOutOfRange,
           "item-entity edge (" + std::to_string(e.item) + ", " +
               std::to_string(e.entity) + ") outside " +
               std::to_string(num_items) + " items x " +
               std::to_string(num_entities) + " entities");
    }
    by_item.emplace_back(e.item, e.entity);
    by_entity.emplace_back(e.entity, e.item);
  }
  RejectDuplicates(by_item, "item-entity edge");

  TripartiteGraph g;
  g.interactions_ = interactions;
  g.item_entity_adj_ = Adjacency::FromPairs(num_items, by_item);
  g.entity_adj_ = Adjacency::FromPairs(num_entities, by_entity);
  for (std::size_t e = 0; e < num_entities; ++e) {
    if (g.entity_adj_.degree(e) == 0) {
      Fail(ErrorCode::kDanglingEntity,
           "entity " + std::to_string(e) + " has no items");
    }
  }
  if (entity_kinds.empty()) {
    g.entity_kinds_.assign(num_entities, EntityKind::kVisual);
  } else {
    g.entity_kinds_.assign(entity_kinds.begin(), entity_kinds.end());
  }
  return g;
}

std::vector<ItemEntityEdge> TripartiteGraph::ItemEntityEdges() const {
  std::vector<ItemEntityEdge> out;
  out.reserve(num_item_entity_edges());
  for (std::uint32_t i = 0; i < num_items(); ++i) {
    for (std::uint32_t e : item_entities(i)) out.push_back({i, e});
  }
  return out;
}

EntitySelection SelectEntities(std::span<const ItemEntityEdge> edges,
                               std::span<const EntityKind> kinds,
                               bool keep_visual, bool keep_textual) {
  auto kept_kind = [&](EntityKind kind) {
    return kind == EntityKind::kVisual ? keep_visual : keep_textual;
  };
  std::vector<bool> has_item(kinds.size(), false);
  for (const auto& e : edges) {
    if (e.entity >= kinds.size()) {
      Fail(ErrorCode::kIndexOutOfRange,
           "entity " + std::to_string(e.entity) + " has no kind");
    }
    if (kept_kind(kinds[e.entity])) has_item[e.entity] = true;
  }
  EntitySelection out;
  std::vector<std::uint32_t> remap(kinds.size(), UINT32_MAX);
  for (std::uint32_t e = 0; e < kinds.size(); ++e) {
    if (!has_item[e]) continue;
    remap[e] = static_cast<std::uint32_t>(out.kinds.size());
    out.kinds.push_back(kinds[e]);
    out.original_index.push_back(e);
  }
  for (const auto& e : edges) {
    if (remap[e.entity] != UINT32_MAX) {
      out.edges.push_back({e.item, remap[e.entity]});
    }
  }
  return out;
}

double EdgeNorm(std::size_t target_degree, std::size_t source_degree,
                double alpha) {
  if (target_degree == 0 || source_degree == 0) {
    Fail(ErrorCode::kZeroDegree, "edge norm needs positive degrees");
  }
  if (!(alpha >= 0.0 && alpha < 0.5)) {
    Fail(ErrorCode::kInvalidConfig,
         "alpha must lie in [0, 0.5), got " + std::to_string(alpha));
  }
  const double target = 1.0 / std::sqrt(static_cast<double>(target_degree));
  // alpha = 0 takes the sqrt route so the classical norm is bit-exact.
  const double source =
      alpha == 0.0
          ? 1.0 / std::sqrt(static_cast<double>(source_degree))
          : std::pow(static_cast<double>(source_degree), alpha - 0.5);
  return target * source;
}

}  // namespace megcf
