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


#ifndef MEGCF_GRAPH_H_
#define MEGCF_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace megcf {

enum class NodeKind : std::uint8_t { kUser, kItem, kEntity };

struct NodeId {
  NodeKind kind;
  std::uint32_t index;

  friend bool operator==(const NodeId&, const NodeId&) = default;
};

// Modality an entity was extracted from. Visual and textual entities share
// one index space; the tag lets the per-modality ablations filter edges.
enum class EntityKind : std::uint8_t { kVisual, kTextual };

struct InteractionEdge {
  std::uint32_t user;
  std::uint32_t item;

  friend auto operator<=>(const InteractionEdge&,
                          const InteractionEdge&) = default;
};

struct ItemEntityEdge {
  std::uint32_t item;
  std::uint32_t entity;

  friend auto operator<=>(const ItemEntityEdge&,
                          const ItemEntityEdge&) = default;
};

// Compressed neighbor lists for one side of a bipartite relation. Each list
// is sorted ascending.
class Adjacency {
 public:
  Adjacency() = default;

  // pairs are (node, neighbor); duplicates must already be rejected.
  static Adjacency FromPairs(
      std::size_t num_nodes,
      std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);

  std::size_t num_nodes() const {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t num_entries() const { return neighbors_.size(); }

  std::span<const std::uint32_t> neighbors(std::size_t node) const {
    return {neighbors_.data() + offsets_[node],
            offsets_[node + 1] - offsets_[node]};
  }
  std::size_t degree(std::size_t node) const {
    return offsets_[node + 1] - offsets_[node];
  }
  bool Contains(std::size_t node, std::uint32_t neighbor) const;

  // offsets()[n] is the position of node n's first neighbor; size n+1.
  std::span<const std::size_t> offsets() const { return offsets_; }

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
};

// User-item interaction graph (implicit feedback, r_ui in {0,1}).
class InteractionGraph {
 public:
  InteractionGraph() = default;

  // Throws kEmptyGraph, kIndexOutOfRange or kDuplicateEdge.
  static InteractionGraph Build(std::span<const InteractionEdge> edges,
                                std::size_t num_users, std::size_t num_items);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_edges() const { return user_adj_.num_entries(); }
  double density() const;

  std::span<const std::uint32_t> user_neighbors(std::size_t u) const {
    return user_adj_.neighbors(u);
  }
  std::span<const std::uint32_t> item_neighbors(std::size_t i) const {
    return item_adj_.neighbors(i);
  }
  std::size_t user_degree(std::size_t u) const { return user_adj_.degree(u); }
  std::size_t item_degree(std::size_t i) const { return item_adj_.degree(i); }

  bool HasEdge(std::uint32_t user, std::uint32_t item) const {
    return user_adj_.Contains(user, item);
  }

  // Edges in canonical (user, item) order.
  std::vector<InteractionEdge> Edges() const;

  const Adjacency& user_adjacency() const { return user_adj_; }
  const Adjacency& item_adjacency() const { return item_adj_; }

  friend bool operator==(const InteractionGraph&,
                         const InteractionGraph&) = default;

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  Adjacency user_adj_;
  Adjacency item_adj_;
};

// User-item-entity graph. Items keep the indices of the interaction graph it
// was built from, and each item's neighbors are split by kind.
class TripartiteGraph {
 public:
  TripartiteGraph() = default;

  // entity_kinds may be empty (all entities tagged visual) or list one kind
  // per entity. Throws kIndexOutOfRange, kDuplicateEdge or kDanglingEntity.
  static TripartiteGraph Build(const InteractionGraph& interactions,
                               std::span<const ItemEntityEdge> item_entities,
                               std::size_t num_entities,
                               std::span<const EntityKind> entity_kinds = {});

  const InteractionGraph& interactions() const { return interactions_; }
  std::size_t num_users() const { return interactions_.num_users(); }
  std::size_t num_items() const { return interactions_.num_items(); }
  std::size_t num_entities() const { return entity_adj_.num_nodes(); }
  std::size_t num_item_entity_edges() const {
    return entity_adj_.num_entries();
  }
  // |E| + |E_m| style edge count: interactions plus item-entity memberships.
  std::size_t num_edges() const {
    return interactions_.num_edges() + num_item_entity_edges();
  }

  std::span<const std::uint32_t> item_users(std::size_t i) const {
    return interactions_.item_neighbors(i);
  }
  std::span<const std::uint32_t> item_entities(std::size_t i) const {
    return item_entity_adj_.neighbors(i);
  }
  std::span<const std::uint32_t> entity_items(std::size_t e) const {
    return entity_adj_.neighbors(e);
  }

  std::size_t user_degree(std::size_t u) const {
    return interactions_.user_degree(u);
  }
  // Users plus entities.
  std::size_t item_degree(std::size_t i) const {
    return interactions_.item_degree(i) + item_entity_adj_.degree(i);
  }
  std::size_t entity_degree(std::size_t e) const {
    return entity_adj_.degree(e);
  }
  EntityKind entity_kind(std::size_t e) const { return entity_kinds_[e]; }
  std::span<const EntityKind> entity_kinds() const { return entity_kinds_; }

  std::vector<ItemEntityEdge> ItemEntityEdges() const;

 private:
  InteractionGraph interactions_;
  Adjacency item_entity_adj_;
  Adjacency entity_adj_;
  std::vector<EntityKind> entity_kinds_;
};

// Entity subset after a modality filter, with compacted indices.
struct EntitySelection {
  std::vector<ItemEntityEdge> edges;
  std::vector<EntityKind> kinds;
  // original_index[new] = old entity index
  std::vector<std::uint32_t> original_index;
};

// Keeps entities of the enabled modalities that have at least one item.
EntitySelection SelectEntities(std::span<const ItemEntityEdge> edges,
                               std::span<const EntityKind> kinds,
                               bool keep_visual, bool keep_textual);

// Popularity-aware norm deg_target^-0.5 * deg_source^-(0.5 - alpha); alpha=0
// gives the symmetric Laplacian norm. Throws kZeroDegree on a zero degree and
// kInvalidConfig when alpha is outside [0, 0.5).
double EdgeNorm(std::size_t target_degree, std::size_t source_degree,
                double alpha);

}  // namespace megcf

#endif  // MEGCF_GRAPH_H_
