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


#ifndef MEGCF_PROPAGATION_H_
#define MEGCF_PROPAGATION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "megcf/graph.h"
#include "megcf/matrix.h"
#include "megcf/sentiment.h"

namespace megcf {

// Row layout shared by every embedding table: users, then items, then
// entities.
struct NodeLayout {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_entities = 0;

  std::size_t total() const { return num_users + num_items + num_entities; }
  std::size_t user_row(std::size_t u) const { return u; }
  std::size_t item_row(std::size_t i) const { return num_users + i; }
  std::size_t entity_row(std::size_t e) const {
    return num_users + num_items + e;
  }
  std::size_t row(NodeId id) const;
  NodeId node(std::size_t row) const;

  friend bool operator==(const NodeLayout&, const NodeLayout&) = default;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(const NodeLayout& layout, std::size_t dim)
      : layout_(layout), values_(layout.total(), dim) {}

  const NodeLayout& layout() const { return layout_; }
  std::size_t dim() const { return values_.cols(); }
  std::size_t rows() const { return values_.rows(); }

  std::span<double> row(std::size_t r) { return values_.row(r); }
  std::span<const double> row(std::size_t r) const { return values_.row(r); }
  std::span<double> user(std::size_t u) { return row(layout_.user_row(u)); }
  std::span<const double> user(std::size_t u) const {
    return row(layout_.user_row(u));
  }
  std::span<double> item(std::size_t i) { return row(layout_.item_row(i)); }
  std::span<const double> item(std::size_t i) const {
    return row(layout_.item_row(i));
  }
  std::span<double> entity(std::size_t e) {
    return row(layout_.entity_row(e));
  }
  std::span<const double> entity(std::size_t e) const {
    return row(layout_.entity_row(e));
  }

  Matrix& values() { return values_; }
  const Matrix& values() const { return values_; }

  friend bool operator==(const EmbeddingTable&,
                         const EmbeddingTable&) = default;

 private:
  NodeLayout layout_;
  Matrix values_;
};

struct PlanOptions {
  double alpha = 0.25;
  // LightGCN proper has no self connections; both LS-GCN branches do.
  bool self_loops = true;
};

// Weighted adjacency A-hat of one graph convolution branch, stored row-wise
// (row = aggregation target) together with its transpose. Within a row,
// entries are ordered by ascending source row with the self term in its
// sorted position.
class PropagationPlan {
 public:
  PropagationPlan() = default;

  // LS-GCN-1 over the interaction graph:
  //   item i <- w_i * norm(|N_i|, |N_u|) * v_u   and   w_i * norm(|N_i|,|N_i|) * v_i
  //   user u <- w_i * norm(|N_u|, |N_i|) * v_i   and   w_self * norm(|N_u|,|N_u|) * v_u
  // Entity rows (num_entities of them) are left empty so the plan can act on
  // the full shared table.
  static PropagationPlan ForInteractions(const InteractionGraph& graph,
                                         const SentimentWeights& weights,
                                         const PlanOptions& options,
                                         std::size_t num_entities = 0);

  // LS-GCN-2 over the user-item-entity graph. Users and entities weight each
  // message by the source item's w_i, items scale all of their user and
  // entity messages by their own w_i, and every node gets one self term.
  // Item degrees count users and entities.
  static PropagationPlan ForTripartite(const TripartiteGraph& graph,
                                       const SentimentWeights& weights,
                                       const PlanOptions& options);

  const NodeLayout& layout() const { return layout_; }
  std::size_t num_entries() const { return forward_.sources.size(); }

  std::span<const std::uint32_t> sources(std::size_t target_row) const;
  std::span<const double> coefficients(std::size_t target_row) const;

  // out = A-hat * in. Throws kNonFiniteEmbedding.
  void Apply(const EmbeddingTable& in, EmbeddingTable& out) const;
  // out = A-hat^T * in. Throws kNonFiniteEmbedding.
  void ApplyTranspose(const EmbeddingTable& in, EmbeddingTable& out) const;

 private:
  struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> sources;
    std::vector<double> coefficients;
  };
  class Builder;

  static Csr Transpose(const Csr& csr, std::size_t num_rows);
  static void Multiply(const Csr& csr, const EmbeddingTable& in,
                       EmbeddingTable& out);

  NodeLayout layout_;
  Csr forward_;
  Csr transpose_;
};

EmbeddingTable Propagate(const EmbeddingTable& in, const PropagationPlan& plan);

// Layers 0..L, index 0 being a copy of emb0. Requires layers >= 0.
std::vector<EmbeddingTable> Forward(const EmbeddingTable& emb0,
                                    const PropagationPlan& plan, int layers);
// Forward into `out`, reusing the storage of tables already there.
void ForwardInto(const EmbeddingTable& emb0, const PropagationPlan& plan,
                 int layers, std::vector<EmbeddingTable>& out);

// Gradient with respect to layer 0 given the gradient at layer L:
// (A-hat^T)^L applied to grad_last.
EmbeddingTable Backward(const EmbeddingTable& grad_last,
                        const PropagationPlan& plan, int layers);

enum class LayerCombination {
  kLastLayer,  // LS-GCN: final representation is layer L
  kMean,       // LightGCN baseline: mean over layers 0..L
};

EmbeddingTable CombineLayers(std::span<const EmbeddingTable> layers,
                             LayerCombination combination);
void CombineLayersInto(std::span<const EmbeddingTable> layers,
                       LayerCombination combination, EmbeddingTable& out);

// Gradient with respect to layer 0 of CombineLayers(Forward(...)).
EmbeddingTable BackwardCombined(const EmbeddingTable& grad_final,
                                const PropagationPlan& plan, int layers,
                                LayerCombination combination);

// BackwardCombined writing into `out`. Both tables keep their storage across
// calls, so a training loop can reuse them.
void BackwardCombinedInto(const EmbeddingTable& grad_final,
                          const PropagationPlan& plan, int layers,
                          LayerCombination combination, EmbeddingTable& out,
                          EmbeddingTable& scratch);

// Last-layer LightGCN propagation with symmetric norm and self loops on the
// interaction graph, written without plans or sentiment. The fully reduced
// LS-GCN-1 (alpha 0, no sentiment, no entities) must match it bit for bit.
EmbeddingTable SelfLoopLightGcnForward(const InteractionGraph& graph,
                                       const EmbeddingTable& emb0, int layers);

}  // namespace megcf

#endif  // MEGCF_PROPAGATION_H_
