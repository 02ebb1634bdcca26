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


#include "megcf/propagation.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "megcf/common.h"
#include "megcf/parallel.h"

namespace megcf {
namespace {

// Isolated nodes (possible in a training graph after holding out items) keep
// a unit degree so their self term stays defined.
std::size_t NormDegree(std::size_t degree) { return std::max<std::size_t>(degree, 1); }

void CheckFinite(const EmbeddingTable& table, const char* what) {
  if (!table.values().AllFinite()) {
    Fail(ErrorCode::kNonFiniteEmbedding,
         std::string(what) + " produced a non-finite value");
  }
}

}  // namespace

std::size_t NodeLayout::row(NodeId id) const {
  switch (id.kind) {
    case NodeKind::kUser: return user_row(id.index);
    case NodeKind::kItem: return item_row(id.index);
    case NodeKind::kEntity: return entity_row(id.index);
  }
  return 0;
}

NodeId NodeLayout::node(std::size_t r) const {
  if (r < num_users) return {NodeKind::kUser, static_cast<std::uint32_t>(r)};
  r -= num_users;
  if (r < num_items) return {NodeKind::kItem, static_cast<std::uint32_t>(r)};
  return {NodeKind::kEntity, static_cast<std::uint32_t>(r - num_items)};
}

// Appends rows in order; entries within a row must arrive in ascending
// source order.
class PropagationPlan::Builder {
 public:
  explicit Builder(std::size_t num_rows) { csr_.offsets.reserve(num_rows + 1); csr_.offsets.push_back(0); }

  void Add(std::size_t source, double coefficient) {
    assert(csr_.sources.size() == csr_.offsets.back() ||
           csr_.sources.back() < source);
    csr_.sources.push_back(static_cast<std::uint32_t>(source));
    csr_.coefficients.push_back(coefficient);
  }
  void EndRow() { csr_.offsets.push_back(csr_.sources.size()); }

  Csr Finish() { return std::move(csr_); }

 private:
  Csr csr_;
};

PropagationPlan PropagationPlan::ForInteractions(
    const InteractionGraph& graph, const SentimentWeights& weights,
    const PlanOptions& options, std::size_t num_entities) {
  if (weights.num_items() != graph.num_items()) {
    Fail(ErrorCode::kInvalidConfig, "sentiment weights cover " +
                                        std::to_string(weights.num_items()) +
                                        " items, graph has " +
                                        std::to_string(graph.num_items()));
  }
  PropagationPlan plan;
  plan.layout_ = {graph.num_users(), graph.num_items(), num_entities};
  const NodeLayout& layout = plan.layout_;
  const double alpha = options.alpha;
  Builder b(layout.total());

  for (std::size_t u = 0; u < graph.num_users(); ++u) {
    const std::size_t du = NormDegree(graph.user_degree(u));
    if (options.self_loops) {
      b.Add(layout.user_row(u), weights.self_loop_weight * EdgeNorm(du, du, alpha));
    }
    for (std::uint32_t i : graph.user_neighbors(u)) {
      b.Add(layout.item_row(i),
            weights.item(i) * EdgeNorm(du, graph.item_degree(i), alpha));
    }
    b.EndRow();
  }
  for (std::size_t i = 0; i < graph.num_items(); ++i) {
    const std::size_t di = NormDegree(graph.item_degree(i));
    const double wi = weights.item(i);
    for (std::uint32_t u : graph.item_neighbors(i)) {
      b.Add(layout.user_row(u), wi * EdgeNorm(di, graph.user_degree(u), alpha));
    }
    if (options.self_loops) {
      b.Add(layout.item_row(i), wi * EdgeNorm(di, di, alpha));
    }
    b.EndRow();
  }
  for (std::size_t e = 0; e < num_entities; ++e) b.EndRow();

  plan.forward_ = b.Finish();
  plan.transpose_ = Transpose(plan.forward_, layout.total());
  return plan;
}

PropagationPlan PropagationPlan::ForTripartite(const TripartiteGraph& graph,
                                               const SentimentWeights& weights,
                                               const PlanOptions& options) {
  if (weights.num_items() != graph.num_items()) {
    Fail(ErrorCode::kInvalidConfig, "sentiment weights cover " +
                                        std::to_string(weights.num_items()) +
                                        " items, graph has " +
                                        std::to_string(graph.num_items()));
  }
  PropagationPlan plan;
  plan.layout_ = {graph.num_users(), graph.num_items(), graph.num_entities()};
  const NodeLayout& layout = plan.layout_;
  const double alpha = options.alpha;
  const double w_self = weights.self_loop_weight;
  Builder b(layout.total());

  for (std::size_t u = 0; u < graph.num_users(); ++u) {
    const std::size_t du = NormDegree(graph.user_degree(u));
    if (options.self_loops) {
      b.Add(layout.user_row(u), w_self * EdgeNorm(du, du, alpha));
    }
    for (std::uint32_t i : graph.interactions().user_neighbors(u)) {
      b.Add(layout.item_row(i),
            weights.item(i) * EdgeNorm(du, graph.item_degree(i), alpha));
    }
    b.EndRow();
  }
  for (std::size_t i = 0; i < graph.num_items(); ++i) {
    const std::size_t di = NormDegree(graph.item_degree(i));
    const double wi = weights.item(i);
    for (std::uint32_t u : graph.item_users(i)) {
      b.Add(layout.user_row(u), wi * EdgeNorm(di, graph.user_degree(u), alpha));
    }
    // One self term even though both neighbor sums list the item itself.
    if (options.self_loops) {
      b.Add(layout.item_row(i), wi * EdgeNorm(di, di, alpha));
    }
    for (std::uint32_t e : graph.item_entities(i)) {
      b.Add(layout.entity_row(e),
            wi * EdgeNorm(di, graph.entity_degree(e), alpha));
    }
    b.EndRow();
  }
  for (std::size_t e = 0; e < graph.num_entities(); ++e) {
    const std::size_t de = NormDegree(graph.entity_degree(e));
    for (std::uint32_t i : graph.entity_items(e)) {
      b.Add(layout.item_row(i),
            weights.item(i) * EdgeNorm(de, graph.item_degree(i), alpha));
    }
    if (options.self_loops) {
      b.Add(layout.entity_row(e), w_self * EdgeNorm(de, de, alpha));
    }
    b.EndRow();
  }

  plan.forward_ = b.Finish();
  plan.transpose_ = Transpose(plan.forward_, layout.total());
  return plan;
}

PropagationPlan::Csr PropagationPlan::Transpose(const Csr& csr,
                                                std::size_t num_rows) {
  Csr t;
  t.offsets.assign(num_rows + 1, 0);
  for (std::uint32_t s : csr.sources) ++t.offsets[s + 1];
  for (std::size_t r = 0; r < num_rows; ++r) t.offsets[r + 1] += t.offsets[r];
  t.sources.resize(csr.sources.size());
  t.coefficients.resize(csr.coefficients.size());
  std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
  // Scanning targets in ascending order keeps each transposed row sorted.
  for (std::size_t r = 0; r < num_rows; ++r) {
    for (std::size_t k = csr.offsets[r]; k < csr.offsets[r + 1]; ++k) {
      const std::size_t slot = cursor[csr.sources[k]]++;
      t.sources[slot] = static_cast<std::uint32_t>(r);
      t.coefficients[slot] = csr.coefficients[k];
    }
  }
  return t;
}

std::span<const std::uint32_t> PropagationPlan::sources(std::size_t r) const {
  return {forward_.sources.data() + forward_.offsets[r],
          forward_.offsets[r + 1] - forward_.offsets[r]};
}

std::span<const double> PropagationPlan::coefficients(std::size_t r) const {
  return {forward_.coefficients.data() + forward_.offsets[r],
          forward_.offsets[r + 1] - forward_.offsets[r]};
}

void PropagationPlan::Multiply(const Csr& csr, const EmbeddingTable& in,
                               EmbeddingTable& out) {
  const std::size_t rows = csr.offsets.size() - 1;
  if (out.layout() != in.layout() || out.dim() != in.dim()) {
    out = EmbeddingTable(in.layout(), in.dim());
  }
  // Each output row is owned by one worker and accumulated in entry order.
  ParallelFor(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto dst = out.row(r);
      std::fill(dst.begin(), dst.end(), 0.0);
      for (std::size_t k = csr.offsets[r]; k < csr.offsets[r + 1]; ++k) {
        Axpy(csr.coefficients[k], in.row(csr.sources[k]), dst);
      }
    }
  });
}

void PropagationPlan::Apply(const EmbeddingTable& in,
                            EmbeddingTable& out) const {
  if (in.layout() != layout_) {
    Fail(ErrorCode::kShapeMismatch,
         "embedding table layout does not match propagation plan");
  }
  Multiply(forward_, in, out);
  CheckFinite(out, "propagation");
}

void PropagationPlan::ApplyTranspose(const EmbeddingTable& in,
                                     EmbeddingTable& out) const {
  if (in.layout() != layout_) {
    Fail(ErrorCode::kShapeMismatch,
         "gradient table layout does not match propagation plan");
  }
  Multiply(transpose_, in, out);
  CheckFinite(out, "transposed propagation");
}

EmbeddingTable Propagate(const EmbeddingTable& in,
                         const PropagationPlan& plan) {
  EmbeddingTable out;
  plan.Apply(in, out);
  return out;
}

std::vector<EmbeddingTable> Forward(const EmbeddingTable& emb0,
                                    const PropagationPlan& plan, int layers) {
  std::vector<EmbeddingTable> out;
  ForwardInto(emb0, plan, layers, out);
  return out;
}

void ForwardInto(const EmbeddingTable& emb0, const PropagationPlan& plan,
                 int layers, std::vector<EmbeddingTable>& out) {
  if (layers < 0) Fail(ErrorCode::kInvalidConfig, "negative layer count");
  out.resize(static_cast<std::size_t>(layers) + 1);
  out[0] = emb0;
  for (std::size_t l = 1; l < out.size(); ++l) plan.Apply(out[l - 1], out[l]);
}

EmbeddingTable Backward(const EmbeddingTable& grad_last,
                        const PropagationPlan& plan, int layers) {
  if (layers < 0) Fail(ErrorCode::kInvalidConfig, "negative layer count");
  EmbeddingTable current = grad_last;
  EmbeddingTable next;
  for (int l = 0; l < layers; ++l) {
    plan.ApplyTranspose(current, next);
    std::swap(current, next);
  }
  return current;
}

EmbeddingTable CombineLayers(std::span<const EmbeddingTable> layers,
                             LayerCombination combination) {
  EmbeddingTable out;
  CombineLayersInto(layers, combination, out);
  return out;
}

void CombineLayersInto(std::span<const EmbeddingTable> layers,
                       LayerCombination combination, EmbeddingTable& out) {
  assert(!layers.empty());
  if (combination == LayerCombination::kLastLayer) {
    out = layers.back();
    return;
  }
  out = layers.front();
  for (std::size_t l = 1; l < layers.size(); ++l) {
    out.values() += layers[l].values();
  }
  out.values() *= 1.0 / static_cast<double>(layers.size());
}

EmbeddingTable BackwardCombined(const EmbeddingTable& grad_final,
                                const PropagationPlan& plan, int layers,
                                LayerCombination combination) {
  EmbeddingTable out;
  EmbeddingTable scratch;
  BackwardCombinedInto(grad_final, plan, layers, combination, out, scratch);
  return out;
}

void BackwardCombinedInto(const EmbeddingTable& grad_final,
                          const PropagationPlan& plan, int layers,
                          LayerCombination combination, EmbeddingTable& out,
                          EmbeddingTable& scratch) {
  if (layers < 0) Fail(ErrorCode::kInvalidConfig, "negative layer count");
  out = grad_final;
  if (combination == LayerCombination::kLastLayer) {
    for (int l = 0; l < layers; ++l) {
      plan.ApplyTranspose(out, scratch);
      std::swap(out, scratch);
    }
    return;
  }
  // sum_{l=0..L} (A^T)^l g, evaluated Horner style: acc <- g + A^T acc.
  for (int l = 0; l < layers; ++l) {
    plan.ApplyTranspose(out, scratch);
    scratch.values() += grad_final.values();
    std::swap(out, scratch);
  }
  out.values() *= 1.0 / static_cast<double>(layers + 1);
}

EmbeddingTable SelfLoopLightGcnForward(const InteractionGraph& graph,
                                       const EmbeddingTable& emb0,
                                       int layers) {
  const NodeLayout& layout = emb0.layout();
  const std::size_t d = emb0.dim();
  auto inv_sqrt = [](std::size_t degree) {
    return 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(degree, 1)));
  };
  EmbeddingTable current = emb0;
  for (int l = 0; l < layers; ++l) {
    EmbeddingTable next(layout, d);
    for (std::size_t u = 0; u < graph.num_users(); ++u) {
      const double cu = inv_sqrt(graph.user_degree(u));
      auto dst = next.user(u);
      auto self = current.user(u);
      for (std::size_t k = 0; k < d; ++k) dst[k] += (cu * cu) * self[k];
      for (std::uint32_t i : graph.user_neighbors(u)) {
        const double c = cu * inv_sqrt(graph.item_degree(i));
        auto src = current.item(i);
        for (std::size_t k = 0; k < d; ++k) dst[k] += c * src[k];
      }
    }
    for (std::size_t i = 0; i < graph.num_items(); ++i) {
      const double ci = inv_sqrt(graph.item_degree(i));
      auto dst = next.item(i);
      for (std::uint32_t u : graph.item_neighbors(i)) {
        const double c = ci * inv_sqrt(graph.user_degree(u));
        auto src = current.user(u);
        for (std::size_t k = 0; k < d; ++k) dst[k] += c * src[k];
      }
      auto self = current.item(i);
      for (std::size_t k = 0; k < d; ++k) dst[k] += (ci * ci) * self[k];
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace megcf
