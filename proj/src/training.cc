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


#include "megcf/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "json.hpp"
#include "megcf/common.h"

namespace megcf {
namespace {

// Stream tags for Rng::Stream, so init and sampling never share draws.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSamplingStream = 2;

void Require(bool ok, const std::string& message) {
  if (!ok) Fail(ErrorCode::kInvalidConfig, message);
}

// Zeroes `table`, reallocating only when the shape changed.
void ResetTable(EmbeddingTable& table, const NodeLayout& layout, std::size_t dim) {
  if (table.layout() == layout && table.dim() == dim) {
    table.values().SetZero();
  } else {
    table = EmbeddingTable(layout, dim);
  }
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMegcf: return "megcf";
    case ModelKind::kBprmf: return "bprmf";
    case ModelKind::kLightGcn: return "lightgcn";
  }
  return "megcf";
}

ModelKind ParseModelKind(std::string_view name) {
  if (name == "megcf") return ModelKind::kMegcf;
  if (name == "bprmf") return ModelKind::kBprmf;
  if (name == "lightgcn") return ModelKind::kLightGcn;
  Fail(ErrorCode::kInvalidConfig, "unknown model '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  Require(dim >= 1, "dim must be positive");
  Require(layers >= 0, "layers must be non-negative");
  Require(model == ModelKind::kBprmf || layers >= 1,
          "graph models need at least one layer");
  Require(alpha >= 0.0 && alpha < 0.5, "alpha must lie in [0, 0.5)");
  Require(gamma >= 0.0 && std::isfinite(gamma), "gamma must be non-negative");
  Require(learning_rate > 0.0 && std::isfinite(learning_rate),
          "learning rate must be positive");
  Require(lambda1 >= 0.0 && lambda2 >= 0.0, "lambdas must be non-negative");
  Require(batch_size >= 1, "batch size must be positive");
  Require(epochs >= 0, "epochs must be non-negative");
  Require(patience >= 1, "patience must be positive");
  Require(eval_every >= 1, "eval_every must be positive");
  Require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          "Adam betas must lie in [0, 1)");
  Require(epsilon > 0.0, "Adam epsilon must be positive");
  if (model == ModelKind::kMegcf) {
    Require(flags.use_g1_loss || flags.use_g2_loss,
            "at least one of the g1/g2 losses must be on");
    Require(!flags.use_g1_loss || flags.use_g1_branch,
            "g1 loss requires the g1 branch");
    Require(!flags.use_g2_loss || flags.use_g2_branch,
            "g2 loss requires the g2 branch");
  }
}

bool TrainConfig::g1_branch() const {
  return model != ModelKind::kMegcf || flags.use_g1_branch;
}
bool TrainConfig::g2_branch() const {
  return model == ModelKind::kMegcf && flags.use_g2_branch;
}
bool TrainConfig::g1_loss() const {
  return model != ModelKind::kMegcf || flags.use_g1_loss;
}
bool TrainConfig::g2_loss() const { return g2_branch() && flags.use_g2_loss; }

int TrainConfig::effective_layers() const {
  return model == ModelKind::kBprmf ? 0 : layers;
}

double TrainConfig::effective_alpha() const {
  return flags.use_pn ? alpha : 0.0;
}

LayerCombination TrainConfig::combination() const {
  return model == ModelKind::kLightGcn ? LayerCombination::kMean
                                       : LayerCombination::kLastLayer;
}

std::vector<Triplet> SampleBatch(const InteractionGraph& graph,
                                 std::size_t batch_size, Rng& rng) {
  const std::size_t num_edges = graph.num_edges();
  const std::size_t num_items = graph.num_items();
  const auto& user_adj = graph.user_adjacency();
  std::vector<Triplet> batch;
  batch.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const std::size_t edge = rng.UniformIndex(num_edges);
    // The owning user is the last one whose first-neighbor offset <= edge.
    const auto offsets = user_adj.offsets();
    const auto owner = std::upper_bound(offsets.begin(), offsets.end(), edge) - 1;
    const auto user = static_cast<std::uint32_t>(owner - offsets.begin());
    const auto items = graph.user_neighbors(user);
    const std::uint32_t positive = items[edge - *owner];
    if (items.size() >= num_items) {
      Fail(ErrorCode::kUserWithAllItems,
           "user " + std::to_string(user) + " interacted with every item");
    }
    std::uint32_t negative;
    do {
      negative = static_cast<std::uint32_t>(rng.UniformIndex(num_items));
    } while (std::binary_search(items.begin(), items.end(), negative));
    batch.push_back({user, positive, negative});
  }
  return batch;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double BprLoss(std::span<const double> scores_pos,
               std::span<const double> scores_neg, double reg_term) {
  if (scores_pos.size() != scores_neg.size() || scores_pos.empty()) {
    Fail(ErrorCode::kInvalidConfig,
         "BPR loss needs matching, non-empty score lists");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < scores_pos.size(); ++k) {
    sum += Softplus(-(scores_pos[k] - scores_neg[k]));
  }
  return sum / static_cast<double>(scores_pos.size()) + reg_term;
}

double Predict(std::span<const double> user_g1, std::span<const double> item_g1,
               std::span<const double> user_g2,
               std::span<const double> item_g2) {
  double score = 0.0;
  if (!user_g1.empty()) score += Dot(user_g1, item_g1);
  if (!user_g2.empty()) score += Dot(user_g2, item_g2);
  return score;
}

AdamState AdamState::ForShape(std::size_t rows, std::size_t cols, double beta1,
                              double beta2, double epsilon) {
  AdamState s;
  s.first_moment = Matrix(rows, cols);
  s.second_moment = Matrix(rows, cols);
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

void AdamStep(Matrix& params, const Matrix& grads, AdamState& state,
              double learning_rate) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols() ||
      state.first_moment.rows() != params.rows() ||
      state.first_moment.cols() != params.cols()) {
    Fail(ErrorCode::kShapeMismatch, "Adam shapes do not match");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto p = params.values();
  auto g = grads.values();
  auto m = state.first_moment.values();
  auto v = state.second_moment.values();
  bool finite = true;
  for (std::size_t k = 0; k < p.size(); ++k) {
    m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
    v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
    const double m_hat = m[k] / correction1;
    const double v_hat = v[k] / correction2;
    p[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    finite = finite && std::isfinite(p[k]);
  }
  if (!finite) {
    Fail(ErrorCode::kNonFiniteParameter, "Adam update produced a non-finite parameter");
  }
}

void XavierInitialize(EmbeddingTable& table, std::uint64_t seed) {
  Rng rng = Rng::Stream(seed, kInitStream);
  const NodeLayout& layout = table.layout();
  const double dim = static_cast<double>(table.dim());
  auto fill_block = [&](std::size_t first_row, std::size_t count) {
    if (count == 0) return;
    const double bound = std::sqrt(6.0 / (static_cast<double>(count) + dim));
    for (std::size_t r = first_row; r < first_row + count; ++r) {
      for (double& v : table.row(r)) v = rng.Uniform(-bound, bound);
    }
  };
  fill_block(layout.user_row(0), layout.num_users);
  fill_block(layout.item_row(0), layout.num_items);
  fill_block(layout.entity_row(0), layout.num_entities);
}

Model::Model(const TrainingData& data, const TrainConfig& config)
    : config_(config) {
  config_.Validate();
  train_graph_ = InteractionGraph::Build(data.train_edges, data.num_users,
                                         data.num_items);

  const bool has_scores = !data.item_scores.empty();
  if (has_scores && data.item_scores.size() != data.num_items) {
    Fail(ErrorCode::kInvalidConfig,
         "item score list has " + std::to_string(data.item_scores.size()) +
             " entries for " + std::to_string(data.num_items) + " items");
  }
  const std::vector<double> ones(data.num_items, 1.0);
  sentiment_ = NormalizeWeights(has_scores ? data.item_scores : ones,
                                config_.gamma,
                                has_scores && config_.flags.use_sentiment);

  if (config_.g2_branch()) {
    EntitySelection selection =
        SelectEntities(data.item_entities, data.entity_kinds,
                       config_.flags.use_visual, config_.flags.use_textual);
    tripartite_ = TripartiteGraph::Build(train_graph_, selection.edges,
                                         selection.kinds.size(),
                                         selection.kinds);
    entity_source_index_ = std::move(selection.original_index);
  } else {
    tripartite_ = TripartiteGraph::Build(train_graph_, {}, 0);
  }
  layout_ = {data.num_users, data.num_items, tripartite_.num_entities()};

  PlanOptions options;
  options.alpha = config_.effective_alpha();
  options.self_loops = config_.model != ModelKind::kLightGcn;
  if (config_.g1_branch()) {
    g1_plan_ = PropagationPlan::ForInteractions(train_graph_, sentiment_,
                                                options, layout_.num_entities);
  }
  if (config_.g2_branch()) {
    g2_plan_ = PropagationPlan::ForTripartite(tripartite_, sentiment_, options);
  }

  params_ = EmbeddingTable(layout_, static_cast<std::size_t>(config_.dim));
  XavierInitialize(params_, config_.seed);
}

void Model::SetParameters(const EmbeddingTable& params) {
  if (params.layout() != layout_ || params.dim() != params_.dim()) {
    Fail(ErrorCode::kShapeMismatch,
         "parameter table does not match the model shape");
  }
  params_ = params;
}

ForwardPass Model::Forward() const {
  ForwardPass pass;
  Forward(pass);
  return pass;
}

void Model::Forward(ForwardPass& pass) const {
  const int layers = config_.effective_layers();
  const LayerCombination combination = config_.combination();
  pass.has_g1 = config_.g1_branch();
  pass.has_g2 = config_.g2_branch();
  if (pass.has_g1) {
    ForwardInto(params_, g1_plan_, layers, pass.g1_layers);
    CombineLayersInto(pass.g1_layers, combination, pass.g1_final);
  }
  if (pass.has_g2) {
    ForwardInto(params_, g2_plan_, layers, pass.g2_layers);
    CombineLayersInto(pass.g2_layers, combination, pass.g2_final);
  }
}

LossBreakdown Model::BranchLoss(const EmbeddingTable& final_table,
                                std::span<const Triplet> batch, double lambda,
                                const EmbeddingTable& layer0,
                                EmbeddingTable* grad_final,
                                EmbeddingTable* grad_layer0) const {
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double bpr = 0.0;
  for (const Triplet& t : batch) {
    const auto user = final_table.user(t.user);
    const auto pos = final_table.item(t.positive);
    const auto neg = final_table.item(t.negative);
    const double x = Dot(user, pos) - Dot(user, neg);
    bpr += Softplus(-x);
    if (grad_final != nullptr) {
      const double c = BprLossDerivative(x) * inv_batch;
      auto g_user = grad_final->user(t.user);
      Axpy(c, pos, g_user);
      Axpy(-c, neg, g_user);
      Axpy(c, user, grad_final->item(t.positive));
      Axpy(-c, user, grad_final->item(t.negative));
    }
  }
  bpr *= inv_batch;

  double reg = 0.0;
  if (lambda > 0.0) {
    std::vector<std::size_t> rows;
    rows.reserve(3 * batch.size());
    for (const Triplet& t : batch) {
      rows.push_back(layout_.user_row(t.user));
      rows.push_back(layout_.item_row(t.positive));
      rows.push_back(layout_.item_row(t.negative));
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    const EmbeddingTable& target = config_.regularize_layer0 ? layer0 : final_table;
    EmbeddingTable* target_grad =
        config_.regularize_layer0 ? grad_layer0 : grad_final;
    for (std::size_t r : rows) {
      reg += SquaredNorm(target.row(r));
      if (target_grad != nullptr) {
        Axpy(2.0 * lambda * inv_batch, target.row(r), target_grad->row(r));
      }
    }
    reg *= lambda * inv_batch;
  }
  return {bpr + reg, 0.0, 0.0};
}

LossBreakdown Model::Loss(const ForwardPass& pass,
                          std::span<const Triplet> batch) const {
  LossBreakdown out;
  if (config_.g1_loss()) {
    out.g1 = BranchLoss(pass.g1_final, batch, config_.lambda1, params_,
                        nullptr, nullptr).total;
  }
  if (config_.g2_loss()) {
    out.g2 = BranchLoss(pass.g2_final, batch, config_.lambda2, params_,
                        nullptr, nullptr).total;
  }
  out.total = out.g1 + out.g2;
  return out;
}

LossBreakdown Model::LossAndGradient(const ForwardPass& pass,
                                     std::span<const Triplet> batch,
                                     EmbeddingTable& grad) const {
  ResetTable(grad, layout_, params_.dim());
  const int layers = config_.effective_layers();
  const LayerCombination combination = config_.combination();
  LossBreakdown out;
  auto branch = [&](const EmbeddingTable& final_table, double lambda,
                    const PropagationPlan& plan) {
    EmbeddingTable& grad_final = scratch_.grad_final;
    ResetTable(grad_final, layout_, params_.dim());
    const double loss =
        BranchLoss(final_table, batch, lambda, params_, &grad_final, &grad).total;
    BackwardCombinedInto(grad_final, plan, layers, combination,
                         scratch_.layer0, scratch_.swap);
    grad.values() += scratch_.layer0.values();
    return loss;
  };
  if (config_.g1_loss()) out.g1 = branch(pass.g1_final, config_.lambda1, g1_plan_);
  if (config_.g2_loss()) out.g2 = branch(pass.g2_final, config_.lambda2, g2_plan_);
  out.total = out.g1 + out.g2;
  if (!grad.values().AllFinite() || !std::isfinite(out.total)) {
    Fail(ErrorCode::kNonFiniteGradient, "joint loss gradient is not finite");
  }
  return out;
}

double Model::Score(const ForwardPass& pass, std::uint32_t user,
                    std::uint32_t item) const {
  return Predict(pass.has_g1 ? pass.g1_final.user(user) : std::span<const double>{},
                 pass.has_g1 ? pass.g1_final.item(item) : std::span<const double>{},
                 pass.has_g2 ? pass.g2_final.user(user) : std::span<const double>{},
                 pass.has_g2 ? pass.g2_final.item(item) : std::span<const double>{});
}

void Model::ScoreItems(const ForwardPass& pass, std::uint32_t user,
                       std::span<const std::uint32_t> items,
                       std::span<double> scores) const {
  for (std::size_t k = 0; k < items.size(); ++k) {
    scores[k] = Score(pass, user, items[k]);
  }
}

CandidateScorer Model::Scorer(const ForwardPass& pass) const {
  return [this, &pass](std::uint32_t user, std::span<const std::uint32_t> items,
                       std::span<double> scores) {
    ScoreItems(pass, user, items, scores);
  };
}

std::string EpochRecordJson(const EpochRecord& record) {
  nlohmann::json j;
  j["epoch"] = record.epoch;
  j["loss"] = record.loss;
  j["loss_g1"] = record.loss_g1;
  j["loss_g2"] = record.loss_g2;
  j["seconds"] = record.seconds;
  if (record.validation_hr10) j["val_hr@10"] = *record.validation_hr10;
  if (record.validation_ndcg10) j["val_ndcg@10"] = *record.validation_ndcg10;
  return j.dump();
}

FitResult Fit(Model& model, const FitOptions& options) {
  const TrainConfig& config = model.config();
  FitResult result;
  Rng rng = Rng::Stream(config.seed, kSamplingStream);
  EmbeddingTable& params = model.parameters();
  AdamState adam = AdamState::ForShape(params.rows(), params.dim(),
                                       config.beta1, config.beta2,
                                       config.epsilon);
  const std::size_t num_edges = model.train_graph().num_edges();
  const std::size_t steps =
      (num_edges + config.batch_size - 1) / config.batch_size;

  EmbeddingTable best = params;
  int epochs_without_gain = 0;
  EmbeddingTable grad;
  ForwardPass pass;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::vector<Triplet> batch =
          SampleBatch(model.train_graph(), config.batch_size, rng);
      model.Forward(pass);
      const LossBreakdown loss = model.LossAndGradient(pass, batch, grad);
      AdamStep(params.values(), grad.values(), adam, config.learning_rate);
      record.loss += loss.total;
      record.loss_g1 += loss.g1;
      record.loss_g2 += loss.g2;
    }
    const double inv_steps = 1.0 / static_cast<double>(steps);
    record.loss *= inv_steps;
    record.loss_g1 *= inv_steps;
    record.loss_g2 *= inv_steps;

    bool stop = false;
    if (options.validation != nullptr && epoch % config.eval_every == 0) {
      model.Forward(pass);
      const std::vector<int> ks = {10};
      const MetricSet metrics = Evaluate(*options.validation,
                                         EvalTarget::kValidation,
                                         model.Scorer(pass), ks);
      record.validation_hr10 = metrics.hr[0];
      record.validation_ndcg10 = metrics.ndcg[0];
      if (metrics.ndcg[0] > result.best_validation_ndcg10) {
        result.best_validation_ndcg10 = metrics.ndcg[0];
        result.best_epoch = epoch;
        best = params;
        epochs_without_gain = 0;
      } else {
        epochs_without_gain += config.eval_every;
        stop = epochs_without_gain >= config.patience;
      }
    }
    record.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    result.log.push_back(record);
    result.epochs_run = epoch;
    if (options.on_epoch) options.on_epoch(record);
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  if (options.validation != nullptr && result.best_epoch > 0) params = best;
  return result;
}

}  // namespace megcf
