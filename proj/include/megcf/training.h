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


#ifndef MEGCF_TRAINING_H_
#define MEGCF_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "megcf/evaluation.h"
#include "megcf/graph.h"
#include "megcf/matrix.h"
#include "megcf/propagation.h"
#include "megcf/random.h"
#include "megcf/sentiment.h"

namespace megcf {

enum class ModelKind {
  kMegcf,     // both LS-GCN branches over the shared table
  kBprmf,     // matrix factorization: no propagation
  kLightGcn,  // interaction graph only, no self loops, layer mean
};

std::string_view ModelKindName(ModelKind kind);
// Throws kInvalidConfig.
ModelKind ParseModelKind(std::string_view name);

// One switch per published ablation. All on = the full model.
struct AblationFlags {
  bool use_g1_loss = true;
  bool use_g2_loss = true;
  bool use_sentiment = true;
  bool use_pn = true;  // popularity-aware norm; off means alpha = 0
  bool use_visual = true;
  bool use_textual = true;
  bool use_g1_branch = true;
  bool use_g2_branch = true;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct TrainConfig {
  ModelKind model = ModelKind::kMegcf;
  int dim = 64;
  int layers = 3;
  double alpha = 0.25;
  double gamma = kDefaultGamma;
  double learning_rate = 1e-3;
  double lambda1 = 1e-4;
  double lambda2 = 1e-4;
  // Penalize layer-0 rows instead of the propagated layer-L rows.
  bool regularize_layer0 = false;
  std::size_t batch_size = 2048;
  int epochs = 1000;
  int patience = 50;   // epochs without a validation NDCG@10 gain
  int eval_every = 1;  // epochs between validation passes
  std::uint64_t seed = 2022;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  AblationFlags flags;

  // Throws kInvalidConfig.
  void Validate() const;

  // Branch use after folding the model kind into the flags.
  bool g1_branch() const;
  bool g2_branch() const;
  bool g1_loss() const;
  bool g2_loss() const;
  int effective_layers() const;
  double effective_alpha() const;
  LayerCombination combination() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Triplet {
  std::uint32_t user;
  std::uint32_t positive;
  std::uint32_t negative;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Draws batch_size training edges uniformly with replacement and pairs each
// with a negative item by rejection sampling. Throws kUserWithAllItems.
std::vector<Triplet> SampleBatch(const InteractionGraph& graph,
                                 std::size_t batch_size, Rng& rng);

double Sigmoid(double x);
// ln(1 + e^x), stable for large |x|.
double Softplus(double x);

// Mean of -ln sigmoid(pos - neg) over the batch, plus reg_term.
double BprLoss(std::span<const double> scores_pos,
               std::span<const double> scores_neg, double reg_term);

// d/dx of -ln sigmoid(x).
inline double BprLossDerivative(double x) { return -Sigmoid(-x); }

// <u1, i1> + <u2, i2>; pass empty spans for a disabled branch.
double Predict(std::span<const double> user_g1, std::span<const double> item_g1,
               std::span<const double> user_g2, std::span<const double> item_g2);

struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState ForShape(std::size_t rows, std::size_t cols,
                            double beta1 = 0.9, double beta2 = 0.999,
                            double epsilon = 1e-8);
};

// Bias-corrected Adam update in place. Throws kShapeMismatch and
// kNonFiniteParameter.
void AdamStep(Matrix& params, const Matrix& grads, AdamState& state,
              double learning_rate);

// Everything a model needs, in dense indices.
struct TrainingData {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<InteractionEdge> train_edges;
  std::vector<ItemEntityEdge> item_entities;
  std::vector<EntityKind> entity_kinds;  // one per entity
  std::vector<double> item_scores;       // per-item mean sentiment, may be empty
};

struct LossBreakdown {
  double total = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

// Cached propagation results for the enabled branches.
struct ForwardPass {
  std::vector<EmbeddingTable> g1_layers;
  std::vector<EmbeddingTable> g2_layers;
  EmbeddingTable g1_final;
  EmbeddingTable g2_final;
  bool has_g1 = false;
  bool has_g2 = false;
};

class Model {
 public:
  // Builds graphs, sentiment weights and plans, then Xavier-initializes the
  // table from config.seed.
  Model(const TrainingData& data, const TrainConfig& config);

  const TrainConfig& config() const { return config_; }
  const NodeLayout& layout() const { return layout_; }
  const InteractionGraph& train_graph() const { return train_graph_; }
  const TripartiteGraph& tripartite_graph() const { return tripartite_; }
  const SentimentWeights& sentiment() const { return sentiment_; }
  const PropagationPlan& g1_plan() const { return g1_plan_; }
  const PropagationPlan& g2_plan() const { return g2_plan_; }
  // Model entity index -> entity index in the TrainingData.
  std::span<const std::uint32_t> entity_source_index() const {
    return entity_source_index_;
  }

  EmbeddingTable& parameters() { return params_; }
  const EmbeddingTable& parameters() const { return params_; }
  // Throws kShapeMismatch when the table layout or width differ.
  void SetParameters(const EmbeddingTable& params);

  ForwardPass Forward() const;
  // Same result, reusing the tables already held by `pass`.
  void Forward(ForwardPass& pass) const;

  LossBreakdown Loss(const ForwardPass& pass,
                     std::span<const Triplet> batch) const;

  // Joint loss and its gradient with respect to the layer-0 table.
  // Throws kNonFiniteGradient.
  LossBreakdown LossAndGradient(const ForwardPass& pass,
                                std::span<const Triplet> batch,
                                EmbeddingTable& grad) const;

  double Score(const ForwardPass& pass, std::uint32_t user,
               std::uint32_t item) const;
  void ScoreItems(const ForwardPass& pass, std::uint32_t user,
                  std::span<const std::uint32_t> items,
                  std::span<double> scores) const;

  // Evaluation scorer over a fixed forward pass (which must outlive it).
  CandidateScorer Scorer(const ForwardPass& pass) const;

 private:
  LossBreakdown BranchLoss(const EmbeddingTable& final_table,
                           std::span<const Triplet> batch, double lambda,
                           const EmbeddingTable& layer0,
                           EmbeddingTable* grad_final,
                           EmbeddingTable* grad_layer0) const;

  TrainConfig config_;
  NodeLayout layout_;
  InteractionGraph train_graph_;
  TripartiteGraph tripartite_;
  SentimentWeights sentiment_;
  PropagationPlan g1_plan_;
  PropagationPlan g2_plan_;
  std::vector<std::uint32_t> entity_source_index_;
  EmbeddingTable params_;

  // Buffers reused by LossAndGradient. One call at a time per model.
  struct GradientScratch {
    EmbeddingTable grad_final;
    EmbeddingTable layer0;
    EmbeddingTable swap;
  };
  mutable GradientScratch scratch_;
};

// Uniform Xavier init per node kind: U(-b, b), b = sqrt(6 / (rows + dim)).
void XavierInitialize(EmbeddingTable& table, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double loss_g1 = 0.0;
  double loss_g2 = 0.0;
  double seconds = 0.0;
  std::optional<double> validation_hr10;
  std::optional<double> validation_ndcg10;
};

// Line-delimited JSON record.
std::string EpochRecordJson(const EpochRecord& record);

struct FitOptions {
  // Enables early stopping and best-epoch restore when set.
  const EvalSplit* validation = nullptr;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct FitResult {
  std::vector<EpochRecord> log;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_validation_ndcg10 = -1.0;
  bool stopped_early = false;
};

// epochs x ceil(|train edges| / batch_size) Adam steps on the joint loss.
FitResult Fit(Model& model, const FitOptions& options = {});

}  // namespace megcf

#endif  // MEGCF_TRAINING_H_
