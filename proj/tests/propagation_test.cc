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


#include <cmath>
#include <random>
#include <vector>

#include "dense_oracle.h"
#include "doctest.h"
#include "megcf/common.h"
#include "megcf/graph.h"
#include "megcf/parallel.h"
#include "megcf/propagation.h"
#include "megcf/sentiment.h"
#include "test_util.h"

namespace megcf {
namespace {

using testing::FillRandom;
using testing::MaxAbsDiff;
using testing::ToDense;

struct Built {
  InteractionGraph g1;
  TripartiteGraph g;
  SentimentWeights weights;
  PropagationPlan p1;
  PropagationPlan p2;
  NodeLayout layout;
};

Built Build(const oracle::Instance& inst, const oracle::Settings& s) {
  Built b;
  const auto data = testing::ToTrainingData(inst);
  b.g1 = InteractionGraph::Build(data.train_edges, inst.users, inst.items);
  const std::vector<double> ones(inst.items, 1.0);
  b.weights = NormalizeWeights(inst.scores.empty() ? ones : inst.scores, s.gamma,
                               s.sentiment && !inst.scores.empty());
  const auto sel = SelectEntities(data.item_entities, data.entity_kinds, s.keep_visual,
                                  s.keep_textual);
  b.g = TripartiteGraph::Build(b.g1, sel.edges, sel.kinds.size(), sel.kinds);
  PlanOptions opts;
  opts.alpha = s.alpha;
  opts.self_loops = s.self_loops;
  b.p1 = PropagationPlan::ForInteractions(b.g1, b.weights, opts, b.g.num_entities());
  b.p2 = PropagationPlan::ForTripartite(b.g, b.weights, opts);
  b.layout = b.p2.layout();
  return b;
}

oracle::Settings RandomSettings(std::mt19937_64& rng) {
  oracle::Settings s;
  s.alpha = (rng() % 2) ? 0.0 : 0.05 + 0.4 * static_cast<double>(rng() % 1000) / 1000.0;
  s.sentiment = rng() % 2;
  s.self_loops = rng() % 4 != 0;
  s.keep_visual = rng() % 3 != 0;
  s.keep_textual = rng() % 3 != 0;
  return s;
}

TEST_SUITE("propagation") {
  TEST_CASE("one user one item graph") {
    oracle::Instance inst;
    inst.users = inst.items = 1;
    inst.user_item = {{0, 0}};
    oracle::Settings s;
    const Built b = Build(inst, s);
    EmbeddingTable v(b.layout, 1);
    v.user(0)[0] = 2.0;
    v.item(0)[0] = 3.0;
    const EmbeddingTable out = Propagate(v, b.p1);
    CHECK(out.user(0)[0] == 5.0);
    CHECK(out.item(0)[0] == 5.0);
  }

  TEST_CASE("item row with one user and one entity") {
    oracle::Instance inst;
    inst.users = inst.items = inst.entities = 1;
    inst.user_item = {{0, 0}};
    inst.item_entity = {{0, 0}};
    inst.entity_kind = {0};
    const Built b = Build(inst, oracle::Settings{});
    EmbeddingTable v(b.layout, 1);
    for (double& x : v.values().values()) x = 1.0;
    const EmbeddingTable out = Propagate(v, b.p2);
    // mpmath: sqrt(2) + 1/2
    CHECK(std::fabs(out.item(0)[0] - 1.914213562373095049) < 1e-15);
  }

  TEST_CASE("entity with one item mirrors a user with one item") {
    oracle::Instance inst;
    inst.users = 1;
    inst.items = 2;
    inst.entities = 1;
    inst.user_item = {{0, 0}, {0, 1}};
    inst.item_entity = {{0, 0}, {1, 0}};
    inst.entity_kind = {1};
    const Built b = Build(inst, oracle::Settings{});
    EmbeddingTable v(b.layout, 2);
    FillRandom(v, 9);
    for (std::size_t k = 0; k < 2; ++k) v.entity(0)[k] = v.user(0)[k];
    const EmbeddingTable out = Propagate(v, b.p2);
    for (std::size_t k = 0; k < 2; ++k) CHECK(out.entity(0)[k] == out.user(0)[k]);
  }

  TEST_CASE("zero in, zero out and linearity") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const auto inst = oracle::RandomInstance(rng, 14);
      const Built b = Build(inst, RandomSettings(rng));
      for (const PropagationPlan* plan : {&b.p1, &b.p2}) {
        EmbeddingTable zero(b.layout, 3);
        const auto z = Propagate(zero, *plan);
        for (double x : z.values().values()) CHECK(x == 0.0);

        EmbeddingTable x(b.layout, 3), y(b.layout, 3);
        FillRandom(x, rng());
        FillRandom(y, rng());
        EmbeddingTable combo(b.layout, 3);
        for (std::size_t k = 0; k < combo.values().size(); ++k) {
          combo.values().values()[k] =
              1.5 * x.values().values()[k] - 0.25 * y.values().values()[k];
        }
        const auto px = Propagate(x, *plan), py = Propagate(y, *plan);
        const auto pc = Propagate(combo, *plan);
        for (std::size_t k = 0; k < pc.values().size(); ++k) {
          CHECK(std::fabs(pc.values().values()[k] - (1.5 * px.values().values()[k] -
                                                     0.25 * py.values().values()[k])) < 1e-12);
        }
        // Doubling is exact in binary floating point.
        EmbeddingTable twice = x;
        twice.values() *= 2.0;
        const auto layers1 = Forward(x, *plan, 3), layers2 = Forward(twice, *plan, 3);
        for (int l = 0; l <= 3; ++l) {
          for (std::size_t k = 0; k < x.values().size(); ++k) {
            CHECK(layers2[l].values().values()[k] == 2.0 * layers1[l].values().values()[k]);
          }
        }
      }
    }
  }

  TEST_CASE("sparse forward matches the dense oracle") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 60; ++trial) {
      const auto inst = oracle::RandomInstance(rng, 20);
      const auto s = RandomSettings(rng);
      const Built b = Build(inst, s);
      const std::size_t d = 1 + rng() % 4;
      EmbeddingTable v(b.layout, d);
      FillRandom(v, rng());
      const int layers = 1 + static_cast<int>(rng() % 3);
      const auto shape = oracle::ShapeOf(inst, s);
      REQUIRE(shape.N == b.layout.total());
      const auto a1 = oracle::AssembleG1(inst, s);
      const auto a2 = oracle::AssembleG2(inst, s);
      const auto dense1 = oracle::Propagate(a1, ToDense(v), shape.N, d, layers, false);
      const auto dense2 = oracle::Propagate(a2, ToDense(v), shape.N, d, layers, false);
      const auto sparse1 = Forward(v, b.p1, layers).back();
      const auto sparse2 = Forward(v, b.p2, layers).back();
      CHECK(MaxAbsDiff(sparse1.values().values(), dense1) < 1e-12);
      CHECK(MaxAbsDiff(sparse2.values().values(), dense2) < 1e-12);

      const auto mean1 = oracle::Propagate(a1, ToDense(v), shape.N, d, layers, true);
      const auto layers_out = Forward(v, b.p1, layers);
      const auto combined = CombineLayers(layers_out, LayerCombination::kMean);
      CHECK(MaxAbsDiff(combined.values().values(), mean1) < 1e-12);
    }
  }

  TEST_CASE("three layers on a path graph") {
    // u0 - i0 - u1 - i1 - u2
    oracle::Instance inst;
    inst.users = 3;
    inst.items = 2;
    inst.user_item = {{0, 0}, {1, 0}, {1, 1}, {2, 1}};
    oracle::Settings s;
    s.alpha = 0.25;
    const Built b = Build(inst, s);
    EmbeddingTable v(b.layout, 2);
    FillRandom(v, 77);
    const auto dense = oracle::Propagate(oracle::AssembleG1(inst, s), ToDense(v),
                                         b.layout.total(), 2, 3, false);
    CHECK(MaxAbsDiff(Forward(v, b.p1, 3).back().values().values(), dense) < 1e-12);
  }

  TEST_CASE("coefficients are positive and finite") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto inst = oracle::RandomInstance(rng, 16);
      const Built b = Build(inst, RandomSettings(rng));
      for (const PropagationPlan* plan : {&b.p1, &b.p2}) {
        for (std::size_t r = 0; r < b.layout.total(); ++r) {
          const auto c = plan->coefficients(r);
          const auto src = plan->sources(r);
          CHECK(std::is_sorted(src.begin(), src.end()));
          for (double x : c) CHECK((x > 0.0 && std::isfinite(x)));
        }
      }
      // The interaction plan leaves entity rows and columns untouched.
      for (std::size_t e = 0; e < b.layout.num_entities; ++e) {
        CHECK(b.p1.sources(b.layout.entity_row(e)).empty());
      }
      for (std::size_t r = 0; r < b.layout.num_users + b.layout.num_items; ++r) {
        for (auto src : b.p1.sources(r)) CHECK(src < b.layout.num_users + b.layout.num_items);
      }
    }
  }

  TEST_CASE("transpose identity and backward") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const auto inst = oracle::RandomInstance(rng, 18);
      const Built b = Build(inst, RandomSettings(rng));
      for (const PropagationPlan* plan : {&b.p1, &b.p2}) {
        EmbeddingTable x(b.layout, 3), y(b.layout, 3);
        FillRandom(x, rng());
        FillRandom(y, rng());
        EmbeddingTable ax(b.layout, 3), aty(b.layout, 3);
        plan->Apply(x, ax);
        plan->ApplyTranspose(y, aty);
        const double lhs = Dot(ax.values().values(), y.values().values());
        const double rhs = Dot(x.values().values(), aty.values().values());
        CHECK(std::fabs(lhs - rhs) < 1e-12 * std::max(1.0, std::fabs(lhs)));

        // Directional derivative of <Forward_L(V), G> equals <Backward(G), dir>.
        const int layers = 1 + static_cast<int>(rng() % 3);
        const EmbeddingTable grad = Backward(y, *plan, layers);
        const double h = 1e-5;
        EmbeddingTable plus = x, minus = x;
        for (std::size_t k = 0; k < plus.values().size(); ++k) {
          plus.values().values()[k] += h * y.values().values()[k];
          minus.values().values()[k] -= h * y.values().values()[k];
        }
        const double fd = (Dot(Forward(plus, *plan, layers).back().values().values(),
                               y.values().values()) -
                           Dot(Forward(minus, *plan, layers).back().values().values(),
                               y.values().values())) /
                          (2 * h);
        const double analytic = Dot(grad.values().values(), y.values().values());
        CHECK(std::fabs(fd - analytic) <= 1e-6 * std::max(1.0, std::fabs(analytic)));
      }
    }
  }

  TEST_CASE("single isolated node passes gradient through its self term") {
    oracle::Instance inst;
    inst.users = inst.items = 1;
    inst.user_item = {{0, 0}};
    oracle::Settings s;
    const Built b = Build(inst, s);
    EmbeddingTable g(b.layout, 1);
    g.user(0)[0] = 1.0;
    const auto back = Backward(g, b.p1, 1);
    CHECK(back.user(0)[0] == 1.0);  // self coefficient norm(1,1) = 1
    CHECK(back.item(0)[0] == 1.0);  // edge coefficient into the user row
  }

  TEST_CASE("alpha increases incoming coefficients") {
    oracle::Instance inst;
    inst.users = 3;
    inst.items = 3;
    inst.user_item = {{0, 0}, {0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 2}, {2, 0}};
    double previous = 0.0;
    for (double alpha : {0.0, 0.1, 0.2, 0.3, 0.4}) {
      oracle::Settings s;
      s.alpha = alpha;
      const Built b = Build(inst, s);
      std::vector<double> c;
      const auto co = b.p1.coefficients(0);
      if (alpha > 0.0) CHECK(co[0] > previous);
      previous = co[0];
    }
  }

  TEST_CASE("both plans read the shared layer-0 rows") {
    std::mt19937_64 rng(2);
    const auto inst = oracle::RandomInstance(rng, 12);
    const Built b = Build(inst, oracle::Settings{});
    EmbeddingTable v(b.layout, 2);
    FillRandom(v, 1);
    const auto before1 = Propagate(v, b.p1), before2 = Propagate(v, b.p2);
    v.item(0)[0] += 1.0;
    const auto after1 = Propagate(v, b.p1), after2 = Propagate(v, b.p2);
    CHECK_FALSE(before1 == after1);
    CHECK_FALSE(before2 == after2);
  }

  TEST_CASE("reduced interaction branch equals the self-loop LightGCN baseline bitwise") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
      const auto inst = oracle::RandomInstance(rng, 20);
      oracle::Settings s;  // alpha 0, sentiment off
      const Built b = Build(inst, s);
      NodeLayout layout{inst.users, inst.items, 0};
      PlanOptions opts;
      opts.alpha = 0.0;
      const auto plan = PropagationPlan::ForInteractions(
          b.g1, SentimentWeights::Uniform(inst.items), opts);
      EmbeddingTable v(layout, 4);
      FillRandom(v, rng());
      for (int layers = 1; layers <= 3; ++layers) {
        CHECK(Forward(v, plan, layers).back() == SelfLoopLightGcnForward(b.g1, v, layers));
      }
    }
  }

  TEST_CASE("output does not depend on the worker count") {
    std::mt19937_64 rng(6);
    const auto inst = oracle::RandomInstance(rng, 20);
    const Built b = Build(inst, RandomSettings(rng));
    EmbeddingTable v(b.layout, 8);
    FillRandom(v, 3);
    const int saved = NumThreads();
    SetNumThreads(1);
    const auto ref = Forward(v, b.p2, 3).back();
    const auto ref_back = Backward(v, b.p2, 3);
    for (int t : {2, 4, 7}) {
      SetNumThreads(t);
      CHECK(Forward(v, b.p2, 3).back() == ref);
      CHECK(Backward(v, b.p2, 3) == ref_back);
    }
    SetNumThreads(saved);
  }

  TEST_CASE("non-finite input is rejected") {
    oracle::Instance inst;
    inst.users = inst.items = 1;
    inst.user_item = {{0, 0}};
    const Built b = Build(inst, oracle::Settings{});
    EmbeddingTable v(b.layout, 1);
    v.user(0)[0] = NAN;
    try {
      Propagate(v, b.p1);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNonFiniteEmbedding);
    }
    EmbeddingTable wrong(NodeLayout{2, 1, 0}, 1);
    CHECK_THROWS_AS(Propagate(wrong, b.p1), Error);
  }

  TEST_CASE("mean-combined backward matches finite differences") {
    std::mt19937_64 rng(12);
    const auto inst = oracle::RandomInstance(rng, 12);
    oracle::Settings s;
    s.self_loops = false;
    const Built b = Build(inst, s);
    EmbeddingTable x(b.layout, 2), y(b.layout, 2);
    FillRandom(x, 4);
    FillRandom(y, 5);
    const auto grad = BackwardCombined(y, b.p1, 3, LayerCombination::kMean);
    auto f = [&](const EmbeddingTable& in) {
      const auto layers = Forward(in, b.p1, 3);
      return Dot(CombineLayers(layers, LayerCombination::kMean).values().values(),
                 y.values().values());
    };
    // f is linear, so the gradient is exactly the coefficient vector.
    for (std::size_t k = 0; k < x.values().size(); ++k) {
      EmbeddingTable e(b.layout, 2);
      e.values().values()[k] = 1.0;
      CHECK(std::fabs(f(e) - grad.values().values()[k]) < 1e-12);
    }
  }
}

}  // namespace
}  // namespace megcf
