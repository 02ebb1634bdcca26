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


#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "megcf/checkpoint.h"
#include "megcf/cli.h"
#include "megcf/config.h"
#include "megcf/ingestion.h"
#include "megcf/report.h"
#include "test_util.h"

namespace megcf {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Run(std::vector<std::string> args) {
  args.insert(args.begin(), "megcf");
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kQuick = {"--dim", "8", "--layers", "1", "--epochs", "2",
                                         "--batch-size", "128", "--negatives", "20", "--ks",
                                         "5,10"};

std::vector<std::string> With(std::vector<std::string> head,
                              const std::vector<std::string>& tail = kQuick) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

// One tiny dataset shared by the cases below.
const testing::TempDir& Data() {
  static const testing::TempDir dir = [] {
    testing::TempDir d;
    const auto r = Run({"synth", "--out", (d / "data").string(), "--users", "60", "--items",
                        "50", "--entities", "10", "--density", "0.15", "-q"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::string DataDir() { return (Data() / "data").string(); }

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    const auto help = Run({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("synth") != std::string::npos);
    CHECK(Run({"train", "--help"}).code == kExitOk);
    CHECK(Run({}).code == kExitUsage);
    CHECK(Run({"train", "--data", "x", "--out", "y", "--bogus"}).code == kExitUsage);
    CHECK(Run({"synth", "--out", "x"}).code == kExitUsage);
    CHECK(Run({"frobnicate"}).code == kExitUsage);
  }

  TEST_CASE("synth writes a dataset and a manifest") {
    const auto raw = LoadDataset(DataDir());
    CHECK(raw.has_sentiments);
    CHECK_FALSE(raw.item_entities.empty());
    const auto manifest =
        nlohmann::json::parse(ReadFile(std::filesystem::path(DataDir()) / "manifest.json"));
    CHECK(manifest.at("spec").at("users") == 60);
    CHECK(manifest.at("interactions") == raw.interactions.size());
  }

  TEST_CASE("infeasible synth specs exit with a data error") {
    testing::TempDir dir;
    const auto r = Run({"synth", "--out", (dir / "d").string(), "--users", "500", "--items",
                        "300", "--entities", "60", "--density", "0.01"});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("InfeasibleSpec") != std::string::npos);
  }

  TEST_CASE("train writes its artifacts and eval reproduces them") {
    testing::TempDir dir;
    const std::string out = (dir / "run").string();
    const auto r = Run(With({"train", "--data", DataDir(), "--out", out, "-q"}));
    REQUIRE(r.code == kExitOk);
    for (const char* f : {"effective.ini", "split.tsv", "train_log.jsonl", "model.ckpt",
                          "metrics.jsonl", "manifest.json"}) {
      CHECK(std::filesystem::exists(dir / "run" / f));
    }
    const auto manifest = nlohmann::json::parse(ReadFile(dir / "run" / "manifest.json"));
    CHECK(manifest.at("config").at("model").at("dim") == 8);
    CHECK(manifest.at("config").at("eval").at("ks") == std::vector<int>{5, 10});
    CHECK(ParseConfigText(manifest.at("config_text").get<std::string>()) ==
          ParseConfigText(ReadFile(dir / "run" / "effective.ini")));

    const auto e = Run({"eval", "--checkpoint", out + "/model.ckpt", "--json"});
    REQUIRE(e.code == kExitOk);
    auto from_train = ParseMetricRecords(ReadFile(dir / "run" / "metrics.jsonl"));
    auto from_eval = ParseMetricRecords(e.out);
    REQUIRE(from_train.size() == from_eval.size());
    for (std::size_t k = 0; k < from_train.size(); ++k) {
      CHECK(from_train[k].value == from_eval[k].value);
    }

    const auto split = Run({"eval", "--checkpoint", out + "/model.ckpt", "--split",
                            out + "/split.tsv", "--metrics-out", (dir / "m.jsonl").string()});
    CHECK(split.code == kExitOk);
    CHECK(split.out.find("NDCG@10") != std::string::npos);
    CHECK(ParseMetricRecords(ReadFile(dir / "m.jsonl")).size() == from_eval.size());

    const auto val = Run({"eval", "--checkpoint", out + "/model.ckpt", "--target",
                          "validation", "--json"});
    CHECK(val.code == kExitOk);

    const auto wrong = Run({"eval", "--checkpoint", out + "/model.ckpt", "--dim", "16"});
    CHECK(wrong.code == kExitData);
    CHECK(wrong.err.find("ShapeMismatch") != std::string::npos);
    CHECK(Run({"eval", "--checkpoint", (dir / "missing.ckpt").string()}).code == kExitData);
  }

  TEST_CASE("training is reproducible") {
    testing::TempDir dir;
    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(Run(With({"train", "--data", DataDir(), "--out", a, "-q"})).code == 0);
    REQUIRE(Run(With({"train", "--data", DataDir(), "--out", b, "-q"})).code == 0);
    CHECK(ReadFile(dir / "a" / "model.ckpt") == ReadFile(dir / "b" / "model.ckpt"));
    CHECK(ReadFile(dir / "a" / "metrics.jsonl") == ReadFile(dir / "b" / "metrics.jsonl"));
  }

  TEST_CASE("flags override the config file, which overrides defaults") {
    testing::TempDir dir;
    WriteFile(dir / "c.ini", "[model]\ndim = 4\nlayers = 2\n[ablation]\nuse_pn = false\n");
    const std::string out = (dir / "run").string();
    REQUIRE(Run(With({"train", "--data", DataDir(), "--out", out, "--config",
                      (dir / "c.ini").string(), "-q", "--dim", "6"},
                     {"--epochs", "1", "--negatives", "20"}))
                .code == kExitOk);
    const auto c = ParseConfigText(ReadFile(dir / "run" / "effective.ini"));
    CHECK(c.train.dim == 6);
    CHECK(c.train.layers == 2);
    CHECK_FALSE(c.train.flags.use_pn);
    CHECK(c.train.epochs == 1);

    WriteFile(dir / "bad.ini", "[model]\ndepth = 2\n");
    CHECK(Run({"train", "--data", DataDir(), "--out", out, "--config",
               (dir / "bad.ini").string()})
              .code == kExitUsage);
  }

  TEST_CASE("variant presets combine with explicit switches") {
    testing::TempDir dir;
    const std::string out = (dir / "run").string();
    REQUIRE(Run(With({"train", "--data", DataDir(), "--out", out, "-q", "--variant", "wo_s",
                      "--no-visual"}))
                .code == kExitOk);
    const auto c = ParseConfigText(ReadFile(dir / "run" / "effective.ini"));
    CHECK_FALSE(c.train.flags.use_sentiment);
    CHECK_FALSE(c.train.flags.use_visual);
    CHECK(c.train.flags.use_textual);
    CHECK(Run(With({"train", "--data", DataDir(), "--out", out, "--variant", "nope"})).code ==
          kExitUsage);
    CHECK(Run(With({"train", "--data", DataDir(), "--out", out, "--no-g1", "--no-g2"})).code ==
          kExitUsage);
  }

  TEST_CASE("missing data directories are data errors") {
    testing::TempDir dir;
    CHECK(Run(With({"train", "--data", (dir / "none").string(), "--out",
                    (dir / "o").string()}))
              .code == kExitData);
  }

  TEST_CASE("ablate and report") {
    testing::TempDir dir;
    const std::string out = (dir / "abl").string();
    const auto r = Run(With({"ablate", "--data", DataDir(), "--out", out, "--seeds", "1,2",
                             "--variants", "full,wo_s", "-q"}));
    REQUIRE(r.code == kExitOk);
    const auto records = ParseMetricRecords(ReadFile(dir / "abl" / "metrics.jsonl"));
    CHECK(records.size() == 2 * 2 * 4);
    CHECK(VariantsOf(records).size() == 2);
    CHECK(SeedsOf(records, VariantsOf(records)[1]) == std::vector<std::uint64_t>{1, 2});
    CHECK(std::filesystem::exists(dir / "abl" / "report.txt"));
    CHECK(r.out.find("±") != std::string::npos);

    const auto rep = Run({"report", out + "/metrics.jsonl", "--ks", "5,10", "--per-seed",
                          "hr@5"});
    CHECK(rep.code == kExitOk);
    CHECK(rep.out.find("seed 2") != std::string::npos);
    CHECK(rep.out.find("HR@5") != std::string::npos);
    CHECK(Run({"report", (dir / "none.jsonl").string()}).code == kExitData);
    CHECK(Run({"report", out + "/metrics.jsonl", "--per-seed", "mrr"}).code == kExitUsage);
  }

  TEST_CASE("parallel seeds give the same records") {
    testing::TempDir dir;
    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(Run(With({"ablate", "--data", DataDir(), "--out", a, "--seeds", "3,4", "-q"}))
                .code == 0);
    REQUIRE(Run(With({"ablate", "--data", DataDir(), "--out", b, "--seeds", "3,4",
                      "--parallel-seeds", "-q"}))
                .code == 0);
    CHECK(ReadFile(dir / "a" / "metrics.jsonl") == ReadFile(dir / "b" / "metrics.jsonl"));
  }
}

}  // namespace
}  // namespace megcf
