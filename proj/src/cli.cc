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


#include "megcf/cli.h"

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "megcf/checkpoint.h"
#include "megcf/common.h"
#include "megcf/config.h"
#include "megcf/experiment.h"
#include "megcf/ingestion.h"
#include "megcf/report.h"
#include "megcf/synthetic.h"

namespace megcf {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::string_view kCheckpointFile = "model.ckpt";
constexpr std::string_view kSplitFile = "split.tsv";
constexpr std::string_view kTrainLogFile = "train_log.jsonl";
constexpr std::string_view kMetricsFile = "metrics.jsonl";
constexpr std::string_view kEffectiveConfigFile = "effective.ini";
constexpr std::string_view kReportFile = "report.txt";

// Routes spdlog to the caller's error stream for the lifetime of one command.
class LogRedirect {
 public:
  LogRedirect(std::ostream& err, bool verbose, bool quiet)
      : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto logger = std::make_shared<spdlog::logger>("megcf", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(quiet ? spdlog::level::warn
                            : verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_default_logger(logger);
  }
  ~LogRedirect() { spdlog::set_default_logger(previous_); }

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

int ExitCodeFor(const Error& e) {
  if (e.IsNumerical()) return kExitNumerical;
  if (e.code() == ErrorCode::kInvalidConfig) return kExitUsage;
  return kExitData;
}

// Command-line switches that map onto the experiment config. Ablation
// switches only ever turn components off.
struct ConfigFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> variant;
  std::optional<std::string> model;
  std::optional<std::string> ks;
  bool no_sentiment = false;
  bool no_entities = false;
  bool no_visual = false;
  bool no_textual = false;
  bool no_pn = false;
  bool no_g1 = false;
  bool no_g2 = false;
  bool no_l1 = false;
  bool no_l2 = false;
};

// Looks ahead for --config so flags can override the file.
std::optional<std::string> FindConfigPath(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void AddConfigOptions(CLI::App* cmd, ExperimentConfig& c, ConfigFlags& f) {
  TrainConfig& t = c.train;
  cmd->add_option("--config", f.config_path, "sectioned key = value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--variant", f.variant, "ablation preset (full, wo_vt, wo_s, ...)");
  cmd->add_option("--model", f.model, "megcf | bprmf | lightgcn");
  cmd->add_option("--dim", t.dim, "embedding size");
  cmd->add_option("--layers", t.layers, "propagation depth L");
  cmd->add_option("--alpha", t.alpha, "popularity-aware norm exponent; 0 disables");
  cmd->add_option("--gamma", t.gamma, "sentiment smoothing exponent");
  cmd->add_option("--lr", t.learning_rate, "Adam learning rate");
  cmd->add_option("--lambda1", t.lambda1, "g1 regularization");
  cmd->add_option("--lambda2", t.lambda2, "g2 regularization");
  cmd->add_flag("--reg-layer0", t.regularize_layer0, "regularize layer-0 rows");
  cmd->add_option("--batch-size", t.batch_size, "triplets per step");
  cmd->add_option("--epochs", t.epochs, "maximum epochs");
  cmd->add_option("--patience", t.patience, "early stopping patience in epochs");
  cmd->add_option("--eval-every", t.eval_every, "epochs between validation passes");
  cmd->add_option("--seed", t.seed, "training seed");
  cmd->add_option("--split-seed", c.split_seed, "split seed (defaults to --seed)");
  cmd->add_option("--negatives", c.num_negatives, "sampled negatives per user");
  cmd->add_option("--ks", f.ks, "comma-separated cutoffs, default 5,10,20");
  cmd->add_flag("--no-sentiment", f.no_sentiment, "w/o S");
  cmd->add_flag("--no-entities", f.no_entities, "w/o V&T");
  cmd->add_flag("--no-visual", f.no_visual, "w/o V");
  cmd->add_flag("--no-textual", f.no_textual, "w/o T");
  cmd->add_flag("--no-pn", f.no_pn, "w/o PN");
  cmd->add_flag("--no-g1", f.no_g1, "drop the interaction-graph branch");
  cmd->add_flag("--no-g2", f.no_g2, "drop the entity-graph branch");
  cmd->add_flag("--no-l1", f.no_l1, "drop the g1 loss");
  cmd->add_flag("--no-l2", f.no_l2, "drop the g2 loss");
}

void ApplyConfigFlags(ExperimentConfig& c, const ConfigFlags& f) {
  if (f.model) c.train.model = ParseModelKind(*f.model);
  if (f.ks) c.ks = ParseKs(*f.ks);
  if (f.variant) c.train = ApplyVariant(*f.variant, c.train);
  AblationFlags& a = c.train.flags;
  if (f.no_sentiment) a.use_sentiment = false;
  if (f.no_entities || f.no_visual) a.use_visual = false;
  if (f.no_entities || f.no_textual) a.use_textual = false;
  if (f.no_pn) a.use_pn = false;
  if (f.no_g1) a.use_g1_branch = a.use_g1_loss = false;
  if (f.no_g2) a.use_g2_branch = a.use_g2_loss = false;
  if (f.no_l1) a.use_g1_loss = false;
  if (f.no_l2) a.use_g2_loss = false;
  c.Validate();
}

IndexedDataset LoadIndexed(const fs::path& dir, bool filter) {
  RawDataset raw = LoadDataset(dir);
  if (filter) raw = FiveCoreFilter(raw);
  IndexedDataset data = RemapIds(raw);
  spdlog::info("dataset {}: {} users, {} items, {} entities, {} interactions",
               dir.string(), data.num_users(), data.num_items(),
               data.num_entities(), data.interactions.size());
  return data;
}

std::string MetricsTable(const MetricSet& m) {
  std::ostringstream os;
  std::vector<MetricRecord> records = ToRecords("model", 0, m);
  os << FormatSummaryTable(records, m.ks);
  return os.str();
}

ordered_json ManifestBase(std::string_view command, const ExperimentConfig& config) {
  ordered_json j;
  j["command"] = command;
  j["config"] = ToJson(config);
  j["config_text"] = FormatConfigText(config);
  return j;
}

void WriteManifest(const fs::path& dir, const ordered_json& manifest) {
  WriteFile(dir / kManifestFile, manifest.dump(2) + "\n");
}

int CmdSynth(const SyntheticSpec& spec, const fs::path& out_dir, std::ostream& out) {
  const RawDataset raw = GenerateSynthetic(spec);
  SaveDataset(out_dir, raw);
  ordered_json manifest;
  manifest["command"] = "synth";
  manifest["spec"] = nlohmann::ordered_json::parse(SyntheticSpecJson(spec));
  const IndexedDataset data = RemapIds(raw);
  manifest["users"] = data.num_users();
  manifest["items"] = data.num_items();
  manifest["entities"] = data.num_entities();
  manifest["interactions"] = data.interactions.size();
  manifest["density"] = static_cast<double>(data.interactions.size()) /
                        static_cast<double>(data.num_users() * data.num_items());
  WriteManifest(out_dir, manifest);
  out << "wrote " << out_dir.string() << ": " << data.num_users() << " users, "
      << data.num_items() << " items, " << data.num_entities() << " entities, "
      << data.interactions.size() << " interactions\n";
  return kExitOk;
}

int CmdTrain(const ExperimentConfig& config, const fs::path& data_dir,
             const fs::path& out_dir, bool filter, std::ostream& out) {
  const IndexedDataset data = LoadIndexed(data_dir, filter);
  const EvalSplit split = MakeExperimentSplit(data, config);
  fs::create_directories(out_dir);
  WriteFile(out_dir / kEffectiveConfigFile, FormatConfigText(config));
  WriteFile(out_dir / kSplitFile, FormatSplit(split));

  std::string log;
  RunOptions options;
  Checkpoint checkpoint;
  options.checkpoint = &checkpoint;
  options.on_epoch = [&log](const EpochRecord& r) {
    log += EpochRecordJson(r) + "\n";
    if (r.validation_ndcg10) {
      spdlog::debug("epoch {} loss {:.6f} val ndcg@10 {:.4f}", r.epoch, r.loss,
                    *r.validation_ndcg10);
    } else {
      spdlog::debug("epoch {} loss {:.6f}", r.epoch, r.loss);
    }
  };
  RunResult result = TrainAndEvaluate(data, split, config, options);
  WriteFile(out_dir / kTrainLogFile, log);
  SaveCheckpoint(out_dir / kCheckpointFile, checkpoint);
  const std::string variant = "train";
  WriteFile(out_dir / kMetricsFile,
            FormatMetricRecords(ToRecords(variant, config.train.seed, result.test)));

  ordered_json manifest = ManifestBase("train", config);
  manifest["data"] = data_dir.string();
  manifest["five_core_filter"] = filter;
  manifest["users"] = data.num_users();
  manifest["items"] = data.num_items();
  manifest["entities"] = data.num_entities();
  manifest["epochs_run"] = result.fit.epochs_run;
  manifest["best_epoch"] = result.fit.best_epoch;
  manifest["stopped_early"] = result.fit.stopped_early;
  WriteManifest(out_dir, manifest);

  out << "trained " << result.fit.epochs_run << " epochs (best " << result.fit.best_epoch
      << "), checkpoint " << (out_dir / kCheckpointFile).string() << "\n";
  out << MetricsTable(result.test);
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::optional<std::string> split;
  std::optional<std::string> metrics_out;
  std::optional<std::string> config_path;
  std::optional<std::string> ks;
  std::optional<int> dim;
  std::string target = "test";
  bool json = false;
};

int CmdEval(const EvalArgs& args, std::ostream& out) {
  const Checkpoint ck = LoadCheckpoint(args.checkpoint);
  ExperimentConfig config = ck.config;
  if (args.config_path) config = LoadConfigFile(*args.config_path, config);
  if (args.dim) config.train.dim = *args.dim;
  if (args.ks) config.ks = ParseKs(*args.ks);
  config.Validate();
  const Model model = RestoreModel(ck, config.train);
  const EvalSplit split = args.split ? ParseSplit(ReadFile(*args.split), *args.split)
                                     : ck.split;
  if (split.num_users() != ck.split.num_users() || split.num_items != ck.split.num_items) {
    Fail(ErrorCode::kShapeMismatch, "split does not match the checkpoint graph");
  }
  const EvalTarget target = args.target == "validation" ? EvalTarget::kValidation
                                                         : EvalTarget::kTest;
  const ForwardPass pass = model.Forward();
  const MetricSet metrics = Evaluate(split, target, model.Scorer(pass), config.ks);
  const auto records = ToRecords("eval", config.train.seed, metrics);
  const std::string jsonl = FormatMetricRecords(records);
  if (args.metrics_out) WriteFile(*args.metrics_out, jsonl);
  if (args.json) {
    out << jsonl;
  } else {
    out << MetricsTable(metrics);
  }
  return kExitOk;
}

int WorstExit(const std::vector<RunResult>& runs) {
  int code = kExitOk;
  for (const auto& r : runs) {
    if (r.ok()) continue;
    const Error e(*r.error, r.error_message);
    code = std::max(code, ExitCodeFor(e));
  }
  return code;
}

std::string ComparisonReport(const std::vector<MetricRecord>& records,
                             const std::vector<int>& ks) {
  std::string text = FormatSummaryTable(records, ks);
  const auto variants = VariantsOf(records);
  bool multi_seed = false;
  for (const auto& v : variants) multi_seed = multi_seed || SeedsOf(records, v).size() > 1;
  if (multi_seed && std::find(ks.begin(), ks.end(), 10) != ks.end()) {
    text += "\n" + FormatPerSeedTable(records, "ndcg", 10);
    text += "\n" + FormatPerSeedTable(records, "hr", 10);
    if (variants.size() >= 2) {
      const auto ref = SeriesOf(records, variants[0], "ndcg", 10);
      text += "\npaired t-test on NDCG@10 against " + variants[0] + ":\n";
      for (std::size_t v = 1; v < variants.size(); ++v) {
        const auto other = SeriesOf(records, variants[v], "ndcg", 10);
        if (other.size() != ref.size() || ref.size() < 2) continue;
        const PairedTest t = PairedTTest(ref, other);
        char line[256];
        std::snprintf(line, sizeof(line), "  %-12s diff %+.4f  t %+.3f  p %.4f\n",
                      variants[v].c_str(), t.mean_difference, t.t, t.p_value);
        text += line;
      }
    }
  }
  return text;
}

struct AblateArgs {
  std::string data;
  std::string out;
  std::string seeds = "1";
  std::string variants = "full";
  bool parallel = false;
  bool no_filter = false;
};

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) Fail(ErrorCode::kInvalidConfig, "empty list '" + text + "'");
  return out;
}

int CmdAblate(const ExperimentConfig& config, const AblateArgs& args, std::ostream& out) {
  const IndexedDataset data = LoadIndexed(args.data, !args.no_filter);
  AblationOptions options;
  options.base = config;
  options.variants = SplitList(args.variants);
  for (auto& v : options.variants) v = CanonicalVariantId(v);
  options.seeds.clear();
  for (const auto& s : SplitList(args.seeds)) {
    try {
      options.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidConfig, "bad seed '" + s + "'");
    }
  }
  options.parallel_seeds = args.parallel;
  options.on_result = [](const RunResult& r) {
    if (r.ok()) {
      const int k = r.test.ks.empty() ? 0 : r.test.ks.back();
      spdlog::info("{} seed {}: NDCG@{} {:.4f} after {} epochs", r.variant, r.seed, k,
                   k == 0 ? 0.0 : r.test.ndcg_at(k), r.fit.epochs_run);
    }
  };
  const std::vector<RunResult> runs = RunAblation(data, options);
  const auto records = RecordsOf(runs);
  const std::string report = ComparisonReport(records, config.ks);

  fs::create_directories(args.out);
  WriteFile(fs::path(args.out) / kMetricsFile, FormatMetricRecords(records));
  WriteFile(fs::path(args.out) / kReportFile, report);
  WriteFile(fs::path(args.out) / kEffectiveConfigFile, FormatConfigText(config));
  ordered_json manifest = ManifestBase("ablate", config);
  manifest["data"] = args.data;
  manifest["variants"] = options.variants;
  manifest["seeds"] = options.seeds;
  manifest["parallel_seeds"] = args.parallel;
  ordered_json failures = ordered_json::array();
  for (const auto& r : runs) {
    if (!r.ok()) failures.push_back({{"variant", r.variant}, {"seed", r.seed},
                                     {"error", r.error_message}});
  }
  manifest["failures"] = failures;
  WriteManifest(args.out, manifest);
  out << report;
  return WorstExit(runs);
}

struct ReportArgs {
  std::vector<std::string> metrics;
  std::string ks = "5,10,20";
  std::optional<std::string> per_seed;
};

int CmdReport(const ReportArgs& args, std::ostream& out) {
  std::vector<MetricRecord> records;
  for (const auto& path : args.metrics) {
    auto more = ParseMetricRecords(ReadFile(path));
    records.insert(records.end(), more.begin(), more.end());
  }
  const std::vector<int> ks = ParseKs(args.ks);
  out << ComparisonReport(records, ks);
  if (args.per_seed) {
    const auto at = args.per_seed->find('@');
    if (at == std::string::npos) {
      Fail(ErrorCode::kInvalidConfig, "--per-seed expects metric@k, e.g. ndcg@10");
    }
    const std::string metric = args.per_seed->substr(0, at);
    const int k = ParseKs(args.per_seed->substr(at + 1)).at(0);
    out << "\n" << FormatPerSeedTable(records, metric, k);
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MEGCF recommender: synthetic data, training, evaluation and ablations",
               "megcf"};
  app.require_subcommand(1);
  app.fallthrough(true);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "per-epoch logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  ExperimentConfig config;
  const auto config_path = FindConfigPath(args);

  // synth
  SyntheticSpec spec;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "write a planted-structure dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--users", spec.num_users, "number of users")->required();
  synth->add_option("--items", spec.num_items, "number of items")->required();
  synth->add_option("--entities", spec.num_entities, "number of entities")->required();
  synth->add_option("--latent-dim", spec.latent_dim, "latent factor size");
  synth->add_option("--entity-signal", spec.entity_signal, "entity signal strength in [0,1]");
  synth->add_option("--sentiment-signal", spec.sentiment_signal,
                    "sentiment signal strength in [0,1]");
  synth->add_option("--density", spec.target_density, "target interaction density");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--entities-per-item", spec.entities_per_item, "entities per item");
  synth->add_option("--favorite-entities", spec.favorite_entities,
                    "preferred entities per user");
  synth->add_option("--visual-fraction", spec.visual_fraction,
                    "share of entities that are visual");
  synth->add_option("--affinity-scale", spec.affinity_scale, "user-item affinity sharpness");
  synth->add_option("--quality-scale", spec.quality_scale, "weight of item quality");
  synth->add_option("--item-noise", spec.item_noise, "item factor spread around its entities");
  synth->add_option("--user-noise", spec.user_noise, "user factor spread around its favorites");

  // train
  ConfigFlags train_flags;
  std::string train_data, train_out;
  bool train_no_filter = false;
  CLI::App* train = app.add_subcommand("train", "train one model and evaluate it");
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_flag("--no-filter", train_no_filter, "skip 5-core filtering");
  AddConfigOptions(train, config, train_flags);

  // eval
  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")
      ->required();
  eval->add_option("--split", eval_args.split, "split file (default: the stored split)");
  eval->add_option("--metrics-out", eval_args.metrics_out, "write JSONL metrics here");
  eval->add_option("--config", eval_args.config_path, "override the stored config");
  eval->add_option("--dim", eval_args.dim, "override the embedding size");
  eval->add_option("--ks", eval_args.ks, "comma-separated cutoffs");
  eval->add_option("--target", eval_args.target, "test | validation")
      ->check(CLI::IsMember({"test", "validation"}));
  eval->add_flag("--json", eval_args.json, "print JSONL instead of a table");

  // ablate
  ConfigFlags ablate_flags;
  AblateArgs ablate_args;
  CLI::App* ablate = app.add_subcommand("ablate", "train variants across seeds");
  ablate->add_option("--data", ablate_args.data, "dataset directory")->required();
  ablate->add_option("--out", ablate_args.out, "output directory")->required();
  ablate->add_option("--seeds", ablate_args.seeds, "comma-separated seeds")->required();
  ablate->add_option("--variants", ablate_args.variants, "comma-separated variant ids");
  ablate->add_flag("--parallel-seeds", ablate_args.parallel, "run seeds concurrently");
  ablate->add_flag("--no-filter", ablate_args.no_filter, "skip 5-core filtering");
  AddConfigOptions(ablate, config, ablate_flags);

  // report
  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "tabulate JSONL metric files");
  report->add_option("metrics", report_args.metrics, "metrics.jsonl files")
      ->required();
  report->add_option("--ks", report_args.ks, "comma-separated cutoffs");
  report->add_option("--per-seed", report_args.per_seed, "extra per-seed table, e.g. ndcg@10");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    if (config_path) config = LoadConfigFile(*config_path, config);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return ExitCodeFor(e);
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  LogRedirect redirect(err, verbose, quiet);
  try {
    if (synth->parsed()) return CmdSynth(spec, synth_out, out);
    if (train->parsed()) {
      ApplyConfigFlags(config, train_flags);
      return CmdTrain(config, train_data, train_out, !train_no_filter, out);
    }
    if (eval->parsed()) return CmdEval(eval_args, out);
    if (ablate->parsed()) {
      ApplyConfigFlags(config, ablate_flags);
      return CmdAblate(config, ablate_args, out);
    }
    if (report->parsed()) return CmdReport(report_args, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace megcf
