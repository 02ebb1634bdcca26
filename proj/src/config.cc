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


#include "megcf/config.h"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "megcf/common.h"
#include "megcf/ingestion.h"

namespace megcf {
namespace {

using nlohmann::json;

[[noreturn]] void Invalid(const std::string& message) {
  Fail(ErrorCode::kInvalidConfig, message);
}

template <typename T>
T ParseNumber(std::string_view text, std::string_view key) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    Invalid("bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

bool ParseBool(std::string_view text, std::string_view key) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return true;
  if (lower == "false" || lower == "0" || lower == "no" || lower == "off") return false;
  Invalid("bad boolean '" + std::string(text) + "' for " + std::string(key));
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Per-type conversions between config values, INI text and JSON.
template <typename T>
struct Codec;

template <>
struct Codec<double> {
  static std::string Text(double v) { return FormatDouble(v); }
  static double FromText(std::string_view s, std::string_view key) {
    return ParseNumber<double>(s, key);
  }
  static json Json(double v) { return v; }
  static double FromJson(const json& j) { return j.get<double>(); }
};

template <>
struct Codec<bool> {
  static std::string Text(bool v) { return v ? "true" : "false"; }
  static bool FromText(std::string_view s, std::string_view key) {
    return ParseBool(s, key);
  }
  static json Json(bool v) { return v; }
  static bool FromJson(const json& j) { return j.get<bool>(); }
};

template <typename T>
  requires std::is_integral_v<T>
struct Codec<T> {
  static std::string Text(T v) { return std::to_string(v); }
  static T FromText(std::string_view s, std::string_view key) {
    return ParseNumber<T>(s, key);
  }
  static json Json(T v) { return v; }
  static T FromJson(const json& j) { return j.get<T>(); }
};

template <>
struct Codec<ModelKind> {
  static std::string Text(ModelKind v) { return std::string(ModelKindName(v)); }
  static ModelKind FromText(std::string_view s, std::string_view) {
    return ParseModelKind(s);
  }
  static json Json(ModelKind v) { return Text(v); }
  static ModelKind FromJson(const json& j) {
    return ParseModelKind(j.get<std::string>());
  }
};

template <>
struct Codec<std::vector<int>> {
  static std::string Text(const std::vector<int>& v) { return FormatKs(v); }
  static std::vector<int> FromText(std::string_view s, std::string_view) {
    return ParseKs(s);
  }
  static json Json(const std::vector<int>& v) { return v; }
  static std::vector<int> FromJson(const json& j) {
    return j.get<std::vector<int>>();
  }
};

template <>
struct Codec<std::optional<std::uint64_t>> {
  using Value = std::optional<std::uint64_t>;
  static std::string Text(const Value& v) {
    return v ? std::to_string(*v) : "";
  }
  static Value FromText(std::string_view s, std::string_view key) {
    if (s.empty()) return std::nullopt;
    return ParseNumber<std::uint64_t>(s, key);
  }
  static json Json(const Value& v) { return v ? json(*v) : json(nullptr); }
  static Value FromJson(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::uint64_t>();
  }
};

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> text;
  std::function<void(ExperimentConfig&, std::string_view)> set_text;
  std::function<json(const ExperimentConfig&)> to_json;
  std::function<void(ExperimentConfig&, const json&)> set_json;
};

template <typename Access>
Field MakeField(std::string section, std::string key, Access access) {
  using T = std::remove_cvref_t<decltype(access(std::declval<ExperimentConfig&>()))>;
  Field f;
  f.section = std::move(section);
  f.key = key;
  f.text = [access](const ExperimentConfig& c) {
    return Codec<T>::Text(access(const_cast<ExperimentConfig&>(c)));
  };
  f.set_text = [access, key](ExperimentConfig& c, std::string_view s) {
    access(c) = Codec<T>::FromText(s, key);
  };
  f.to_json = [access](const ExperimentConfig& c) {
    return Codec<T>::Json(access(const_cast<ExperimentConfig&>(c)));
  };
  f.set_json = [access, key](ExperimentConfig& c, const json& j) {
    try {
      access(c) = Codec<T>::FromJson(j);
    } catch (const json::exception& e) {
      Invalid("bad JSON value for " + key + ": " + e.what());
    }
  };
  return f;
}

#define MEGCF_FIELD(section, member) \
  MakeField(section, #member, [](ExperimentConfig& c) -> auto& { return c.train.member; })
#define MEGCF_FLAG(member) \
  MakeField("ablation", #member, [](ExperimentConfig& c) -> auto& { return c.train.flags.member; })

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      MEGCF_FIELD("model", model),
      MEGCF_FIELD("model", dim),
      MEGCF_FIELD("model", layers),
      MEGCF_FIELD("model", alpha),
      MEGCF_FIELD("model", gamma),
      MEGCF_FIELD("train", learning_rate),
      MEGCF_FIELD("train", lambda1),
      MEGCF_FIELD("train", lambda2),
      MEGCF_FIELD("train", regularize_layer0),
      MEGCF_FIELD("train", batch_size),
      MEGCF_FIELD("train", epochs),
      MEGCF_FIELD("train", patience),
      MEGCF_FIELD("train", eval_every),
      MEGCF_FIELD("train", seed),
      MEGCF_FIELD("train", beta1),
      MEGCF_FIELD("train", beta2),
      MEGCF_FIELD("train", epsilon),
      MEGCF_FLAG(use_g1_loss),
      MEGCF_FLAG(use_g2_loss),
      MEGCF_FLAG(use_sentiment),
      MEGCF_FLAG(use_pn),
      MEGCF_FLAG(use_visual),
      MEGCF_FLAG(use_textual),
      MEGCF_FLAG(use_g1_branch),
      MEGCF_FLAG(use_g2_branch),
      MakeField("eval", "ks", [](ExperimentConfig& c) -> auto& { return c.ks; }),
      MakeField("eval", "num_negatives",
                [](ExperimentConfig& c) -> auto& { return c.num_negatives; }),
      MakeField("eval", "split_seed",
                [](ExperimentConfig& c) -> auto& { return c.split_seed; }),
  };
  return fields;
}

#undef MEGCF_FIELD
#undef MEGCF_FLAG

const Field* FindField(std::string_view section, std::string_view key) {
  for (const Field& f : Fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

json SectionedJson(const ExperimentConfig& config, bool with_eval) {
  json j = json::object();
  for (const Field& f : Fields()) {
    if (!with_eval && f.section == "eval") continue;
    j[f.section][f.key] = f.to_json(config);
  }
  return j;
}

void ApplySectionedJson(const json& j, ExperimentConfig& config, bool with_eval) {
  if (!j.is_object()) Invalid("config JSON must be an object");
  for (const auto& [section, entries] : j.items()) {
    if (!entries.is_object()) Invalid("config section '" + section + "' must be an object");
    if (!with_eval && section == "eval") Invalid("unexpected section 'eval'");
    for (const auto& [key, value] : entries.items()) {
      const Field* f = FindField(section, key);
      if (f == nullptr) Invalid("unknown config key " + section + "." + key);
      f->set_json(config, value);
    }
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  train.Validate();
  if (ks.empty()) Invalid("at least one k is required");
  for (int k : ks) {
    if (k < 1) Invalid("k must be positive");
  }
  if (num_negatives < 1) Invalid("num_negatives must be positive");
}

json ToJson(const TrainConfig& config) {
  ExperimentConfig e;
  e.train = config;
  return SectionedJson(e, false);
}

json ToJson(const ExperimentConfig& config) { return SectionedJson(config, true); }

TrainConfig TrainConfigFromJson(const json& j) {
  ExperimentConfig e;
  ApplySectionedJson(j, e, false);
  return e.train;
}

ExperimentConfig ExperimentConfigFromJson(const json& j) {
  ExperimentConfig e;
  ApplySectionedJson(j, e, true);
  return e;
}

ExperimentConfig ParseConfigText(std::string_view text, const ExperimentConfig& base) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    Invalid("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig config = base;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) Invalid("config key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : entries) {
      const Field* f = FindField(section, key);
      if (f == nullptr) Invalid("unknown config key " + section + "." + key);
      f->set_text(config, value.data());
    }
  }
  return config;
}

ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                const ExperimentConfig& base) {
  return ParseConfigText(ReadFile(path), base);
}

std::string FormatConfigText(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.text(config) + "\n";
  }
  return out;
}

const std::vector<Variant>& KnownVariants() {
  static const std::vector<Variant> variants = {
      {"full", "MEGCF"},
      {"wo_v", "w/o V"},
      {"wo_t", "w/o T"},
      {"wo_vt", "w/o V&T"},
      {"wo_g1", "w/o g1"},
      {"wo_g2", "w/o g2"},
      {"wo_l1", "w/o L1"},
      {"wo_l2", "w/o L2"},
      {"wo_pn", "w/o PN"},
      {"wo_s", "w/o S"},
      {"wo_s_pn", "w/o S&PN"},
      {"bprmf", "BPRMF"},
      {"lightgcn", "LightGCN"},
      {"lightgcn_s", "LightGCN+S"},
  };
  return variants;
}

std::string CanonicalVariantId(std::string_view variant) {
  for (const Variant& v : KnownVariants()) {
    if (v.id == variant || v.name == variant) return v.id;
  }
  std::string known;
  for (const Variant& v : KnownVariants()) known += (known.empty() ? "" : ", ") + v.id;
  Invalid("unknown variant '" + std::string(variant) + "' (known: " + known + ")");
}

std::string VariantDisplayName(std::string_view variant) {
  const std::string id = CanonicalVariantId(variant);
  for (const Variant& v : KnownVariants()) {
    if (v.id == id) return v.name;
  }
  return id;
}

TrainConfig ApplyVariant(std::string_view variant, TrainConfig config) {
  const std::string id = CanonicalVariantId(variant);
  AblationFlags& f = config.flags;
  if (id == "full") {
  } else if (id == "wo_v") {
    f.use_visual = false;
  } else if (id == "wo_t") {
    f.use_textual = false;
  } else if (id == "wo_vt") {
    f.use_visual = false;
    f.use_textual = false;
  } else if (id == "wo_g1") {
    f.use_g1_branch = false;
    f.use_g1_loss = false;
  } else if (id == "wo_g2") {
    f.use_g2_branch = false;
    f.use_g2_loss = false;
  } else if (id == "wo_l1") {
    f.use_g1_loss = false;
  } else if (id == "wo_l2") {
    f.use_g2_loss = false;
  } else if (id == "wo_pn") {
    f.use_pn = false;
  } else if (id == "wo_s") {
    f.use_sentiment = false;
  } else if (id == "wo_s_pn") {
    f.use_sentiment = false;
    f.use_pn = false;
  } else if (id == "bprmf") {
    config.model = ModelKind::kBprmf;
    config.regularize_layer0 = true;
  } else if (id == "lightgcn" || id == "lightgcn_s") {
    config.model = ModelKind::kLightGcn;
    config.regularize_layer0 = true;
    f.use_sentiment = id == "lightgcn_s";
  }
  return config;
}

std::vector<int> ParseKs(std::string_view text) {
  std::vector<int> ks;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view token = text.substr(start, comma - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    const int k = ParseNumber<int>(token, "ks");
    if (k < 1) Invalid("k must be positive");
    ks.push_back(k);
    start = comma + 1;
  }
  return ks;
}

std::string FormatKs(const std::vector<int>& ks) {
  std::string out;
  for (int k : ks) out += (out.empty() ? "" : ",") + std::to_string(k);
  return out;
}

}  // namespace megcf
