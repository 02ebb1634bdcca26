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


#include "megcf/report.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"
#include "megcf/common.h"

namespace megcf {
namespace {

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string MetricLabel(std::string_view metric, int k) {
  std::string upper(metric);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return upper + "@" + std::to_string(k);
}

// Columns, not bytes: skips UTF-8 continuation bytes.
std::size_t DisplayWidth(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

// Left-aligned first column, right-aligned rest.
std::string RenderTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], DisplayWidth(row[c]));
    }
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const std::string& cell = rows[r][c];
      const std::string pad(width[c] - DisplayWidth(cell), ' ');
      if (c == 0) {
        line += cell + pad;
      } else {
        line += "  " + pad + cell;
      }
    }
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

}  // namespace

std::vector<MetricRecord> ToRecords(std::string_view variant, std::uint64_t seed,
                                    const MetricSet& metrics) {
  std::vector<MetricRecord> out;
  for (std::size_t j = 0; j < metrics.ks.size(); ++j) {
    out.push_back({std::string(variant), seed, "hr", metrics.ks[j], metrics.hr[j]});
  }
  for (std::size_t j = 0; j < metrics.ks.size(); ++j) {
    out.push_back({std::string(variant), seed, "ndcg", metrics.ks[j], metrics.ndcg[j]});
  }
  return out;
}

std::string MetricRecordJson(const MetricRecord& r) {
  nlohmann::ordered_json j;
  j["variant"] = r.variant;
  j["seed"] = r.seed;
  j["metric"] = r.metric;
  j["k"] = r.k;
  j["value"] = r.value;
  return j.dump();
}

std::string FormatMetricRecords(std::span<const MetricRecord> records) {
  std::string out;
  for (const auto& r : records) out += MetricRecordJson(r) + "\n";
  return out;
}

std::vector<MetricRecord> ParseMetricRecords(std::string_view jsonl) {
  std::vector<MetricRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line_no;
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MetricRecord r;
      r.variant = j.at("variant").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.metric = j.at("metric").get<std::string>();
      r.k = j.at("k").get<int>();
      r.value = j.at("value").get<double>();
      if (r.metric != "hr" && r.metric != "ndcg") {
        Fail(ErrorCode::kParseError, "metrics line " + std::to_string(line_no) +
                                         ": unknown metric '" + r.metric + "'");
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParseError,
           "metrics line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double StdDev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

PairedTest PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    Fail(ErrorCode::kInvalidConfig, "paired test needs two equal series of length >= 2");
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  PairedTest out;
  out.mean_difference = Mean(diff);
  out.degrees_of_freedom = static_cast<double>(diff.size() - 1);
  const double se = StdDev(diff) / std::sqrt(static_cast<double>(diff.size()));
  if (se == 0.0) {
    out.t = out.mean_difference == 0.0 ? 0.0 : std::copysign(INFINITY, out.mean_difference);
    out.p_value = out.mean_difference == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t = out.mean_difference / se;
  const boost::math::students_t dist(out.degrees_of_freedom);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t)));
  return out;
}

std::vector<std::string> VariantsOf(std::span<const MetricRecord> records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.variant) == out.end()) out.push_back(r.variant);
  }
  return out;
}

std::vector<std::uint64_t> SeedsOf(std::span<const MetricRecord> records,
                                   std::string_view variant) {
  std::set<std::uint64_t> seeds;
  for (const auto& r : records) {
    if (r.variant == variant) seeds.insert(r.seed);
  }
  return {seeds.begin(), seeds.end()};
}

std::vector<double> SeriesOf(std::span<const MetricRecord> records,
                             std::string_view variant, std::string_view metric,
                             int k) {
  std::map<std::uint64_t, double> by_seed;
  for (const auto& r : records) {
    if (r.variant == variant && r.metric == metric && r.k == k) by_seed[r.seed] = r.value;
  }
  std::vector<double> out;
  for (const auto& [seed, value] : by_seed) out.push_back(value);
  return out;
}

std::string FormatSummaryTable(std::span<const MetricRecord> records,
                               std::span<const int> ks) {
  const auto variants = VariantsOf(records);
  bool single_seed = true;
  for (const auto& v : variants) single_seed = single_seed && SeedsOf(records, v).size() <= 1;

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"variant"};
  for (const char* metric : {"hr", "ndcg"}) {
    for (int k : ks) header.push_back(MetricLabel(metric, k));
  }
  header.push_back("seeds");
  rows.push_back(std::move(header));
  for (const auto& v : variants) {
    std::vector<std::string> row = {v};
    for (const char* metric : {"hr", "ndcg"}) {
      for (int k : ks) {
        const auto series = SeriesOf(records, v, metric, k);
        if (series.empty()) {
          row.push_back("-");
        } else if (single_seed) {
          row.push_back(Fixed(Mean(series)));
        } else {
          row.push_back(Fixed(Mean(series)) + " ± " + Fixed(StdDev(series)));
        }
      }
    }
    row.push_back(std::to_string(SeedsOf(records, v).size()));
    rows.push_back(std::move(row));
  }
  return RenderTable(rows);
}

std::string FormatPerSeedTable(std::span<const MetricRecord> records,
                               std::string_view metric, int k) {
  const auto variants = VariantsOf(records);
  std::set<std::uint64_t> all_seeds;
  for (const auto& r : records) all_seeds.insert(r.seed);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {MetricLabel(metric, k)};
  for (auto s : all_seeds) header.push_back("seed " + std::to_string(s));
  header.push_back("mean");
  rows.push_back(std::move(header));
  for (const auto& v : variants) {
    std::vector<std::string> row = {v};
    std::vector<double> values;
    for (auto s : all_seeds) {
      auto it = std::find_if(records.begin(), records.end(), [&](const MetricRecord& r) {
        return r.variant == v && r.seed == s && r.metric == metric && r.k == k;
      });
      if (it == records.end()) {
        row.push_back("-");
      } else {
        row.push_back(Fixed(it->value));
        values.push_back(it->value);
      }
    }
    row.push_back(values.empty() ? "-" : Fixed(Mean(values)));
    rows.push_back(std::move(row));
  }
  return RenderTable(rows);
}

}  // namespace megcf
