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


#ifndef MEGCF_REPORT_H_
#define MEGCF_REPORT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "megcf/evaluation.h"

namespace megcf {

// One metric value of one run, e.g. (full, seed 3, ndcg, 10, 0.41).
struct MetricRecord {
  std::string variant;
  std::uint64_t seed = 0;
  std::string metric;  // "hr" or "ndcg"
  int k = 0;
  double value = 0.0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

std::vector<MetricRecord> ToRecords(std::string_view variant, std::uint64_t seed,
                                    const MetricSet& metrics);

std::string MetricRecordJson(const MetricRecord& record);
std::string FormatMetricRecords(std::span<const MetricRecord> records);
// Throws kParseError with the line number.
std::vector<MetricRecord> ParseMetricRecords(std::string_view jsonl);

double Mean(std::span<const double> values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double StdDev(std::span<const double> values);

struct PairedTest {
  double mean_difference = 0.0;
  double t = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;  // two-sided
};

// Paired Student t-test on a[i] - b[i]. Throws kInvalidConfig for fewer than
// two pairs or unequal lengths.
PairedTest PairedTTest(std::span<const double> a, std::span<const double> b);

// Variants in first-appearance order.
std::vector<std::string> VariantsOf(std::span<const MetricRecord> records);
// Values of one metric for one variant, ordered by seed.
std::vector<double> SeriesOf(std::span<const MetricRecord> records,
                             std::string_view variant, std::string_view metric,
                             int k);
std::vector<std::uint64_t> SeedsOf(std::span<const MetricRecord> records,
                                   std::string_view variant);

// Rows are variants, columns HR@k then NDCG@k. Cells are "mean +- stdev", or
// just the value when each variant has a single seed.
std::string FormatSummaryTable(std::span<const MetricRecord> records,
                               std::span<const int> ks);
// Rows are variants, one column per seed, then the mean.
std::string FormatPerSeedTable(std::span<const MetricRecord> records,
                               std::string_view metric, int k);

}  // namespace megcf

#endif  // MEGCF_REPORT_H_
