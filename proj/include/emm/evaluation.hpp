// Copyright 2026 The EMM Monitor Authors.
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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emm/core.hpp"
#include "emm/metrics.hpp"
#include "emm/resample.hpp"

namespace emm {

/// Seed used when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct EvaluationOptions {
  /// Design prevalence to resample to; nullopt evaluates at native prevalence.
  std::optional<double> prevalence;
  ResampleMode mode = ResampleMode::Exact;
  /// Bootstrap draws for the confidence intervals; 0 skips them.
  int n_draws = 1000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  bool stratified_curves = false;
};

/// A scalar with an optional bootstrap interval.
struct MetricEstimate {
  std::string name;
  std::optional<double> value;
  std::optional<BootstrapInterval> interval;
};

struct EvaluationReport {
  std::int64_t source_cases = 0;
  std::int64_t evaluated_cases = 0;
  std::int64_t labeled_cases = 0;
  int ensemble_size = 0;
  std::optional<double> design_prevalence;
  std::optional<double> realized_prevalence;
  ResampleMode mode = ResampleMode::Exact;
  std::uint64_t seed = 0;
  int n_draws = 0;

  CategoryReport categories;
  std::optional<BaselineMetrics> baseline;
  std::optional<AccuracyByAgreementTable> accuracy_table;
  std::optional<TradeoffReport> tradeoff;
  std::optional<ErrorDetectionCurve> curve;
  std::array<std::optional<ErrorDetectionCurve>, 2> class_curves;
  std::optional<AucSummary> spauc;
  std::optional<AucSummary> snauc;

  /// Flat list of every scalar, in scalar_metric_names() order.
  std::vector<MetricEstimate> metrics;
  /// Why a section is missing (no ground truth, no errors, ...).
  std::vector<std::string> notes;

  const MetricEstimate* find(std::string_view name) const;
};

/// Names of the scalars in EvaluationReport::metrics.
const std::vector<std::string>& scalar_metric_names();

/// Every scalar in scalar_metric_names() order, computed over the labeled
/// cases of `cases`. This is the per-draw bootstrap statistic.
std::vector<std::optional<double>> scalar_metrics(std::span<const CaseRecord> cases,
                                                  const StratificationPolicy& policy);

/// Full evaluation. When a prevalence is requested the point estimates come
/// from one prevalence-controlled resample (seeded with options.seed) and
/// each bootstrap draw is an independent prevalence-controlled resample of
/// the labeled source cases. Cases without ground truth only contribute to
/// the category distribution.
EvaluationReport evaluate(std::span<const CaseRecord> cases, const StratificationPolicy& policy,
                          const EvaluationOptions& options);

}  // namespace emm
