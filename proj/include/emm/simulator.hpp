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

// Seeded synthetic cohorts of black-box binary predictors.
//
// Each case draws a ground truth and a difficulty (easy/hard). Given the
// difficulty, every predictor errs independently; hard cases multiply each
// predictor's base error rate by a common factor, which is the only source of
// correlation between predictors.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emm/core.hpp"
#include "emm/evaluation.hpp"

namespace emm {

struct PredictorSpec {
  double sensitivity = 1.0;
  double specificity = 1.0;
  bool operator==(const PredictorSpec&) const = default;
};

inline constexpr double kMaxErrorProbability = 0.95;

struct SyntheticCohortSpec {
  std::int64_t n_cases = 1000;
  double prevalence = 0.3;
  PredictorSpec primary;
  std::vector<PredictorSpec> subs = std::vector<PredictorSpec>(5);
  double p_hard = 0.0;
  double hard_error_multiplier = 1.0;
  std::uint64_t seed = kDefaultSeed;
  // Record metadata.
  std::int64_t start_timestamp_ms = 0;
  std::int64_t case_interval_ms = 60'000;
  std::string id_prefix = "case-";
  std::optional<std::string> cohort_tag;

  bool operator==(const SyntheticCohortSpec&) const = default;
};

/// Throws InvalidInput describing the first violated constraint.
void validate(const SyntheticCohortSpec& spec);

/// Error probability of a predictor on one case, after the hard-case
/// multiplier and the clamp to [0, kMaxErrorProbability].
double error_probability(const PredictorSpec& predictor, BinaryLabel truth, bool hard,
                         double hard_error_multiplier);

/// Case i reads only PhiloxStream(seed, i): draw 0 is the truth, draw 1 the
/// difficulty, draw 2 the primary and draw 3 + j sub-model j.
Dataset generate_cohort(const SyntheticCohortSpec& spec, unsigned threads = 1);

/// One simulated case (same contract as generate_cohort).
CaseRecord generate_case(const SyntheticCohortSpec& spec, std::int64_t index);

enum class EdMetric { Spauc, Snauc };

struct AblationRow {
  int submodels = 0;
  std::int64_t subsets = 0;          // subsets evaluated
  std::int64_t defined_subsets = 0;  // subsets where the metric was defined
  std::optional<double> mean;
  std::optional<double> min;
  std::optional<double> max;
};

struct AblationReport {
  EdMetric metric = EdMetric::Snauc;
  int ensemble_size = 0;
  std::vector<AblationRow> rows;  // m = 1..K
};

/// Subsets enumerated exactly when C(K, m) <= this, otherwise sampled.
inline constexpr std::int64_t kMaxEnumeratedSubsets = 252;
inline constexpr int kSampledSubsets = 100;

/// For each m = 1..K, recomputes agreement with every size-m subset of the
/// sub-model columns and aggregates the selected raw ED area. Throws
/// InvalidInput when K < 2.
AblationReport ablation_submodel_count(std::span<const CaseRecord> cases, EdMetric metric,
                                       std::uint64_t seed = kDefaultSeed);

/// Keeps only the listed sub-model columns (in the given order).
Dataset select_submodels(std::span<const CaseRecord> cases, std::span<const int> columns);

/// Generates one cohort from `spec` and evaluates it at each prevalence
/// (prevalence-controlled resampling, then evaluate()). Reports come back in
/// input order, tagged with their design prevalence.
std::vector<EvaluationReport> prevalence_sweep(const SyntheticCohortSpec& spec,
                                               std::span<const double> prevalences,
                                               const StratificationPolicy& policy,
                                               const EvaluationOptions& options);

}  // namespace emm
