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

// Prevalence-controlled resampling and percentile bootstrap statistics.
//
// Randomness contract: bootstrap draw d reads only PhiloxStream(seed, d), so
// results depend on (inputs, seed, n_draws) and never on thread count.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "emm/core.hpp"

namespace emm {

enum class ResampleMode {
  /// round(rho * N_n) positives and N_n negatives. The realized prevalence is
  /// rho / (1 + rho), e.g. ~0.231 for rho = 0.3.
  PaperLiteral,
  /// round(rho / (1 - rho) * N_n) positives and N_n negatives, so the realized
  /// prevalence equals rho up to rounding.
  Exact,
};

std::string_view to_string(ResampleMode mode);  // "paper_literal" / "exact"
std::optional<ResampleMode> parse_resample_mode(std::string_view text);

struct ResampleSpec {
  double target_prevalence = 0.3;
  ResampleMode mode = ResampleMode::Exact;
  std::uint64_t seed = 0;
};

struct ResampleCounts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

/// Output class sizes for a source with `negatives` ground-truth negatives.
ResampleCounts resample_counts(std::int64_t negatives, const ResampleSpec& spec);

/// Draws both classes with replacement. Output order is positives then
/// negatives; each output case_id gets a "#<position>" suffix so ids stay
/// unique. Throws InvalidInput when rho is outside (0,1), a record lacks
/// ground truth, or either class is empty.
Dataset resample_to_prevalence(std::span<const CaseRecord> cases, const ResampleSpec& spec);

/// Linear interpolation between order statistics ("type 7"): position
/// q * (n - 1) in the ascending sample. q in [0, 1]; `sorted` nonempty.
double percentile(std::span<const double> sorted, double q);

using ScalarMetric = std::function<std::optional<double>(std::span<const CaseRecord>)>;
using VectorMetric = std::function<std::vector<std::optional<double>>(std::span<const CaseRecord>)>;

/// Produces the dataset for bootstrap draw `draw` (deterministic in its args).
using DrawSampler =
    std::function<Dataset(std::span<const CaseRecord> source, std::uint64_t seed, std::uint64_t draw)>;

/// Same-size resample with replacement; indices from PhiloxStream(seed, draw).
Dataset bootstrap_sample(std::span<const CaseRecord> source, std::uint64_t seed, std::uint64_t draw);
/// Indices used by bootstrap_sample.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::uint64_t draw);

/// Prevalence-controlled draw: resample_to_prevalence with a per-draw seed.
DrawSampler prevalence_sampler(double target_prevalence, ResampleMode mode);

struct BootstrapOptions {
  int n_draws = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double confidence = 0.95;
};

/// Percentile interval for one component of a vector metric.
struct BootstrapInterval {
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  int defined_draws = 0;
  int undefined_draws = 0;
  /// Undefined on more than half of the draws; no interval is reported.
  bool unstable() const { return undefined_draws * 2 > defined_draws + undefined_draws; }
};

/// Evaluates `metric` on every draw and returns one interval per component.
std::vector<BootstrapInterval> bootstrap_intervals(const VectorMetric& metric,
                                                   std::span<const CaseRecord> source,
                                                   const DrawSampler& sampler,
                                                   const BootstrapOptions& options);

struct BootstrapResult {
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_draws = 0;
  int undefined_draws = 0;
  std::uint64_t seed = 0;
};

/// Throws InvalidInput if n_draws < 1 or the metric is undefined on the full
/// dataset; UnstableMetric if undefined on more than half of the draws.
BootstrapResult bootstrap_ci(const ScalarMetric& metric, std::span<const CaseRecord> cases,
                             int n_draws, std::uint64_t seed, unsigned threads = 1);

/// Two-sided paired bootstrap p-value for H0: metric(A) == metric(B).
/// B is aligned to A by case_id, and each draw resamples case_ids jointly.
/// p = min(1, 2 * min(tail_le, tail_ge)) with tail = (count + 1) / (draws + 1).
double bootstrap_paired_pvalue(const ScalarMetric& metric, std::span<const CaseRecord> a,
                               std::span<const CaseRecord> b, int n_draws, std::uint64_t seed,
                               unsigned threads = 1);

}  // namespace emm
