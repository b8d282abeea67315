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

#include "emm/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "emm/errors.hpp"
#include "emm/parallel.hpp"
#include "emm/rng.hpp"

namespace emm {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

void check_predictor(const PredictorSpec& p, const std::string& what) {
  if (!in_unit(p.sensitivity) || !in_unit(p.specificity)) {
    throw InvalidInput(what + " sensitivity and specificity must lie in [0, 1]");
  }
}

std::string format_id(const std::string& prefix, std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(index));
  return prefix + buf;
}

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Next k-combination of {0..n-1} in lexicographic order; false when done.
bool next_combination(std::vector<int>& comb, int n) {
  const int k = static_cast<int>(comb.size());
  int i = k - 1;
  while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++comb[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) {
    comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

}  // namespace

void validate(const SyntheticCohortSpec& spec) {
  if (spec.n_cases < 0) throw InvalidInput("n_cases must be non-negative");
  if (!in_unit(spec.prevalence)) throw InvalidInput("prevalence must lie in [0, 1]");
  if (spec.subs.empty()) throw InvalidInput("at least one sub-model is required");
  if (!in_unit(spec.p_hard)) throw InvalidInput("p_hard must lie in [0, 1]");
  if (!(spec.hard_error_multiplier >= 1.0)) {
    throw InvalidInput("hard_error_multiplier must be at least 1");
  }
  check_predictor(spec.primary, "primary");
  for (std::size_t j = 0; j < spec.subs.size(); ++j) {
    check_predictor(spec.subs[j], "sub-model " + std::to_string(j));
  }
}

double error_probability(const PredictorSpec& predictor, BinaryLabel truth, bool hard,
                         double hard_error_multiplier) {
  const double base = truth == BinaryLabel::Positive ? 1.0 - predictor.sensitivity
                                                     : 1.0 - predictor.specificity;
  const double scaled = hard ? base * hard_error_multiplier : base;
  return std::clamp(scaled, 0.0, kMaxErrorProbability);
}

CaseRecord generate_case(const SyntheticCohortSpec& spec, std::int64_t index) {
  PhiloxStream rng(spec.seed, static_cast<std::uint64_t>(index));
  CaseRecord c;
  c.case_id = format_id(spec.id_prefix, index);
  c.timestamp_ms = spec.start_timestamp_ms + index * spec.case_interval_ms;
  const BinaryLabel truth =
      rng.uniform() < spec.prevalence ? BinaryLabel::Positive : BinaryLabel::Negative;
  const bool hard = rng.uniform() < spec.p_hard;
  auto predict = [&](const PredictorSpec& p) {
    const bool wrong = rng.uniform() < error_probability(p, truth, hard, spec.hard_error_multiplier);
    return wrong ? negate(truth) : truth;
  };
  c.primary = predict(spec.primary);
  c.subs.reserve(spec.subs.size());
  for (const auto& s : spec.subs) c.subs.push_back(predict(s));
  c.ground_truth = truth;
  c.cohort_tag = spec.cohort_tag;
  return c;
}

Dataset generate_cohort(const SyntheticCohortSpec& spec, unsigned threads) {
  validate(spec);
  Dataset out(static_cast<std::size_t>(spec.n_cases));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = generate_case(spec, static_cast<std::int64_t>(i));
  });
  return out;
}

Dataset select_submodels(std::span<const CaseRecord> cases, std::span<const int> columns) {
  Dataset out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    CaseRecord r = c;
    r.subs.clear();
    for (int col : columns) {
      if (col < 0 || static_cast<std::size_t>(col) >= c.subs.size()) {
        throw InvalidInput("sub-model column " + std::to_string(col) + " out of range");
      }
      r.subs.push_back(c.subs[static_cast<std::size_t>(col)]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

AblationReport ablation_submodel_count(std::span<const CaseRecord> cases, EdMetric metric,
                                       std::uint64_t seed) {
  const int k = ensemble_size_of(cases);
  if (k < 2) throw InvalidInput("sub-model ablation needs an ensemble of at least 2");
  for (const auto& c : cases) {
    if (!c.ground_truth) throw InvalidInput("case " + c.case_id + " has no ground truth");
  }

  auto evaluate_subset = [&](const std::vector<int>& cols) -> std::optional<double> {
    const Dataset reduced = select_submodels(cases, cols);
    try {
      const auto curve = error_detection_curve(reduced);
      return metric == EdMetric::Spauc ? ed_spauc(curve) : ed_snauc(curve);
    } catch (const CurveError&) {
      return std::nullopt;
    } catch (const UndefinedAuc&) {
      return std::nullopt;
    }
  };

  AblationReport report;
  report.metric = metric;
  report.ensemble_size = k;
  for (int m = 1; m <= k; ++m) {
    std::vector<std::vector<int>> subsets;
    if (binomial(k, m) <= kMaxEnumeratedSubsets) {
      std::vector<int> comb(static_cast<std::size_t>(m));
      std::iota(comb.begin(), comb.end(), 0);
      do {
        subsets.push_back(comb);
      } while (next_combination(comb, k));
    } else {
      PhiloxStream rng(seed, static_cast<std::uint64_t>(m));
      std::vector<int> all(static_cast<std::size_t>(k));
      for (int s = 0; s < kSampledSubsets; ++s) {
        std::iota(all.begin(), all.end(), 0);
        // Partial Fisher-Yates for the first m columns.
        for (int i = 0; i < m; ++i) {
          const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k - i)));
          std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        std::vector<int> pick(all.begin(), all.begin() + m);
        std::sort(pick.begin(), pick.end());
        subsets.push_back(std::move(pick));
      }
    }

    AblationRow row;
    row.submodels = m;
    row.subsets = static_cast<std::int64_t>(subsets.size());
    double sum = 0.0;
    for (const auto& cols : subsets) {
      const auto v = evaluate_subset(cols);
      if (!v) continue;
      ++row.defined_subsets;
      sum += *v;
      row.min = row.min ? std::min(*row.min, *v) : *v;
      row.max = row.max ? std::max(*row.max, *v) : *v;
    }
    if (row.defined_subsets > 0) row.mean = sum / static_cast<double>(row.defined_subsets);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<EvaluationReport> prevalence_sweep(const SyntheticCohortSpec& spec,
                                               std::span<const double> prevalences,
                                               const StratificationPolicy& policy,
                                               const EvaluationOptions& options) {
  for (double rho : prevalences) {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("sweep prevalences must lie in (0, 1)");
  }
  const Dataset cohort = generate_cohort(spec, options.threads);
  std::vector<EvaluationReport> reports;
  reports.reserve(prevalences.size());
  for (double rho : prevalences) {
    EvaluationOptions o = options;
    o.prevalence = rho;
    reports.push_back(evaluate(cohort, policy, o));
  }
  return reports;
}

}  // namespace emm
