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

#include "emm/resample.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "emm/errors.hpp"
#include "emm/parallel.hpp"
#include "emm/rng.hpp"

namespace emm {

std::string_view to_string(ResampleMode mode) {
  return mode == ResampleMode::Exact ? "exact" : "paper_literal";
}

std::optional<ResampleMode> parse_resample_mode(std::string_view text) {
  if (text == "exact") return ResampleMode::Exact;
  if (text == "paper_literal") return ResampleMode::PaperLiteral;
  return std::nullopt;
}

ResampleCounts resample_counts(std::int64_t negatives, const ResampleSpec& spec) {
  const double rho = spec.target_prevalence;
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("target prevalence must lie in (0, 1)");
  const double ratio = spec.mode == ResampleMode::Exact ? rho / (1.0 - rho) : rho;
  // llround rounds half away from zero.
  return {std::llround(ratio * static_cast<double>(negatives)), negatives};
}

Dataset resample_to_prevalence(std::span<const CaseRecord> cases, const ResampleSpec& spec) {
  std::vector<const CaseRecord*> pos;
  std::vector<const CaseRecord*> neg;
  for (const auto& c : cases) {
    if (!c.ground_truth) throw InvalidInput("case " + c.case_id + " has no ground truth");
    (*c.ground_truth == BinaryLabel::Positive ? pos : neg).push_back(&c);
  }
  if (pos.empty() || neg.empty()) {
    throw InvalidInput("prevalence resampling needs both ground-truth classes present");
  }
  const auto counts = resample_counts(static_cast<std::int64_t>(neg.size()), spec);

  Dataset out;
  out.reserve(static_cast<std::size_t>(counts.positives + counts.negatives));
  auto draw = [&](const std::vector<const CaseRecord*>& pool, std::int64_t count,
                  std::uint64_t stream) {
    PhiloxStream rng(spec.seed, stream);
    for (std::int64_t i = 0; i < count; ++i) {
      out.push_back(*pool[rng.uniform_index(pool.size())]);
      out.back().case_id += "#" + std::to_string(out.size() - 1);
    }
  };
  draw(pos, counts.positives, 0);
  draw(neg, counts.negatives, 1);
  return out;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidInput("percentile of an empty sample");
  if (q < 0.0 || q > 1.0) throw InvalidInput("percentile rank must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::uint64_t draw) {
  std::vector<std::size_t> idx(n);
  PhiloxStream rng(seed, draw);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(n));
  return idx;
}

Dataset bootstrap_sample(std::span<const CaseRecord> source, std::uint64_t seed, std::uint64_t draw) {
  Dataset out;
  out.reserve(source.size());
  for (auto i : bootstrap_indices(source.size(), seed, draw)) out.push_back(source[i]);
  return out;
}

DrawSampler prevalence_sampler(double target_prevalence, ResampleMode mode) {
  return [target_prevalence, mode](std::span<const CaseRecord> source, std::uint64_t seed,
                                   std::uint64_t draw) {
    return resample_to_prevalence(source, {target_prevalence, mode, derive_seed(seed, draw + 1)});
  };
}

std::vector<BootstrapInterval> bootstrap_intervals(const VectorMetric& metric,
                                                   std::span<const CaseRecord> source,
                                                   const DrawSampler& sampler,
                                                   const BootstrapOptions& options) {
  if (options.n_draws < 1) throw InvalidInput("bootstrap needs at least one draw");
  const auto n = static_cast<std::size_t>(options.n_draws);
  std::vector<std::vector<std::optional<double>>> per_draw(n);
  parallel_for(n, options.threads, [&](std::size_t d) {
    const Dataset sample = sampler(source, options.seed, d);
    per_draw[d] = metric(sample);
  });

  const std::size_t width = per_draw.front().size();
  const double alpha = (1.0 - options.confidence) / 2.0;
  std::vector<BootstrapInterval> out(width);
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t m = 0; m < width; ++m) {
    values.clear();
    for (const auto& draw : per_draw) {
      if (m < draw.size() && draw[m]) values.push_back(*draw[m]);
    }
    auto& iv = out[m];
    iv.defined_draws = static_cast<int>(values.size());
    iv.undefined_draws = static_cast<int>(n - values.size());
    if (iv.unstable() || values.empty()) continue;
    std::sort(values.begin(), values.end());
    iv.ci_low = percentile(values, alpha);
    iv.ci_high = percentile(values, 1.0 - alpha);
  }
  return out;
}

BootstrapResult bootstrap_ci(const ScalarMetric& metric, std::span<const CaseRecord> cases,
                             int n_draws, std::uint64_t seed, unsigned threads) {
  if (n_draws < 1) throw InvalidInput("bootstrap needs at least one draw");
  const auto point = metric(cases);
  if (!point) throw InvalidInput("metric is undefined on the full dataset");
  const auto intervals = bootstrap_intervals(
      [&metric](std::span<const CaseRecord> s) { return std::vector{metric(s)}; }, cases,
      bootstrap_sample, {.n_draws = n_draws, .seed = seed, .threads = threads});
  const auto& iv = intervals.front();
  if (iv.unstable()) {
    throw UnstableMetric("metric undefined on " + std::to_string(iv.undefined_draws) + " of " +
                         std::to_string(n_draws) + " bootstrap draws");
  }
  return {.point_estimate = *point,
          .ci_low = *iv.ci_low,
          .ci_high = *iv.ci_high,
          .n_draws = n_draws,
          .undefined_draws = iv.undefined_draws,
          .seed = seed};
}

double bootstrap_paired_pvalue(const ScalarMetric& metric, std::span<const CaseRecord> a,
                               std::span<const CaseRecord> b, int n_draws, std::uint64_t seed,
                               unsigned threads) {
  if (n_draws < 1) throw InvalidInput("bootstrap needs at least one draw");
  if (a.size() != b.size()) throw InvalidInput("paired datasets differ in size");
  std::unordered_map<std::string_view, std::size_t> b_index;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!b_index.emplace(b[i].case_id, i).second) {
      throw InvalidInput("duplicate case_id " + b[i].case_id + " in paired dataset");
    }
  }
  std::vector<std::size_t> b_for_a(a.size());
  std::unordered_map<std::string_view, bool> seen_a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = b_index.find(a[i].case_id);
    if (it == b_index.end()) throw InvalidInput("case_id " + a[i].case_id + " missing from B");
    if (!seen_a.emplace(a[i].case_id, true).second) {
      throw InvalidInput("duplicate case_id " + a[i].case_id + " in paired dataset");
    }
    b_for_a[i] = it->second;
  }

  const auto n = static_cast<std::size_t>(n_draws);
  std::vector<std::optional<double>> delta(n);
  parallel_for(n, threads, [&](std::size_t d) {
    const auto idx = bootstrap_indices(a.size(), seed, d);
    Dataset sa;
    Dataset sb;
    sa.reserve(idx.size());
    sb.reserve(idx.size());
    for (auto i : idx) {
      sa.push_back(a[i]);
      sb.push_back(b[b_for_a[i]]);
    }
    const auto ma = metric(sa);
    const auto mb = metric(sb);
    if (ma && mb) delta[d] = *ma - *mb;
  });

  std::int64_t defined = 0;
  std::int64_t le = 0;
  std::int64_t ge = 0;
  for (const auto& d : delta) {
    if (!d) continue;
    ++defined;
    if (*d <= 0.0) ++le;
    if (*d >= 0.0) ++ge;
  }
  if (defined * 2 < static_cast<std::int64_t>(n)) {
    throw UnstableMetric("metric difference undefined on " + std::to_string(n - defined) + " of " +
                         std::to_string(n) + " bootstrap draws");
  }
  const double tail_le = static_cast<double>(le + 1) / static_cast<double>(defined + 1);
  const double tail_ge = static_cast<double>(ge + 1) / static_cast<double>(defined + 1);
  return std::min(1.0, 2.0 * std::min(tail_le, tail_ge));
}

}  // namespace emm
