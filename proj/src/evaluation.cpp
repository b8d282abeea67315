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

#include "emm/evaluation.hpp"

#include "emm/errors.hpp"

namespace emm {

namespace {

std::string class_prefix(BinaryLabel label) { return std::string(to_string(label)); }

std::vector<std::string> build_names() {
  std::vector<std::string> names = {"baseline.sensitivity", "baseline.specificity", "baseline.ppv",
                                    "baseline.npv", "baseline.accuracy"};
  for (auto label : kBothClasses) {
    for (auto c : kAllCategories) {
      const std::string base = "category." + class_prefix(label) + "." + std::string(to_string(c));
      names.push_back(base + ".fraction");
      names.push_back(base + ".accuracy");
    }
  }
  for (auto label : kBothClasses) {
    const std::string base = "tradeoff." + class_prefix(label);
    names.push_back(base + ".baseline_accuracy");
    names.push_back(base + ".false_alarm_rate");
    names.push_back(base + ".post_review_accuracy");
    names.push_back(base + ".relative_accuracy_improvement");
  }
  names.insert(names.end(),
               {"ed_spauc", "ed_snauc", "ed_spauc_normalized", "ed_snauc_normalized"});
  return names;
}

Dataset labeled_only(std::span<const CaseRecord> cases) {
  Dataset out;
  for (const auto& c : cases) {
    if (c.ground_truth) out.push_back(c);
  }
  return out;
}

bool all_labeled(std::span<const CaseRecord> cases) {
  for (const auto& c : cases) {
    if (!c.ground_truth) return false;
  }
  return true;
}

struct Sections {
  CategoryReport categories;
  std::optional<BaselineMetrics> baseline;
  std::optional<TradeoffReport> tradeoff;
  std::optional<ErrorDetectionCurve> curve;
  std::optional<AucSummary> spauc;
  std::optional<AucSummary> snauc;
  std::vector<std::string> notes;
};

Sections compute_sections(std::span<const CaseRecord> cases, const StratificationPolicy& policy) {
  Sections s;
  s.categories = category_report(cases, policy);
  Dataset labeled_storage;
  std::span<const CaseRecord> labeled = cases;
  if (!all_labeled(cases)) {
    labeled_storage = labeled_only(cases);
    labeled = labeled_storage;
  }
  if (labeled.empty()) {
    s.notes.emplace_back("no ground truth available; accuracy metrics undefined");
    return s;
  }
  s.baseline = baseline_metrics(labeled);
  s.tradeoff = tradeoff_report(labeled, policy);
  try {
    s.curve = error_detection_curve(labeled);
  } catch (const CurveError& e) {
    s.notes.emplace_back(e.what());
    return s;
  }
  try {
    s.spauc = ed_spauc_summary(*s.curve);
  } catch (const UndefinedAuc& e) {
    s.notes.emplace_back(e.what());
  }
  try {
    s.snauc = ed_snauc_summary(*s.curve);
  } catch (const UndefinedAuc& e) {
    s.notes.emplace_back(e.what());
  }
  return s;
}

std::vector<std::optional<double>> flatten(const Sections& s) {
  std::vector<std::optional<double>> v;
  v.reserve(scalar_metric_names().size());
  if (s.baseline) {
    v.insert(v.end(), {s.baseline->sensitivity, s.baseline->specificity, s.baseline->ppv,
                       s.baseline->npv, s.baseline->accuracy});
  } else {
    v.resize(5);
  }
  for (auto label : kBothClasses) {
    for (auto c : kAllCategories) {
      const auto& cell = s.categories.at(label, c);
      v.push_back(cell.fraction);
      v.push_back(cell.accuracy());
    }
  }
  for (auto label : kBothClasses) {
    const ClassTradeoff* t = nullptr;
    if (s.tradeoff && s.tradeoff->of(label)) t = &*s.tradeoff->of(label);
    if (t) {
      v.insert(v.end(), {t->baseline_accuracy(), t->false_alarm_rate(), t->post_review_accuracy(),
                         t->relative_accuracy_improvement()});
    } else {
      v.resize(v.size() + 4);
    }
  }
  auto area = [](const std::optional<AucSummary>& a) {
    return a ? std::optional<double>(a->area) : std::nullopt;
  };
  auto norm = [](const std::optional<AucSummary>& a) {
    return a ? std::optional<double>(a->normalized) : std::nullopt;
  };
  v.insert(v.end(), {area(s.spauc), area(s.snauc), norm(s.spauc), norm(s.snauc)});
  return v;
}

}  // namespace

const std::vector<std::string>& scalar_metric_names() {
  static const std::vector<std::string> names = build_names();
  return names;
}

std::vector<std::optional<double>> scalar_metrics(std::span<const CaseRecord> cases,
                                                  const StratificationPolicy& policy) {
  return flatten(compute_sections(cases, policy));
}

const MetricEstimate* EvaluationReport::find(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

EvaluationReport evaluate(std::span<const CaseRecord> cases, const StratificationPolicy& policy,
                          const EvaluationOptions& options) {
  if (cases.empty()) throw InvalidInput("empty dataset");
  if (options.n_draws < 0) throw InvalidInput("draw count must be non-negative");
  const int k = ensemble_size_of(cases);
  const auto validation = validate_policy(policy, k);
  if (!validation.ok()) {
    throw InvalidInput("invalid policy: " + validation.violations.front().detail);
  }

  EvaluationReport report;
  report.source_cases = static_cast<std::int64_t>(cases.size());
  report.ensemble_size = k;
  report.design_prevalence = options.prevalence;
  report.mode = options.mode;
  report.seed = options.seed;
  report.n_draws = options.n_draws;

  // The evaluated dataset and the source of bootstrap draws.
  Dataset resampled;
  Dataset labeled_source;
  std::span<const CaseRecord> evaluated = cases;
  std::span<const CaseRecord> draw_source = cases;
  DrawSampler sampler = bootstrap_sample;
  if (options.prevalence) {
    labeled_source = labeled_only(cases);
    if (labeled_source.size() != cases.size()) {
      report.notes.push_back(std::to_string(cases.size() - labeled_source.size()) +
                             " unlabeled cases excluded from prevalence resampling");
    }
    resampled = resample_to_prevalence(
        labeled_source, {*options.prevalence, options.mode, options.seed});
    evaluated = resampled;
    draw_source = labeled_source;
    sampler = prevalence_sampler(*options.prevalence, options.mode);
  }
  report.evaluated_cases = static_cast<std::int64_t>(evaluated.size());

  Sections sections = compute_sections(evaluated, policy);
  report.categories = sections.categories;
  report.baseline = sections.baseline;
  report.tradeoff = sections.tradeoff;
  report.curve = sections.curve;
  report.spauc = sections.spauc;
  report.snauc = sections.snauc;
  report.notes.insert(report.notes.end(), sections.notes.begin(), sections.notes.end());

  std::int64_t labeled = 0;
  std::int64_t positives = 0;
  for (const auto& c : evaluated) {
    if (!c.ground_truth) continue;
    ++labeled;
    if (*c.ground_truth == BinaryLabel::Positive) ++positives;
  }
  report.labeled_cases = labeled;
  report.realized_prevalence = ratio(positives, labeled);

  if (labeled > 0) {
    Dataset labeled_eval = labeled_only(evaluated);
    report.accuracy_table = accuracy_by_agreement(labeled_eval);
    if (options.stratified_curves) report.class_curves = error_detection_curves_by_class(labeled_eval);
  }

  const auto point = flatten(sections);
  const auto& names = scalar_metric_names();
  std::vector<BootstrapInterval> intervals;
  if (options.n_draws > 0 && labeled > 0) {
    intervals = bootstrap_intervals(
        [&policy](std::span<const CaseRecord> s) { return scalar_metrics(s, policy); },
        draw_source, sampler,
        {.n_draws = options.n_draws, .seed = options.seed, .threads = options.threads});
  }
  report.metrics.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    MetricEstimate m{names[i], point[i], std::nullopt};
    if (!intervals.empty()) m.interval = intervals[i];
    report.metrics.push_back(std::move(m));
  }
  return report;
}

}  // namespace emm
