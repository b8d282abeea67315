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

#include "emm/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <utility>

#include "emm/errors.hpp"

namespace emm {

namespace {

void require_truth(std::span<const CaseRecord> cases) {
  for (const auto& c : cases) {
    if (!c.ground_truth) throw InvalidInput("case " + c.case_id + " has no ground truth");
  }
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(17) << *v;
  return os.str();
}

}  // namespace

BaselineMetrics baseline_metrics(std::span<const CaseRecord> cases) {
  require_truth(cases);
  BaselineMetrics m;
  auto& k = m.counts;
  for (const auto& c : cases) {
    const bool predicted_pos = c.primary == BinaryLabel::Positive;
    const bool actual_pos = *c.ground_truth == BinaryLabel::Positive;
    if (predicted_pos && actual_pos) ++k.tp;
    else if (predicted_pos) ++k.fp;
    else if (actual_pos) ++k.fn;
    else ++k.tn;
  }
  m.sensitivity = ratio(k.tp, k.tp + k.fn);
  m.specificity = ratio(k.tn, k.tn + k.fp);
  m.ppv = ratio(k.tp, k.tp + k.fp);
  m.npv = ratio(k.tn, k.tn + k.fn);
  m.accuracy = ratio(k.tp + k.tn, k.total());
  return m;
}

std::int64_t AccuracyByAgreementTable::total() const {
  std::int64_t n = 0;
  for (const auto& row : cells) {
    for (const auto& cell : row) n += cell.count;
  }
  return n;
}

AccuracyByAgreementTable accuracy_by_agreement(std::span<const CaseRecord> cases) {
  require_truth(cases);
  AccuracyByAgreementTable table;
  table.ensemble_size = ensemble_size_of(cases);
  for (auto& row : table.cells) row.resize(static_cast<std::size_t>(table.ensemble_size) + 1);
  for (const auto& c : cases) {
    const auto level = compute_agreement(c);
    auto& cell = table.cells[class_index(c.primary)][static_cast<std::size_t>(level.agreeing_count())];
    ++cell.count;
    if (c.primary_correct()) ++cell.correct;
  }
  return table;
}

std::string to_csv(const AccuracyByAgreementTable& table) {
  std::ostringstream os;
  os << "class,level,count,accuracy\n";
  for (auto label : kBothClasses) {
    for (int level = 0; level <= table.ensemble_size; ++level) {
      const auto& cell = table.at(label, level);
      os << to_string(label) << ',' << level << ',' << cell.count << ','
         << format_optional(cell.accuracy()) << '\n';
    }
  }
  return os.str();
}

CategoryReport category_report(std::span<const CaseRecord> cases,
                               const StratificationPolicy& policy) {
  CategoryReport report;
  if (cases.empty()) return report;
  const int k = ensemble_size_of(cases);
  const auto validation = validate_policy(policy, k);
  if (!validation.ok()) {
    throw InvalidInput("invalid policy: " + validation.violations.front().detail);
  }
  for (const auto& c : cases) {
    const auto category = categorize(c.primary, compute_agreement(c), policy);
    auto& cell = report.cells[class_index(c.primary)][category_index(category)];
    ++cell.count;
    ++report.class_totals[class_index(c.primary)];
    if (c.ground_truth) {
      ++cell.labeled;
      if (c.primary_correct()) ++cell.correct;
    }
  }
  for (auto label : kBothClasses) {
    const auto ci = class_index(label);
    for (auto& cell : report.cells[ci]) cell.fraction = ratio(cell.count, report.class_totals[ci]);
  }
  return report;
}

std::string to_csv(const CategoryReport& report) {
  std::ostringstream os;
  os << "class,category,count,fraction,accuracy\n";
  for (auto label : kBothClasses) {
    for (auto c : kAllCategories) {
      const auto& cell = report.at(label, c);
      os << to_string(label) << ',' << to_string(c) << ',' << cell.count << ','
         << format_optional(cell.fraction) << ',' << format_optional(cell.accuracy()) << '\n';
    }
  }
  return os.str();
}

std::optional<double> ClassTradeoff::relative_accuracy_improvement() const {
  if (baseline_correct == 0) return std::nullopt;
  // (post - base) / base, reduced to counts.
  return static_cast<double>(decreased_incorrect) / static_cast<double>(baseline_correct);
}

TradeoffReport tradeoff_report(std::span<const CaseRecord> cases,
                               const StratificationPolicy& policy) {
  require_truth(cases);
  TradeoffReport report;
  if (cases.empty()) return report;
  const int k = ensemble_size_of(cases);
  const auto validation = validate_policy(policy, k);
  if (!validation.ok()) {
    throw InvalidInput("invalid policy: " + validation.violations.front().detail);
  }
  std::array<ClassTradeoff, 2> acc{};
  for (const auto& c : cases) {
    auto& t = acc[class_index(c.primary)];
    const bool correct = c.primary_correct();
    ++t.cases;
    if (correct) ++t.baseline_correct;
    if (categorize(c.primary, compute_agreement(c), policy) == ConfidenceCategory::Decreased) {
      ++t.decreased;
      if (correct) ++t.decreased_correct;
      else ++t.decreased_incorrect;
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (acc[i].cases > 0) report.classes[i] = acc[i];
  }
  return report;
}

namespace {

ErrorDetectionCurve build_curve(std::span<const CaseRecord> cases, int k) {
  // Histogram of disagreement, split by error indicator.
  std::vector<std::int64_t> errors_at(static_cast<std::size_t>(k) + 1, 0);
  std::vector<std::int64_t> correct_at(static_cast<std::size_t>(k) + 1, 0);
  for (const auto& c : cases) {
    const auto s = static_cast<std::size_t>(compute_agreement(c).disagreement());
    if (c.primary_correct()) ++correct_at[s];
    else ++errors_at[s];
  }

  ErrorDetectionCurve curve;
  curve.ensemble_size = k;
  curve.cases = static_cast<std::int64_t>(cases.size());
  for (auto e : errors_at) curve.errors += e;
  if (curve.errors == 0) {
    throw CurveError("no primary-model errors in the dataset; error-detection sensitivity is undefined");
  }
  const std::int64_t non_errors = curve.cases - curve.errors;

  // Walk thresholds from K+1 down to 0 accumulating the flagged tail.
  curve.points.resize(static_cast<std::size_t>(k) + 2);
  std::int64_t flagged_errors = 0;
  std::int64_t flagged_correct = 0;
  for (int t = k + 1; t >= 0; --t) {
    if (t <= k) {
      flagged_errors += errors_at[static_cast<std::size_t>(t)];
      flagged_correct += correct_at[static_cast<std::size_t>(t)];
    }
    CurvePoint& p = curve.points[static_cast<std::size_t>(t)];
    p.threshold = t;
    p.flagged = flagged_errors + flagged_correct;
    p.flagged_errors = flagged_errors;
    const std::int64_t unflagged_correct = non_errors - flagged_correct;
    p.sensitivity = ratio(flagged_errors, curve.errors);
    p.ppv = ratio(flagged_errors, p.flagged);
    p.specificity = ratio(unflagged_correct, non_errors);
    p.npv = ratio(unflagged_correct, curve.cases - p.flagged);
  }
  return curve;
}

}  // namespace

ErrorDetectionCurve error_detection_curve(std::span<const CaseRecord> cases) {
  require_truth(cases);
  return build_curve(cases, ensemble_size_of(cases));
}

std::array<std::optional<ErrorDetectionCurve>, 2> error_detection_curves_by_class(
    std::span<const CaseRecord> cases) {
  require_truth(cases);
  std::array<std::optional<ErrorDetectionCurve>, 2> out;
  if (cases.empty()) return out;
  const int k = ensemble_size_of(cases);
  for (auto label : kBothClasses) {
    Dataset subset;
    for (const auto& c : cases) {
      if (c.primary == label) subset.push_back(c);
    }
    if (subset.empty()) continue;
    try {
      out[class_index(label)] = build_curve(subset, k);
    } catch (const CurveError&) {
      // No errors among this class's predictions.
    }
  }
  return out;
}

namespace {

using XY = std::pair<double, double>;

AucSummary trapezoid_area(std::vector<XY> pts, const char* name) {
  if (pts.size() < 2) {
    throw UndefinedAuc(std::string(name) + " needs at least two curve points with defined values, got " +
                       std::to_string(pts.size()));
  }
  std::sort(pts.begin(), pts.end());
  // Collapse equal x to their mean y.
  std::vector<XY> collapsed;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < pts.size() && pts[j].first == pts[i].first) sum += pts[j++].second;
    collapsed.emplace_back(pts[i].first, sum / static_cast<double>(j - i));
    i = j;
  }
  AucSummary s;
  s.points_used = collapsed.size();
  s.x_min = collapsed.front().first;
  s.x_max = collapsed.back().first;
  for (std::size_t i = 1; i < collapsed.size(); ++i) {
    const auto& [x0, y0] = collapsed[i - 1];
    const auto& [x1, y1] = collapsed[i];
    s.area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  const double width = s.x_max - s.x_min;
  s.normalized = width > 0.0 ? s.area / width : collapsed.front().second;
  return s;
}

template <typename XOf, typename YOf>
std::vector<XY> defined_points(const ErrorDetectionCurve& curve, XOf x_of, YOf y_of) {
  std::vector<XY> pts;
  for (const auto& p : curve.points) {
    if (p.threshold < 1) continue;
    const auto x = x_of(p);
    const auto y = y_of(p);
    if (x && y) pts.emplace_back(*x, *y);
  }
  return pts;
}

}  // namespace

AucSummary ed_spauc_summary(const ErrorDetectionCurve& curve) {
  return trapezoid_area(defined_points(
                            curve, [](const CurvePoint& p) { return p.sensitivity; },
                            [](const CurvePoint& p) { return p.ppv; }),
                        "ED-SPAUC");
}

AucSummary ed_snauc_summary(const ErrorDetectionCurve& curve) {
  return trapezoid_area(defined_points(
                            curve, [](const CurvePoint& p) { return p.specificity; },
                            [](const CurvePoint& p) { return p.npv; }),
                        "ED-SNAUC");
}

double ed_spauc(const ErrorDetectionCurve& curve) { return ed_spauc_summary(curve).area; }
double ed_snauc(const ErrorDetectionCurve& curve) { return ed_snauc_summary(curve).area; }

std::string to_csv(const ErrorDetectionCurve& curve) {
  std::ostringstream os;
  os << "threshold,flagged,flagged_errors,sensitivity,ppv,specificity,npv\n";
  for (const auto& p : curve.points) {
    os << p.threshold << ',' << p.flagged << ',' << p.flagged_errors << ','
       << format_optional(p.sensitivity) << ',' << format_optional(p.ppv) << ','
       << format_optional(p.specificity) << ',' << format_optional(p.npv) << '\n';
  }
  return os.str();
}

}  // namespace emm
