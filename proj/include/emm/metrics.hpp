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

// Batch evaluation of a monitored dataset. Every ratio whose denominator is
// zero is reported as std::nullopt ("undefined"), never as 0.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emm/core.hpp"

namespace emm {

inline std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct BaselineMetrics {
  ConfusionCounts counts;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> ppv;
  std::optional<double> npv;
  std::optional<double> accuracy;
};

/// Primary prediction vs ground truth. Throws InvalidInput if a record has no
/// ground truth.
BaselineMetrics baseline_metrics(std::span<const CaseRecord> cases);

struct AgreementCell {
  std::int64_t count = 0;
  std::int64_t correct = 0;
  std::optional<double> accuracy() const { return ratio(correct, count); }
  bool operator==(const AgreementCell&) const = default;
};

/// cells[class_index(label)][agreeing_count], agreeing_count in 0..K.
struct AccuracyByAgreementTable {
  int ensemble_size = 0;
  std::array<std::vector<AgreementCell>, 2> cells;

  const AgreementCell& at(BinaryLabel label, int agreeing_count) const {
    return cells[class_index(label)][static_cast<std::size_t>(agreeing_count)];
  }
  std::int64_t total() const;
};

AccuracyByAgreementTable accuracy_by_agreement(std::span<const CaseRecord> cases);

/// "class,level,count,accuracy" with one row per cell; level is the
/// agreeing count and an undefined accuracy is an empty field.
std::string to_csv(const AccuracyByAgreementTable& table);

struct CategoryCell {
  std::int64_t count = 0;
  std::int64_t labeled = 0;  // cases with ground truth
  std::int64_t correct = 0;
  std::optional<double> fraction;  // of the class; undefined when the class is empty
  std::optional<double> accuracy() const { return ratio(correct, labeled); }
};

/// Per prediction class and confidence category. Cases without ground truth
/// count toward the distribution but not toward accuracy.
struct CategoryReport {
  std::array<std::array<CategoryCell, 3>, 2> cells;  // [class_index][category_index]
  std::array<std::int64_t, 2> class_totals{};

  const CategoryCell& at(BinaryLabel label, ConfidenceCategory c) const {
    return cells[class_index(label)][category_index(c)];
  }
};

CategoryReport category_report(std::span<const CaseRecord> cases,
                               const StratificationPolicy& policy);

std::string to_csv(const CategoryReport& report);

/// Tradeoff for one prediction class, assuming every decreased-confidence
/// case is reviewed and the review yields the correct label.
struct ClassTradeoff {
  std::int64_t cases = 0;                // N
  std::int64_t baseline_correct = 0;
  std::int64_t decreased = 0;            // |D|
  std::int64_t decreased_correct = 0;    // false alarms
  std::int64_t decreased_incorrect = 0;  // corrections

  double baseline_accuracy() const { return static_cast<double>(baseline_correct) / cases; }
  double false_alarm_rate() const { return static_cast<double>(decreased_correct) / cases; }
  std::int64_t post_review_correct() const { return baseline_correct + decreased_incorrect; }
  double post_review_accuracy() const { return static_cast<double>(post_review_correct()) / cases; }
  /// Undefined when the baseline accuracy is zero.
  std::optional<double> relative_accuracy_improvement() const;
};

/// A class with no predictions is omitted (nullopt).
struct TradeoffReport {
  std::array<std::optional<ClassTradeoff>, 2> classes;
  const std::optional<ClassTradeoff>& of(BinaryLabel label) const {
    return classes[class_index(label)];
  }
};

TradeoffReport tradeoff_report(std::span<const CaseRecord> cases,
                               const StratificationPolicy& policy);

/// A case is flagged at threshold t iff its disagreement K - agreeing >= t.
/// The detection target is a primary error (primary != ground truth).
struct CurvePoint {
  int threshold = 0;
  std::int64_t flagged = 0;
  std::int64_t flagged_errors = 0;
  std::optional<double> sensitivity;
  std::optional<double> ppv;
  std::optional<double> specificity;
  std::optional<double> npv;
};

struct ErrorDetectionCurve {
  int ensemble_size = 0;
  std::int64_t cases = 0;
  std::int64_t errors = 0;
  std::vector<CurvePoint> points;  // thresholds 0..K+1, ascending
};

/// Throws CurveError when the dataset contains no primary errors, InvalidInput
/// when ground truth is missing.
ErrorDetectionCurve error_detection_curve(std::span<const CaseRecord> cases);

/// Curves restricted to each primary prediction class. A class with no
/// predictions or no errors is nullopt.
std::array<std::optional<ErrorDetectionCurve>, 2> error_detection_curves_by_class(
    std::span<const CaseRecord> cases);

struct AucSummary {
  double area = 0.0;     // trapezoidal area over the achieved x-range
  double x_min = 0.0;
  double x_max = 0.0;
  /// area / (x_max - x_min); for a zero-width range, the single collapsed y.
  double normalized = 0.0;
  std::size_t points_used = 0;
};

/// Sensitivity-PPV and specificity-NPV areas. Points are taken at thresholds
/// t >= 1 (t = 0 flags every case regardless of the ensemble), undefined y
/// values are dropped, equal x values collapse to their mean y, and the
/// trapezoids span only the x-range actually reached. Throw UndefinedAuc when
/// fewer than two defined points remain.
AucSummary ed_spauc_summary(const ErrorDetectionCurve& curve);
AucSummary ed_snauc_summary(const ErrorDetectionCurve& curve);
double ed_spauc(const ErrorDetectionCurve& curve);
double ed_snauc(const ErrorDetectionCurve& curve);

std::string to_csv(const ErrorDetectionCurve& curve);

}  // namespace emm
