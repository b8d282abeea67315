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

// Domain types for ensemble-agreement monitoring of a black-box binary
// classifier: the case record, the exact agreement level, and the policy that
// maps agreement levels to confidence categories.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emm {

enum class BinaryLabel : std::uint8_t { Negative = 0, Positive = 1 };

constexpr BinaryLabel negate(BinaryLabel label) {
  return label == BinaryLabel::Positive ? BinaryLabel::Negative : BinaryLabel::Positive;
}

/// Wire spelling: "pos" / "neg".
std::string_view to_string(BinaryLabel label);
std::optional<BinaryLabel> parse_label(std::string_view text);

/// Index used for per-class arrays: Negative = 0, Positive = 1.
constexpr std::size_t class_index(BinaryLabel label) { return static_cast<std::size_t>(label); }
inline constexpr std::array<BinaryLabel, 2> kBothClasses = {BinaryLabel::Positive,
                                                            BinaryLabel::Negative};

struct CaseRecord {
  std::string case_id;
  std::int64_t timestamp_ms = 0;
  BinaryLabel primary = BinaryLabel::Negative;
  std::vector<BinaryLabel> subs;
  std::optional<BinaryLabel> ground_truth;
  std::optional<std::string> cohort_tag;

  bool operator==(const CaseRecord&) const = default;

  bool primary_correct() const { return ground_truth && *ground_truth == primary; }
};

using Dataset = std::vector<CaseRecord>;

/// Shared ensemble size K of a dataset. Throws InvalidInput if the dataset is
/// empty or the records disagree on K.
int ensemble_size_of(std::span<const CaseRecord> cases);

/// Number of ensemble members agreeing with the primary prediction, out of K.
/// Held as an integer pair so threshold comparisons never round.
class AgreementLevel {
 public:
  AgreementLevel(int agreeing_count, int ensemble_size);

  int agreeing_count() const { return agreeing_; }
  int ensemble_size() const { return size_; }
  int disagreement() const { return size_ - agreeing_; }
  double fraction() const { return static_cast<double>(agreeing_) / size_; }

  bool operator==(const AgreementLevel&) const = default;
  /// Compares the fractions exactly (cross-multiplied), so 2/4 == 1/2 in order.
  std::weak_ordering operator<=>(const AgreementLevel& other) const;

 private:
  int agreeing_;
  int size_;
};

/// "3/5"
std::string to_string(const AgreementLevel& level);

enum class ConfidenceCategory : std::uint8_t { Decreased = 0, Similar = 1, Increased = 2 };

inline constexpr std::array<ConfidenceCategory, 3> kAllCategories = {
    ConfidenceCategory::Increased, ConfidenceCategory::Similar, ConfidenceCategory::Decreased};

constexpr std::size_t category_index(ConfidenceCategory c) { return static_cast<std::size_t>(c); }

/// "increased" / "similar" / "decreased".
std::string_view to_string(ConfidenceCategory category);
std::optional<ConfidenceCategory> parse_category(std::string_view text);

/// Agreement counts (0..K) assigned to each category for one prediction class.
struct LevelSets {
  std::vector<int> increased;
  std::vector<int> similar;
  std::vector<int> decreased;

  const std::vector<int>& of(ConfidenceCategory c) const;
  std::vector<int>& of(ConfidenceCategory c);
  bool operator==(const LevelSets&) const = default;
};

struct StratificationPolicy {
  int ensemble_size = 0;
  LevelSets positive;
  LevelSets negative;
  /// Suggested action text, indexed by category_index().
  std::array<std::string, 3> actions;

  const LevelSets& for_class(BinaryLabel label) const {
    return label == BinaryLabel::Positive ? positive : negative;
  }
  LevelSets& for_class(BinaryLabel label) {
    return label == BinaryLabel::Positive ? positive : negative;
  }
  const std::string& action(ConfidenceCategory c) const { return actions[category_index(c)]; }

  bool operator==(const StratificationPolicy&) const = default;
};

std::array<std::string, 3> default_actions();

/// The thresholds used with a five-member ensemble. Only K = 5 is defined;
/// any other K throws UnsupportedEnsembleSize.
StratificationPolicy default_policy(int ensemble_size);

struct PolicyViolation {
  std::string kind;    // "incomplete partition", "non-monotone", ...
  std::string detail;
  bool operator==(const PolicyViolation&) const = default;
};

struct PolicyValidation {
  std::vector<PolicyViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that each class's level sets partition {0..K} and that the
/// category never drops as agreement rises. Never throws.
PolicyValidation validate_policy(const StratificationPolicy& policy, int ensemble_size);

AgreementLevel compute_agreement(BinaryLabel primary, std::span<const BinaryLabel> subs);
AgreementLevel compute_agreement(const CaseRecord& record);

struct Stratification {
  ConfidenceCategory category;
  std::string action;
  bool operator==(const Stratification&) const = default;
};

/// Throws InvalidInput if the policy's K differs from the level's, or the
/// policy does not cover the level.
Stratification stratify(BinaryLabel primary, const AgreementLevel& agreement,
                        const StratificationPolicy& policy);

/// Category only; same contract as stratify().
ConfidenceCategory categorize(BinaryLabel primary, const AgreementLevel& agreement,
                              const StratificationPolicy& policy);

}  // namespace emm
