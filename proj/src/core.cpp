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

#include "emm/core.hpp"

#include <algorithm>
#include <utility>

#include "emm/errors.hpp"

namespace emm {

std::string_view to_string(BinaryLabel label) {
  return label == BinaryLabel::Positive ? "pos" : "neg";
}

std::optional<BinaryLabel> parse_label(std::string_view text) {
  if (text == "pos") return BinaryLabel::Positive;
  if (text == "neg") return BinaryLabel::Negative;
  return std::nullopt;
}

int ensemble_size_of(std::span<const CaseRecord> cases) {
  if (cases.empty()) throw InvalidInput("empty dataset");
  const std::size_t k = cases.front().subs.size();
  if (k == 0) throw InvalidInput("case " + cases.front().case_id + " has no sub-model predictions");
  for (const auto& c : cases) {
    if (c.subs.size() != k) {
      throw InvalidInput("case " + c.case_id + " has " + std::to_string(c.subs.size()) +
                         " sub-model predictions, expected " + std::to_string(k));
    }
  }
  return static_cast<int>(k);
}

AgreementLevel::AgreementLevel(int agreeing_count, int ensemble_size)
    : agreeing_(agreeing_count), size_(ensemble_size) {
  if (ensemble_size < 1) throw InvalidInput("ensemble size must be at least 1");
  if (agreeing_count < 0 || agreeing_count > ensemble_size) {
    throw InvalidInput("agreeing count " + std::to_string(agreeing_count) + " outside [0, " +
                       std::to_string(ensemble_size) + "]");
  }
}

std::weak_ordering AgreementLevel::operator<=>(const AgreementLevel& other) const {
  const long long lhs = static_cast<long long>(agreeing_) * other.size_;
  const long long rhs = static_cast<long long>(other.agreeing_) * size_;
  return lhs <=> rhs;
}

std::string to_string(const AgreementLevel& level) {
  return std::to_string(level.agreeing_count()) + "/" + std::to_string(level.ensemble_size());
}

std::string_view to_string(ConfidenceCategory category) {
  switch (category) {
    case ConfidenceCategory::Increased:
      return "increased";
    case ConfidenceCategory::Similar:
      return "similar";
    case ConfidenceCategory::Decreased:
      return "decreased";
  }
  return "unknown";
}

std::optional<ConfidenceCategory> parse_category(std::string_view text) {
  for (auto c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

const std::vector<int>& LevelSets::of(ConfidenceCategory c) const {
  switch (c) {
    case ConfidenceCategory::Increased:
      return increased;
    case ConfidenceCategory::Similar:
      return similar;
    case ConfidenceCategory::Decreased:
      break;
  }
  return decreased;
}

std::vector<int>& LevelSets::of(ConfidenceCategory c) {
  return const_cast<std::vector<int>&>(std::as_const(*this).of(c));
}

std::array<std::string, 3> default_actions() {
  std::array<std::string, 3> actions;
  actions[category_index(ConfidenceCategory::Increased)] = "accept with increased confidence";
  actions[category_index(ConfidenceCategory::Similar)] = "interpret per usual protocol";
  actions[category_index(ConfidenceCategory::Decreased)] =
      "review per conventional interpretation protocol";
  return actions;
}

StratificationPolicy default_policy(int ensemble_size) {
  if (ensemble_size != 5) {
    throw UnsupportedEnsembleSize("no default thresholds for an ensemble of " +
                                  std::to_string(ensemble_size) +
                                  " sub-models; supply an explicit policy");
  }
  StratificationPolicy policy;
  policy.ensemble_size = 5;
  policy.positive = {.increased = {5}, .similar = {3, 4}, .decreased = {0, 1, 2}};
  policy.negative = {.increased = {5}, .similar = {1, 2, 3, 4}, .decreased = {0}};
  policy.actions = default_actions();
  return policy;
}

namespace {

void validate_class(const LevelSets& sets, BinaryLabel label, int k,
                    std::vector<PolicyViolation>& out) {
  const std::string cls(to_string(label));
  std::vector<std::optional<ConfidenceCategory>> assigned(static_cast<std::size_t>(k) + 1);

  for (auto c : kAllCategories) {
    for (int level : sets.of(c)) {
      if (level < 0 || level > k) {
        out.push_back({"level out of range", cls + " class lists level " + std::to_string(level) +
                                                 " outside 0.." + std::to_string(k)});
        continue;
      }
      auto& slot = assigned[static_cast<std::size_t>(level)];
      if (slot && *slot != c) {
        out.push_back({"overlapping categories",
                       cls + " class assigns level " + std::to_string(level) + "/" +
                           std::to_string(k) + " to both " + std::string(to_string(*slot)) +
                           " and " + std::string(to_string(c))});
      } else {
        slot = c;
      }
    }
  }
  for (int level = 0; level <= k; ++level) {
    if (!assigned[static_cast<std::size_t>(level)]) {
      out.push_back({"incomplete partition", cls + " class has no category for level " +
                                                 std::to_string(level) + "/" + std::to_string(k)});
    }
  }
  // Monotonicity is checked over whichever levels are covered.
  std::optional<ConfidenceCategory> previous;
  int previous_level = -1;
  for (int level = 0; level <= k; ++level) {
    const auto& cur = assigned[static_cast<std::size_t>(level)];
    if (!cur) continue;
    if (previous && category_index(*cur) < category_index(*previous)) {
      out.push_back({"non-monotone", cls + " class maps level " + std::to_string(previous_level) +
                                         "/" + std::to_string(k) + " to " +
                                         std::string(to_string(*previous)) + " but higher level " +
                                         std::to_string(level) + "/" + std::to_string(k) + " to " +
                                         std::string(to_string(*cur))});
      break;
    }
    previous = cur;
    previous_level = level;
  }
}

}  // namespace

PolicyValidation validate_policy(const StratificationPolicy& policy, int ensemble_size) {
  PolicyValidation result;
  if (ensemble_size < 1) {
    result.violations.push_back({"invalid ensemble size", "ensemble size must be at least 1"});
    return result;
  }
  if (policy.ensemble_size != ensemble_size) {
    result.violations.push_back(
        {"ensemble size mismatch", "policy is for K=" + std::to_string(policy.ensemble_size) +
                                       ", data has K=" + std::to_string(ensemble_size)});
    return result;
  }
  for (auto label : kBothClasses) {
    validate_class(policy.for_class(label), label, ensemble_size, result.violations);
  }
  return result;
}

AgreementLevel compute_agreement(BinaryLabel primary, std::span<const BinaryLabel> subs) {
  if (subs.empty()) throw InvalidInput("sub-model prediction list is empty");
  const auto agreeing = std::count(subs.begin(), subs.end(), primary);
  return AgreementLevel(static_cast<int>(agreeing), static_cast<int>(subs.size()));
}

AgreementLevel compute_agreement(const CaseRecord& record) {
  return compute_agreement(record.primary, record.subs);
}

ConfidenceCategory categorize(BinaryLabel primary, const AgreementLevel& agreement,
                              const StratificationPolicy& policy) {
  if (policy.ensemble_size != agreement.ensemble_size()) {
    throw InvalidInput("policy is for K=" + std::to_string(policy.ensemble_size) +
                       " but agreement level is " + to_string(agreement));
  }
  const LevelSets& sets = policy.for_class(primary);
  for (auto c : kAllCategories) {
    const auto& levels = sets.of(c);
    if (std::find(levels.begin(), levels.end(), agreement.agreeing_count()) != levels.end()) {
      return c;
    }
  }
  throw InvalidInput("policy has no category for " + std::string(to_string(primary)) +
                     " predictions at level " + to_string(agreement));
}

Stratification stratify(BinaryLabel primary, const AgreementLevel& agreement,
                        const StratificationPolicy& policy) {
  const auto category = categorize(primary, agreement, policy);
  return {category, policy.action(category)};
}

}  // namespace emm
