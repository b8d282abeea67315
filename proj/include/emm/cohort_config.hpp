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

// Key-value cohort spec files (a TOML subset):
//
//   # comment
//   n_cases = 3000
//   prevalence = 0.45
//   primary_sensitivity = 0.85
//   primary_specificity = 0.98
//   sub_count = 5
//   sub_sensitivity = 0.9                      # one value for every sub-model
//   sub_specificity = [0.9, 0.9, 0.88, 0.9, 0.92]  # or one per sub-model
//   p_hard = 0.1
//   hard_error_multiplier = 4
//   seed = 7
//   start_timestamp_ms = 1700000000000
//   case_interval_ms = 60000
//   id_prefix = "case-"
//   cohort_tag = "ed"
//
// Missing keys keep the SyntheticCohortSpec defaults; unknown keys are errors.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "emm/simulator.hpp"

namespace emm {

/// Raw key -> value text (quotes stripped from strings). Throws InvalidInput
/// with the line number on syntax errors or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::istream& in);

SyntheticCohortSpec parse_cohort_spec(std::istream& in);
SyntheticCohortSpec load_cohort_spec(const std::filesystem::path& path);

}  // namespace emm
