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

// Longitudinal monitoring of the agreement-level distribution.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emm/core.hpp"

namespace emm {

/// Half-open interval [start_ms, end_ms) in UTC milliseconds.
struct TimeWindow {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  bool contains(std::int64_t ts) const { return ts >= start_ms && ts < end_ms; }
  bool operator==(const TimeWindow&) const = default;
};

struct AgreementHistogram {
  int ensemble_size = 0;
  TimeWindow window;
  /// counts[class_index(primary)][agreeing_count]
  std::array<std::vector<std::int64_t>, 2> counts;
  std::int64_t total = 0;

  AgreementHistogram() = default;
  AgreementHistogram(int ensemble_size, TimeWindow window);

  /// Adds one case regardless of its timestamp.
  void add(const CaseRecord& record);
  /// Sums counts; the window becomes the hull of both. K must match.
  AgreementHistogram& merge(const AgreementHistogram& other);
  std::int64_t class_total(BinaryLabel label) const;
};

/// Counts the cases with timestamp in [start, end). Throws InvalidInput when
/// start >= end or a record's K differs from `ensemble_size`.
AgreementHistogram window_histogram(std::span<const CaseRecord> records, TimeWindow window,
                                    int ensemble_size);

/// "class,level,count"
std::string to_csv(const AgreementHistogram& histogram);

/// Total-variation distance between the normalized count vectors. Both must
/// have the same length and a positive sum.
double total_variation(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

struct DriftConfig {
  double threshold = 0.15;
  std::int64_t min_count = 50;
};

struct ClassDrift {
  std::optional<double> divergence;  // nullopt: insufficient data
  std::int64_t baseline_total = 0;
  std::int64_t current_total = 0;
  bool insufficient_data() const { return !divergence; }
};

struct DriftVerdict {
  std::array<ClassDrift, 2> classes;  // by class_index
  bool alert = false;
  double threshold = 0.0;
  std::int64_t min_count = 0;
  TimeWindow baseline_window;
  TimeWindow current_window;
};

/// Per-class TV distance; a class with fewer than min_count cases in either
/// histogram is skipped and never alerts. alert iff any divergence exceeds
/// the threshold. Throws InvalidInput on K mismatch.
DriftVerdict drift_score(const AgreementHistogram& baseline, const AgreementHistogram& current,
                         const DriftConfig& config = {});

enum class BaselineMode {
  Pinned,   // every window is compared with the first one
  Rolling,  // every window is compared with its predecessor
};

std::string_view to_string(BaselineMode mode);
std::optional<BaselineMode> parse_baseline_mode(std::string_view text);

/// Consecutive windows of width_ms covering [start_ms, end_ms); the last one
/// may extend past end_ms.
std::vector<TimeWindow> tile_windows(std::int64_t start_ms, std::int64_t end_ms, std::int64_t width_ms);

/// Tiles [start_ms, end_ms) and scores every window after the first against
/// the baseline selected by `mode`.
std::vector<DriftVerdict> monitor_windows(std::span<const CaseRecord> records, int ensemble_size,
                                          std::int64_t start_ms, std::int64_t end_ms,
                                          std::int64_t width_ms, BaselineMode mode,
                                          const DriftConfig& config = {});

}  // namespace emm
