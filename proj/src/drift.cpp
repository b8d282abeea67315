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

#include "emm/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "emm/errors.hpp"

namespace emm {

AgreementHistogram::AgreementHistogram(int k, TimeWindow w) : ensemble_size(k), window(w) {
  if (k < 1) throw InvalidInput("ensemble size must be at least 1");
  for (auto& row : counts) row.assign(static_cast<std::size_t>(k) + 1, 0);
}

void AgreementHistogram::add(const CaseRecord& record) {
  if (static_cast<int>(record.subs.size()) != ensemble_size) {
    throw InvalidInput("case " + record.case_id + " has K=" + std::to_string(record.subs.size()) +
                       ", histogram has K=" + std::to_string(ensemble_size));
  }
  const auto level = compute_agreement(record);
  ++counts[class_index(record.primary)][static_cast<std::size_t>(level.agreeing_count())];
  ++total;
}

AgreementHistogram& AgreementHistogram::merge(const AgreementHistogram& other) {
  if (other.ensemble_size != ensemble_size) throw InvalidInput("cannot merge histograms with different K");
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < counts[c].size(); ++i) counts[c][i] += other.counts[c][i];
  }
  total += other.total;
  window.start_ms = std::min(window.start_ms, other.window.start_ms);
  window.end_ms = std::max(window.end_ms, other.window.end_ms);
  return *this;
}

std::int64_t AgreementHistogram::class_total(BinaryLabel label) const {
  const auto& row = counts[class_index(label)];
  return std::accumulate(row.begin(), row.end(), std::int64_t{0});
}

AgreementHistogram window_histogram(std::span<const CaseRecord> records, TimeWindow window,
                                    int ensemble_size) {
  if (window.start_ms >= window.end_ms) {
    throw InvalidInput("window start must precede window end");
  }
  AgreementHistogram h(ensemble_size, window);
  for (const auto& r : records) {
    if (window.contains(r.timestamp_ms)) h.add(r);
  }
  return h;
}

std::string to_csv(const AgreementHistogram& histogram) {
  std::ostringstream os;
  os << "class,level,count\n";
  for (auto label : kBothClasses) {
    const auto& row = histogram.counts[class_index(label)];
    for (std::size_t level = 0; level < row.size(); ++level) {
      os << to_string(label) << ',' << level << ',' << row[level] << '\n';
    }
  }
  return os.str();
}

double total_variation(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.size() != b.size()) throw InvalidInput("histograms differ in length");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::int64_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::int64_t{0}));
  if (na <= 0.0 || nb <= 0.0) throw InvalidInput("total variation of an empty histogram");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(static_cast<double>(a[i]) / na - static_cast<double>(b[i]) / nb);
  }
  return std::min(1.0, sum / 2.0);
}

DriftVerdict drift_score(const AgreementHistogram& baseline, const AgreementHistogram& current,
                         const DriftConfig& config) {
  if (baseline.ensemble_size != current.ensemble_size) {
    throw InvalidInput("baseline K=" + std::to_string(baseline.ensemble_size) +
                       " differs from current K=" + std::to_string(current.ensemble_size));
  }
  DriftVerdict v;
  v.threshold = config.threshold;
  v.min_count = config.min_count;
  v.baseline_window = baseline.window;
  v.current_window = current.window;
  for (auto label : kBothClasses) {
    auto& cd = v.classes[class_index(label)];
    cd.baseline_total = baseline.class_total(label);
    cd.current_total = current.class_total(label);
    const std::int64_t floor = std::max<std::int64_t>(config.min_count, 1);
    if (cd.baseline_total < floor || cd.current_total < floor) continue;
    cd.divergence = total_variation(baseline.counts[class_index(label)],
                                    current.counts[class_index(label)]);
    if (*cd.divergence > config.threshold) v.alert = true;
  }
  return v;
}

std::string_view to_string(BaselineMode mode) {
  return mode == BaselineMode::Pinned ? "pinned" : "rolling";
}

std::optional<BaselineMode> parse_baseline_mode(std::string_view text) {
  if (text == "pinned") return BaselineMode::Pinned;
  if (text == "rolling") return BaselineMode::Rolling;
  return std::nullopt;
}

std::vector<TimeWindow> tile_windows(std::int64_t start_ms, std::int64_t end_ms, std::int64_t width_ms) {
  if (width_ms <= 0) throw InvalidInput("window width must be positive");
  if (start_ms >= end_ms) throw InvalidInput("window start must precede window end");
  std::vector<TimeWindow> out;
  for (std::int64_t s = start_ms; s < end_ms; s += width_ms) out.push_back({s, s + width_ms});
  return out;
}

std::vector<DriftVerdict> monitor_windows(std::span<const CaseRecord> records, int ensemble_size,
                                          std::int64_t start_ms, std::int64_t end_ms,
                                          std::int64_t width_ms, BaselineMode mode,
                                          const DriftConfig& config) {
  const auto windows = tile_windows(start_ms, end_ms, width_ms);
  std::vector<AgreementHistogram> hist;
  hist.reserve(windows.size());
  for (const auto& w : windows) hist.emplace_back(ensemble_size, w);
  const std::int64_t limit = windows.back().end_ms;
  for (const auto& r : records) {
    if (r.timestamp_ms < start_ms || r.timestamp_ms >= limit) continue;
    hist[static_cast<std::size_t>((r.timestamp_ms - start_ms) / width_ms)].add(r);
  }
  std::vector<DriftVerdict> out;
  for (std::size_t i = 1; i < hist.size(); ++i) {
    const auto& base = mode == BaselineMode::Pinned ? hist.front() : hist[i - 1];
    out.push_back(drift_score(base, hist[i], config));
  }
  return out;
}

}  // namespace emm
