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

// Dataset builders and independent reference computations shared by the unit
// and acceptance tests. The oracles work straight from the case records and
// never call into the metrics module.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emm/core.hpp"
#include "emm/rng.hpp"

namespace emm::testing {

inline constexpr BinaryLabel kPos = BinaryLabel::Positive;
inline constexpr BinaryLabel kNeg = BinaryLabel::Negative;

/// A case whose first `agreeing` sub-models match the primary prediction.
inline CaseRecord make_case(const std::string& id, BinaryLabel primary, int agreeing, int k,
                            std::optional<BinaryLabel> truth, std::int64_t ts = 0) {
  CaseRecord r;
  r.case_id = id;
  r.timestamp_ms = ts;
  r.primary = primary;
  for (int j = 0; j < k; ++j) r.subs.push_back(j < agreeing ? primary : negate(primary));
  r.ground_truth = truth;
  return r;
}

/// Case with a given disagreement count and whether the primary is wrong.
inline CaseRecord make_error_case(const std::string& id, int disagreement, int k, bool error,
                                  BinaryLabel primary = kPos) {
  return make_case(id, primary, k - disagreement, k, error ? negate(primary) : primary);
}

/// Uniformly random labelled dataset drawn with the standard library engine.
inline Dataset random_dataset(std::mt19937_64& gen, std::size_t n, int k) {
  std::bernoulli_distribution coin(0.5);
  Dataset out;
  for (std::size_t i = 0; i < n; ++i) {
    CaseRecord r;
    r.case_id = "r" + std::to_string(i);
    r.timestamp_ms = static_cast<std::int64_t>(i);
    r.primary = coin(gen) ? kPos : kNeg;
    for (int j = 0; j < k; ++j) r.subs.push_back(coin(gen) ? kPos : kNeg);
    r.ground_truth = coin(gen) ? kPos : kNeg;
    out.push_back(std::move(r));
  }
  return out;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "emm-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::size_t line_count(const std::filesystem::path& path) {
  const auto text = read_file(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// Cases per (prediction class, full/partial agreement, correct/incorrect)
/// cell of the 2919-case reference partition.
struct PartitionCell {
  BinaryLabel primary;
  bool full;
  bool correct;
  int count;
};

inline const std::vector<PartitionCell>& reference_partition() {
  static const std::vector<PartitionCell> cells = {
      {kPos, true, true, 632},   {kPos, false, true, 151}, {kPos, false, false, 39},
      {kPos, true, false, 21},   {kNeg, true, true, 847},  {kNeg, false, true, 697},
      {kNeg, false, false, 415}, {kNeg, true, false, 117},
  };
  return cells;
}

/// K = 5 dataset realizing reference_partition(); partial-agreement cases
/// cycle through levels 0..4.
inline Dataset reference_partition_dataset() {
  Dataset out;
  int id = 0;
  for (const auto& cell : reference_partition()) {
    for (int i = 0; i < cell.count; ++i, ++id) {
      const int level = cell.full ? 5 : i % 5;
      const auto truth = cell.correct ? cell.primary : negate(cell.primary);
      out.push_back(make_case("ref-" + std::to_string(id), cell.primary, level, 5, truth, id * 1000LL));
    }
  }
  return out;
}

enum class OracleCurve { SensitivityPpv, SpecificityNpv };

/// Brute-force error-detection area: enumerate thresholds 1..K+1 over the raw
/// cases, keep defined points, average y over equal x, trapezoid over the
/// reached x-range. nullopt when fewer than two points survive.
struct OracleAuc {
  double area = 0.0;
  double normalized = 0.0;
};

inline std::optional<OracleAuc> oracle_auc(const Dataset& cases, OracleCurve which) {
  const int k = static_cast<int>(cases.front().subs.size());
  std::map<double, std::vector<double>> by_x;
  for (int t = 1; t <= k + 1; ++t) {
    long tp = 0, fp = 0, tn = 0, fn = 0;  // positive = flagged, condition = error
    for (const auto& c : cases) {
      int disagree = 0;
      for (auto s : c.subs) disagree += (s != c.primary);
      const bool flagged = disagree >= t;
      const bool error = *c.ground_truth != c.primary;
      if (flagged && error) ++tp;
      if (flagged && !error) ++fp;
      if (!flagged && !error) ++tn;
      if (!flagged && error) ++fn;
    }
    double x = 0.0, y = 0.0;
    if (which == OracleCurve::SensitivityPpv) {
      if (tp + fn == 0 || tp + fp == 0) continue;
      x = double(tp) / double(tp + fn);
      y = double(tp) / double(tp + fp);
    } else {
      if (tn + fp == 0 || tn + fn == 0) continue;
      x = double(tn) / double(tn + fp);
      y = double(tn) / double(tn + fn);
    }
    by_x[x].push_back(y);
  }
  if (by_x.empty()) return std::nullopt;
  std::vector<std::pair<double, double>> pts;
  std::size_t raw = 0;
  for (const auto& [x, ys] : by_x) {
    double s = 0.0;
    for (double y : ys) s += y;
    pts.emplace_back(x, s / double(ys.size()));
    raw += ys.size();
  }
  if (raw < 2) return std::nullopt;
  OracleAuc out;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    out.area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  const double width = pts.back().first - pts.front().first;
  out.normalized = width > 0.0 ? out.area / width : pts.front().second;
  return out;
}

/// Percentile bootstrap written out longhand with the shared stream contract:
/// draw d reads Philox stream (seed, d), one bounded index per case.
inline std::pair<double, double> oracle_bootstrap_accuracy(const Dataset& cases, int n_draws,
                                                           std::uint64_t seed) {
  std::vector<double> stats;
  for (int d = 0; d < n_draws; ++d) {
    PhiloxStream rng(seed, static_cast<std::uint64_t>(d));
    long correct = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto& c = cases[rng.uniform_index(cases.size())];
      correct += (*c.ground_truth == c.primary);
    }
    stats.push_back(double(correct) / double(cases.size()));
  }
  std::sort(stats.begin(), stats.end());
  auto q = [&stats](double p) {
    const double h = p * double(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const auto hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (h - double(lo)) * (stats[hi] - stats[lo]);
  };
  return {q(0.025), q(0.975)};
}

}  // namespace emm::testing
