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

#include <gtest/gtest.h>

#include <random>

#include "emm/drift.hpp"
#include "emm/errors.hpp"
#include "fixtures.hpp"

namespace emm {
namespace {

using testing::kNeg;
using testing::kPos;
using testing::make_case;

AgreementHistogram positive_histogram(std::vector<std::int64_t> pos_counts) {
  AgreementHistogram h(static_cast<int>(pos_counts.size()) - 1, {0, 1});
  h.counts[class_index(kPos)] = pos_counts;
  for (auto c : pos_counts) h.total += c;
  return h;
}

TEST(Histogram, CountsLevelsPerClass) {
  const Dataset d = {make_case("a", kPos, 5, 5, {}, 10), make_case("b", kPos, 5, 5, {}, 20),
                     make_case("c", kPos, 3, 5, {}, 30)};
  const auto h = window_histogram(d, {0, 100}, 5);
  EXPECT_EQ(h.counts[class_index(kPos)], (std::vector<std::int64_t>{0, 0, 0, 1, 0, 2}));
  EXPECT_EQ(h.class_total(kNeg), 0);
  EXPECT_EQ(h.total, 3);
  const auto csv = to_csv(h);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,level,count");
  EXPECT_NE(csv.find("pos,5,2\n"), std::string::npos);
}

TEST(Histogram, EmptyAndHalfOpenWindows) {
  const Dataset d = {make_case("a", kPos, 5, 5, {}, 100), make_case("b", kNeg, 1, 5, {}, 99)};
  const auto empty = window_histogram(d, {200, 300}, 5);
  EXPECT_EQ(empty.total, 0);
  const auto h = window_histogram(d, {0, 100}, 5);
  EXPECT_EQ(h.total, 1);
  EXPECT_EQ(h.class_total(kPos), 0);
  EXPECT_THROW(window_histogram(d, {5, 5}, 5), InvalidInput);
}

TEST(TotalVariation, HandExamplesAndProperties) {
  const std::vector<std::int64_t> a = {50, 0, 0, 0, 0, 50}, b = {40, 0, 0, 0, 0, 60};
  EXPECT_NEAR(total_variation(a, b), 0.10, 1e-15);
  EXPECT_DOUBLE_EQ(total_variation(a, a), 0.0);
  const std::vector<std::int64_t> c = {0, 7, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(total_variation(a, c), 1.0);

  std::mt19937_64 gen(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::int64_t> x(6), y(6), x3(6);
    for (int j = 0; j < 6; ++j) {
      x[j] = 1 + static_cast<std::int64_t>(gen() % 50);
      y[j] = 1 + static_cast<std::int64_t>(gen() % 50);
      x3[j] = 3 * x[j];
    }
    const double d = total_variation(x, y);
    EXPECT_DOUBLE_EQ(d, total_variation(y, x));
    EXPECT_NEAR(total_variation(x3, y), d, 1e-12);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(DriftScore, AlertsOnlyAboveThresholdWithEnoughData) {
  const auto base = positive_histogram({50, 0, 0, 0, 0, 50});
  const auto same = drift_score(base, base);
  EXPECT_DOUBLE_EQ(*same.classes[class_index(kPos)].divergence, 0.0);
  EXPECT_FALSE(same.alert);

  const auto moved = drift_score(base, positive_histogram({0, 50, 0, 0, 50, 0}));
  EXPECT_DOUBLE_EQ(*moved.classes[class_index(kPos)].divergence, 1.0);
  EXPECT_TRUE(moved.alert);

  const auto mild = drift_score(base, positive_histogram({40, 0, 0, 0, 0, 60}));
  EXPECT_NEAR(*mild.classes[class_index(kPos)].divergence, 0.10, 1e-15);
  EXPECT_FALSE(mild.alert);

  const auto sparse = drift_score(base, positive_histogram({0, 10, 0, 0, 0, 0}));
  EXPECT_TRUE(sparse.classes[class_index(kPos)].insufficient_data());
  EXPECT_TRUE(sparse.classes[class_index(kNeg)].insufficient_data());
  EXPECT_FALSE(sparse.alert);

  EXPECT_THROW(drift_score(base, positive_histogram({1, 1, 1})), InvalidInput);
}

TEST(Monitor, PinnedAndRollingBaselines) {
  Dataset d;
  for (int i = 0; i < 300; ++i) {
    const int level = i < 200 ? 5 : 0;
    d.push_back(make_case("c" + std::to_string(i), kPos, level, 5, {}, i));
  }
  const auto windows = tile_windows(0, 300, 100);
  ASSERT_EQ(windows.size(), 3u);
  EXPECT_EQ(windows[2], (TimeWindow{200, 300}));

  const auto pinned = monitor_windows(d, 5, 0, 300, 100, BaselineMode::Pinned);
  ASSERT_EQ(pinned.size(), 2u);
  EXPECT_FALSE(pinned[0].alert);
  EXPECT_TRUE(pinned[1].alert);
  EXPECT_EQ(pinned[1].baseline_window, windows[0]);

  const auto rolling = monitor_windows(d, 5, 0, 300, 100, BaselineMode::Rolling);
  EXPECT_EQ(rolling[1].baseline_window, windows[1]);
  EXPECT_EQ(parse_baseline_mode("rolling"), BaselineMode::Rolling);
  EXPECT_FALSE(parse_baseline_mode("sliding"));
}

}  // namespace
}  // namespace emm
