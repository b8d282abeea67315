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

#include "emm/errors.hpp"
#include "emm/metrics.hpp"
#include "emm/resample.hpp"
#include "emm/rng.hpp"
#include "fixtures.hpp"

namespace emm {
namespace {

using testing::kNeg;
using testing::kPos;
using testing::make_case;

// Reference vectors published with the Philox4x32-10 algorithm.
TEST(Philox, KnownAnswers) {
  using Block = std::array<std::uint32_t, 4>;
  EXPECT_EQ(PhiloxStream::generate_block(0, 0, 0), (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(PhiloxStream::generate_block(~0ULL, ~0ULL, ~0ULL),
            (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(PhiloxStream::generate_block(0x299f31d0a4093822ULL, 0x85a308d3243f6a88ULL, 0x0370734413198a2eULL),
            (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  PhiloxStream a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    differs |= x != c.next_u32();
  }
  EXPECT_TRUE(differs);
}

TEST(Philox, BoundedDrawsStayInRangeAndLookUniform) {
  PhiloxStream rng(1, 0);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(ResampleCounts, PublishedAndExactArithmetic) {
  const auto lit = resample_counts(1604, {0.3, ResampleMode::PaperLiteral, 0});
  EXPECT_EQ(lit.positives, 481);
  EXPECT_EQ(lit.negatives, 1604);
  EXPECT_EQ(resample_counts(1604, {0.3, ResampleMode::Exact, 0}).positives, 687);
  EXPECT_EQ(resample_counts(100, {0.5, ResampleMode::Exact, 0}).positives, 100);
  EXPECT_THROW(resample_counts(100, {1.0, ResampleMode::Exact, 0}), InvalidInput);
  EXPECT_THROW(resample_counts(100, {0.0, ResampleMode::Exact, 0}), InvalidInput);
}

Dataset labelled(int pos, int neg) {
  Dataset d;
  for (int i = 0; i < pos; ++i) d.push_back(make_case("p" + std::to_string(i), kPos, 5, 5, kPos));
  for (int i = 0; i < neg; ++i) d.push_back(make_case("n" + std::to_string(i), kNeg, 4, 5, kNeg));
  return d;
}

TEST(Resample, ExactModeHitsTargetWithinOneCase) {
  const auto source = labelled(123, 1604);
  for (double rho : {0.30, 0.15, 0.05}) {
    const auto out = resample_to_prevalence(source, {rho, ResampleMode::Exact, 9});
    std::int64_t pos = 0;
    for (const auto& c : out) pos += *c.ground_truth == kPos;
    const double realized = double(pos) / double(out.size());
    EXPECT_LE(std::abs(realized - rho), 1.0 / double(out.size())) << rho;
  }
}

TEST(Resample, PaperLiteralCountsAndOrdering) {
  const auto out = resample_to_prevalence(labelled(50, 1604), {0.3, ResampleMode::PaperLiteral, 4});
  ASSERT_EQ(out.size(), 481u + 1604u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(*out[i].ground_truth, i < 481 ? kPos : kNeg);
  }
  EXPECT_EQ(out[5].case_id.substr(out[5].case_id.find('#')), "#5");
}

TEST(Resample, DeterministicPerSeed) {
  const auto src = labelled(30, 70);
  const auto a = resample_to_prevalence(src, {0.2, ResampleMode::Exact, 11});
  EXPECT_EQ(a, resample_to_prevalence(src, {0.2, ResampleMode::Exact, 11}));
  EXPECT_NE(a, resample_to_prevalence(src, {0.2, ResampleMode::Exact, 12}));
}

TEST(Resample, RejectsUnusableInput) {
  EXPECT_THROW(resample_to_prevalence(labelled(0, 10), {0.3, ResampleMode::Exact, 0}), InvalidInput);
  auto d = labelled(3, 3);
  d[0].ground_truth.reset();
  EXPECT_THROW(resample_to_prevalence(d, {0.3, ResampleMode::Exact, 0}), InvalidInput);
}

TEST(Percentile, LinearInterpolation) {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 1.0), 10.0);
  EXPECT_DOUBLE_EQ(percentile(v, 0.5), 5.5);
  EXPECT_NEAR(percentile(v, 0.025), 1.225, 1e-12);
  EXPECT_NEAR(percentile(v, 0.975), 9.775, 1e-12);
  EXPECT_THROW(percentile(std::vector<double>{}, 0.5), InvalidInput);
}

std::optional<double> accuracy(std::span<const CaseRecord> s) { return baseline_metrics(s).accuracy; }

Dataset eighty_of_hundred() {
  Dataset d;
  for (int i = 0; i < 100; ++i) d.push_back(make_case("a" + std::to_string(i), kPos, 5, 5, i < 80 ? kPos : kNeg));
  return d;
}

TEST(Bootstrap, MatchesIndependentImplementation) {
  const auto d = eighty_of_hundred();
  const auto r = bootstrap_ci(accuracy, d, 1000, 42);
  const auto [lo, hi] = testing::oracle_bootstrap_accuracy(d, 1000, 42);
  EXPECT_DOUBLE_EQ(r.point_estimate, 0.8);
  EXPECT_LT(r.ci_low, 0.8);
  EXPECT_GT(r.ci_high, 0.8);
  EXPECT_NEAR(r.ci_low, lo, 1e-12);
  EXPECT_NEAR(r.ci_high, hi, 1e-12);
  EXPECT_EQ(r.seed, 42u);
}

TEST(Bootstrap, ConstantMetricDeterminismAndThreads) {
  const auto d = eighty_of_hundred();
  const auto c = bootstrap_ci([](std::span<const CaseRecord>) { return std::optional<double>(3.5); }, d, 200, 1);
  EXPECT_EQ(c.ci_low, 3.5);
  EXPECT_EQ(c.ci_high, 3.5);
  const auto a = bootstrap_ci(accuracy, d, 300, 8, 1);
  const auto b = bootstrap_ci(accuracy, d, 300, 8, 4);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
}

TEST(Bootstrap, UndefinedMetricsAreReported) {
  const auto d = eighty_of_hundred();
  EXPECT_THROW(bootstrap_ci([](std::span<const CaseRecord>) { return std::optional<double>(); }, d, 10, 1),
               InvalidInput);
  int calls = 0;
  auto flaky = [&calls](std::span<const CaseRecord>) -> std::optional<double> {
    return calls++ == 0 ? std::optional<double>(1.0) : std::nullopt;
  };
  EXPECT_THROW(bootstrap_ci(flaky, d, 10, 1), UnstableMetric);
}

TEST(PairedPValue, IdenticalAndDominatedPairs) {
  const auto a = eighty_of_hundred();
  EXPECT_DOUBLE_EQ(bootstrap_paired_pvalue(accuracy, a, a, 500, 3), 1.0);

  Dataset good, bad;
  for (int i = 0; i < 40; ++i) {
    good.push_back(make_case("c" + std::to_string(i), kPos, 5, 5, kPos));
    bad.push_back(make_case("c" + std::to_string(39 - i), kPos, 5, 5, kNeg));
  }
  EXPECT_DOUBLE_EQ(bootstrap_paired_pvalue(accuracy, good, bad, 999, 3), 2.0 / 1000.0);
  EXPECT_EQ(bootstrap_paired_pvalue(accuracy, a, eighty_of_hundred(), 50, 9),
            bootstrap_paired_pvalue(accuracy, a, eighty_of_hundred(), 50, 9));
}

TEST(PairedPValue, RequiresMatchingIds) {
  auto a = eighty_of_hundred();
  auto b = a;
  b[0].case_id = "other";
  EXPECT_THROW(bootstrap_paired_pvalue(accuracy, a, b, 10, 1), InvalidInput);
}

}  // namespace
}  // namespace emm
