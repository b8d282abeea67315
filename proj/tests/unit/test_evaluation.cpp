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

#include <cmath>

#include "emm/errors.hpp"
#include "emm/evaluation.hpp"
#include "emm/json_io.hpp"
#include "emm/simulator.hpp"
#include "fixtures.hpp"

namespace emm {
namespace {

using testing::kNeg;
using testing::kPos;

Dataset cohort(std::int64_t n, std::uint64_t seed) {
  SyntheticCohortSpec s;
  s.n_cases = n;
  s.prevalence = 0.4;
  s.primary = {0.85, 0.95};
  s.subs.assign(5, {0.85, 0.85});
  s.p_hard = 0.15;
  s.hard_error_multiplier = 3;
  s.seed = seed;
  return generate_cohort(s);
}

TEST(Evaluate, NativeReportEqualsDirectMetricCalls) {
  const auto d = cohort(800, 1);
  const auto policy = default_policy(5);
  const auto r = evaluate(d, policy, {.n_draws = 0});
  EXPECT_EQ(r.evaluated_cases, 800);
  EXPECT_EQ(*r.find("baseline.accuracy")->value, *baseline_metrics(d).accuracy);
  EXPECT_EQ(*r.find("ed_spauc")->value, ed_spauc(error_detection_curve(d)));
  EXPECT_EQ(*r.find("ed_snauc_normalized")->value, ed_snauc_summary(error_detection_curve(d)).normalized);
  const auto t = tradeoff_report(d, policy).of(kPos);
  EXPECT_EQ(*r.find("tradeoff.pos.false_alarm_rate")->value, t->false_alarm_rate());
  EXPECT_EQ(r.metrics.size(), scalar_metric_names().size());
  EXPECT_FALSE(r.find("ed_spauc")->interval.has_value());
}

TEST(Evaluate, IntervalsAreDeterministicAndThreadIndependent) {
  const auto d = cohort(400, 2);
  const auto policy = default_policy(5);
  const auto a = evaluate(d, policy, {.prevalence = 0.05, .n_draws = 60, .seed = 7, .threads = 1});
  const auto b = evaluate(d, policy, {.prevalence = 0.05, .n_draws = 60, .seed = 7, .threads = 3});
  EXPECT_EQ(json_of(a).dump(), json_of(b).dump());
  const auto* spauc = a.find("ed_spauc");
  ASSERT_TRUE(spauc->interval && spauc->interval->ci_low);
  EXPECT_LE(*spauc->interval->ci_low, *spauc->interval->ci_high);
}

TEST(Evaluate, PrevalenceResamplingRealizesTarget) {
  const auto d = cohort(1000, 3);
  for (double rho : {0.3, 0.15, 0.05}) {
    const auto r = evaluate(d, default_policy(5), {.prevalence = rho, .n_draws = 0});
    EXPECT_LE(std::abs(*r.realized_prevalence - rho), 1.0 / double(r.evaluated_cases));
    EXPECT_EQ(*r.design_prevalence, rho);
  }
}

TEST(Evaluate, UnlabeledDataKeepsDistributionOnly) {
  auto d = cohort(200, 4);
  for (auto& c : d) c.ground_truth.reset();
  const auto r = evaluate(d, default_policy(5), {});
  EXPECT_EQ(r.categories.class_totals[0] + r.categories.class_totals[1], 200);
  EXPECT_FALSE(r.baseline.has_value());
  EXPECT_FALSE(r.find("baseline.accuracy")->value.has_value());
  EXPECT_TRUE(r.find("category.pos.increased.fraction")->value.has_value());
  EXPECT_FALSE(r.find("category.pos.increased.accuracy")->value.has_value());
  EXPECT_FALSE(r.notes.empty());
}

TEST(Evaluate, ErrorFreeDataHasNoCurve) {
  Dataset d;
  for (int i = 0; i < 10; ++i) d.push_back(testing::make_case("c" + std::to_string(i), kNeg, 5, 5, kNeg));
  const auto r = evaluate(d, default_policy(5), {.n_draws = 0});
  EXPECT_TRUE(r.baseline.has_value());
  EXPECT_FALSE(r.curve.has_value());
  EXPECT_FALSE(r.find("ed_spauc")->value.has_value());
}

TEST(Evaluate, RejectsEmptyAndMismatchedInput) {
  EXPECT_THROW(evaluate(Dataset{}, default_policy(5), {}), InvalidInput);
  Dataset d = {testing::make_case("a", kPos, 2, 3, kPos)};
  EXPECT_THROW(evaluate(d, default_policy(5), {}), InvalidInput);
}

TEST(JsonIo, PolicyRoundTrip) {
  const auto p = default_policy(5);
  const auto j = json_of(p);
  EXPECT_EQ(policy_from_json(nlohmann::json::parse(j.dump())), p);
  EXPECT_THROW(policy_from_json(nlohmann::json::parse(R"({"ensemble_size": 5})")), InvalidInput);
}

TEST(JsonIo, CaseRecordUsesStoreFieldNames) {
  auto c = testing::make_case("x1", kPos, 4, 5, kNeg, 123);
  c.cohort_tag = "ed";
  const auto j = json_of(c);
  EXPECT_EQ(j.dump(),
            R"({"v":1,"kind":"prediction","case_id":"x1","ts":123,"primary":"pos",)"
            R"("subs":["pos","pos","pos","pos","neg"],"truth":"neg","cohort":"ed"})");
  EXPECT_EQ(case_record_from_json(nlohmann::json::parse(j.dump())), c);
}

}  // namespace
}  // namespace emm
