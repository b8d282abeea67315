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

#include <sstream>

#include "emm/cli.hpp"
#include "emm/cohort_config.hpp"
#include "emm/json_io.hpp"
#include "emm/simulator.hpp"
#include "fixtures.hpp"

namespace emm {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::write_text(dir / "s.toml",
                        "n_cases = 200\nprevalence = 0.4\nprimary_sensitivity = 0.85\n"
                        "primary_specificity = 0.95\nsub_sensitivity = 0.85\nsub_specificity = 0.85\n"
                        "p_hard = 0.15\nhard_error_multiplier = 3\nseed = 1\n");
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  testing::TempDir dir;
};

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"evaluate", "--in", p("x"), "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"evaluate", "--in", p("x"), "--resample-mode", "fancy"}).code, cli::kExitUsage);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  EXPECT_NE(help.out.find("simulate"), std::string::npos);
}

TEST_F(CliTest, EmptyDatasetExitsTwo) {
  testing::write_text(dir / "empty.jsonl", "");
  const auto r = run({"evaluate", "--in", p("empty.jsonl")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("empty dataset"), std::string::npos);
  EXPECT_EQ(run({"evaluate", "--in", p("missing.jsonl")}).code, cli::kExitData);
}

TEST_F(CliTest, SimulateIsByteIdenticalAndPrintsSeed) {
  const auto a = run({"simulate", "--spec", p("s.toml"), "--seed", "7"});
  const auto b = run({"simulate", "--spec", p("s.toml"), "--seed", "7", "--threads", "3"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.err.find("seed=7"), std::string::npos);
  auto spec = load_cohort_spec(dir / "s.toml");
  spec.seed = 7;
  std::ostringstream direct;
  write_dataset(direct, generate_cohort(spec));
  EXPECT_EQ(a.out, direct.str());
  EXPECT_EQ(run({"simulate", "--spec", p("s.toml"), "--out", p("c.jsonl")}).code, 0);
  EXPECT_EQ(testing::line_count(dir / "c.jsonl"), 200u);
}

TEST_F(CliTest, EvaluateMatchesLibraryAndOracle) {
  ASSERT_EQ(run({"simulate", "--spec", p("s.toml"), "--seed", "7", "--out", p("c.jsonl")}).code, 0);
  const auto r = run({"evaluate", "--in", p("c.jsonl"), "--prevalence", "0.05", "--draws", "1000", "--seed", "7",
                      "--csv-dir", p("csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("seed=7"), std::string::npos);

  const auto cases = load_dataset(dir / "c.jsonl").cases;
  const auto report = evaluate(cases, default_policy(5), {.prevalence = 0.05, .n_draws = 1000, .seed = 7});
  EXPECT_EQ(r.out, json_of(report).dump(2) + "\n");

  const auto j = nlohmann::json::parse(r.out);
  const auto evaluated = resample_to_prevalence(cases, {0.05, ResampleMode::Exact, 7});
  const auto sp = testing::oracle_auc(evaluated, testing::OracleCurve::SensitivityPpv);
  const auto sn = testing::oracle_auc(evaluated, testing::OracleCurve::SpecificityNpv);
  ASSERT_TRUE(sp && sn);
  const auto& m_sp = j["metrics"]["ed_spauc"];
  const auto& m_sn = j["metrics"]["ed_snauc"];
  EXPECT_NEAR(m_sp["value"].get<double>(), sp->area, 1e-12);
  EXPECT_NEAR(m_sn["value"].get<double>(), sn->area, 1e-12);
  for (const auto* m : {&m_sp, &m_sn}) {
    ASSERT_FALSE((*m)["ci_low"].is_null());
    EXPECT_LE((*m)["ci_low"].get<double>(), (*m)["ci_high"].get<double>());
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "csv" / "categories.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "csv" / "accuracy_by_agreement.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "csv" / "error_detection_curve.csv"));

  const auto threaded = run({"evaluate", "--in", p("c.jsonl"), "--prevalence", "0.05", "--draws", "1000",
                             "--seed", "7", "--threads", "4"});
  EXPECT_EQ(threaded.out, r.out);
}

TEST_F(CliTest, StratifyResampleAndDrift) {
  ASSERT_EQ(run({"simulate", "--spec", p("s.toml"), "--out", p("c.jsonl")}).code, 0);
  const auto cases = load_dataset(dir / "c.jsonl").cases;

  const auto s = run({"stratify", "--in", p("c.jsonl")});
  ASSERT_EQ(s.code, 0);
  std::istringstream lines(s.out);
  std::string line;
  std::size_t i = 0;
  for (; std::getline(lines, line); ++i) {
    const auto j = nlohmann::json::parse(line);
    const auto expected = stratify(cases[i].primary, compute_agreement(cases[i]), default_policy(5));
    EXPECT_EQ(j["case_id"], cases[i].case_id);
    EXPECT_EQ(j["category"], std::string(to_string(expected.category)));
  }
  EXPECT_EQ(i, cases.size());

  const auto a = run({"resample", "--in", p("c.jsonl"), "--prevalence", "0.15", "--seed", "3"});
  ASSERT_EQ(a.code, 0);
  std::ostringstream direct;
  write_dataset(direct, resample_to_prevalence(cases, {0.15, ResampleMode::Exact, 3}));
  EXPECT_EQ(a.out, direct.str());
  EXPECT_NE(a.err.find("seed=3"), std::string::npos);
  EXPECT_EQ(run({"resample", "--in", p("c.jsonl"), "--prevalence", "0.15", "--seed", "3"}).out, a.out);

  const auto d = run({"drift", "--in", p("c.jsonl"), "--window-ms", "3000000", "--baseline", "rolling",
                      "--csv-dir", p("hist")});
  ASSERT_EQ(d.code, 0) << d.err;
  const auto verdicts = nlohmann::json::parse(d.out);
  EXPECT_EQ(verdicts.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir / "hist" / "window_000.csv"));
}

TEST_F(CliTest, InvalidPolicyIsDataError) {
  ASSERT_EQ(run({"simulate", "--spec", p("s.toml"), "--out", p("c.jsonl")}).code, 0);
  auto bad = json_of(default_policy(5));
  bad["positive"]["decreased"] = {0};
  testing::write_text(dir / "bad.json", bad.dump());
  const auto r = run({"evaluate", "--in", p("c.jsonl"), "--policy", p("bad.json")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("incomplete partition"), std::string::npos);
}

}  // namespace
}  // namespace emm
