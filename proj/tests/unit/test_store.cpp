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
#include <thread>

#include "emm/errors.hpp"
#include "emm/store.hpp"
#include "fixtures.hpp"

namespace emm {
namespace {

using testing::kNeg;
using testing::kPos;
using testing::make_case;

TEST(Serialize, FixedFieldOrder) {
  auto c = make_case("c-1", kNeg, 3, 5, std::nullopt, 1700000000000);
  EXPECT_EQ(serialize(c),
            R"({"v":1,"kind":"prediction","case_id":"c-1","ts":1700000000000,"primary":"neg",)"
            R"("subs":["neg","neg","neg","pos","pos"],"truth":null,"cohort":null})");
  const Adjudication a{"c-1", "dr-x", kPos, 1700000005000};
  EXPECT_EQ(serialize(a),
            R"({"v":1,"kind":"adjudication","case_id":"c-1","reviewer":"dr-x","label":"pos","ts":1700000005000})");
}

TEST(ParseLine, RoundTripsAndRejectsBadLines) {
  auto c = make_case("c-2", kPos, 1, 5, kPos, 5);
  c.cohort_tag = "site-a";
  EXPECT_EQ(std::get<CaseRecord>(parse_line(serialize(c))), c);
  EXPECT_TRUE(std::holds_alternative<UnknownKind>(parse_line(R"({"v":1,"kind":"comment"})")));
  for (const char* bad : {"not json", R"({"v":2,"kind":"prediction"})",
                          R"({"v":1,"kind":"prediction","case_id":"x","ts":1,"primary":"maybe","subs":["pos"],"truth":null,"cohort":null})",
                          R"({"v":1,"kind":"prediction","case_id":"","ts":1,"primary":"pos","subs":["pos"],"truth":null,"cohort":null})",
                          R"({"v":1,"kind":"prediction","case_id":"x","ts":1,"primary":"pos","subs":[],"truth":null,"cohort":null})"}) {
    EXPECT_THROW(parse_line(bad), SchemaError) << bad;
  }
}

TEST(EventLog, AppendThenLoadRoundTrips) {
  testing::TempDir dir;
  const auto path = dir / "events.jsonl";
  const auto a = make_case("a", kPos, 5, 5, kPos, 1);
  const auto b = make_case("b", kNeg, 0, 5, std::nullopt, 2);
  {
    EventLog log(path);
    append_event(log, a);
    append_event(log, b);
  }
  EXPECT_EQ(testing::read_file(path), serialize(a) + "\n" + serialize(b) + "\n");
  const auto loaded = load_dataset(path);
  ASSERT_EQ(loaded.cases.size(), 2u);
  EXPECT_EQ(loaded.cases[0], a);
  EXPECT_EQ(loaded.cases[1], b);
  EXPECT_TRUE(loaded.warnings.empty());
}

TEST(EventLog, RejectedEntryLeavesFileUsable) {
  testing::TempDir dir;
  const auto path = dir / "events.jsonl";
  EventLog log(path);
  auto bad = make_case("", kPos, 5, 5, kPos);
  EXPECT_THROW(log.append(bad), SchemaError);
  EXPECT_EQ(testing::line_count(path), 0u);
  log.append(make_case("ok", kPos, 5, 5, kPos));
  EXPECT_EQ(testing::line_count(path), 1u);
}

TEST(EventLog, ConcurrentAppendsKeepWholeLines) {
  testing::TempDir dir;
  const auto path = dir / "events.jsonl";
  {
    EventLog log(path);
    std::vector<std::thread> writers;
    for (int t = 0; t < 4; ++t) {
      writers.emplace_back([&log, t] {
        for (int i = 0; i < 50; ++i) log.append(make_case(std::to_string(t) + "-" + std::to_string(i), kPos, 4, 5, kPos));
      });
    }
    for (auto& w : writers) w.join();
  }
  const auto loaded = load_dataset(path);
  EXPECT_EQ(loaded.cases.size(), 200u);
  EXPECT_TRUE(loaded.warnings.empty());
}

TEST(EventLog, UnwritablePathIsStorageError) {
  EXPECT_THROW(EventLog("/nonexistent-dir/x/events.jsonl"), StorageError);
  EXPECT_THROW(load_dataset("/nonexistent-dir/x/events.jsonl"), StorageError);
}

std::string lines(const Dataset& d) {
  std::ostringstream s;
  write_dataset(s, d);
  return s.str();
}

TEST(Load, EmptyFile) {
  std::istringstream in("");
  const auto loaded = parse_dataset(in);
  EXPECT_TRUE(loaded.cases.empty());
  EXPECT_TRUE(loaded.warnings.empty());
}

TEST(Load, OneMalformedLineAmongTen) {
  Dataset d;
  for (int i = 0; i < 9; ++i) d.push_back(make_case("c" + std::to_string(i), kPos, 5, 5, kPos, i));
  std::string text = lines(d);
  text.insert(text.find('\n', text.find('\n') + 1) + 1, "{broken\n");
  std::istringstream in(text);
  const auto loaded = parse_dataset(in);
  EXPECT_EQ(loaded.cases.size(), 9u);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_EQ(loaded.warnings[0].line, 3u);
}

TEST(Load, TooManyMalformedLinesIsFatal) {
  std::istringstream in(lines({make_case("a", kPos, 5, 5, kPos)}) + "x\ny\n");
  EXPECT_THROW(parse_dataset(in), InvalidInput);
}

TEST(Load, AdjudicationsOverlayAndUnknownIdsWarn) {
  std::string text = lines({make_case("a", kPos, 1, 5, std::nullopt, 10), make_case("b", kNeg, 5, 5, kNeg, 20)});
  text += serialize(Adjudication{"a", "r1", kNeg, 30}) + "\n";
  text += serialize(Adjudication{"a", "r2", kPos, 40}) + "\n";
  text += serialize(Adjudication{"zzz", "r1", kPos, 50}) + "\n";
  text += serialize(Adjudication{"b", "r1", kPos, 60}) + "\n";
  std::istringstream in(text);
  const auto loaded = parse_dataset(in);
  ASSERT_EQ(loaded.cases.size(), 2u);
  EXPECT_EQ(*loaded.cases[0].ground_truth, kPos);  // last write wins
  EXPECT_EQ(*loaded.cases[1].ground_truth, kNeg);  // recorded truth is kept
  EXPECT_EQ(loaded.adjudications.size(), 3u);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_NE(loaded.warnings[0].message.find("zzz"), std::string::npos);
}

TEST(Load, FiltersDuplicatesAndEnsembleMismatch) {
  Dataset d = {make_case("a", kPos, 5, 5, kPos, 10), make_case("b", kPos, 5, 5, kPos, 20),
               make_case("a", kNeg, 5, 5, kNeg, 25), make_case("c", kPos, 2, 3, kPos, 26)};
  d[1].cohort_tag = "x";
  std::istringstream in(lines(d));
  const auto all = parse_dataset(in);
  EXPECT_EQ(all.cases.size(), 2u);
  EXPECT_EQ(all.warnings.size(), 2u);

  std::istringstream again(lines(d));
  LoadOptions o;
  o.from_ms = 15;
  o.to_ms = 30;
  o.cohort_tag = "x";
  const auto filtered = parse_dataset(again, o);
  ASSERT_EQ(filtered.cases.size(), 1u);
  EXPECT_EQ(filtered.cases[0].case_id, "b");
}

}  // namespace
}  // namespace emm
