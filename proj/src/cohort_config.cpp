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

#include "emm/cohort_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>

#include "emm/errors.hpp"

namespace emm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidInput(key + ": expected a number, got '" + text + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidInput(key + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  if (text.empty() || text.front() != '[') return {to_double(key, text)};
  if (text.back() != ']') throw InvalidInput(key + ": unterminated list");
  std::vector<double> out;
  std::string body = text.substr(1, text.size() - 2);
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = body.find(',', start);
    const std::string item = trim(body.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(to_double(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw InvalidInput(key + ": empty list");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw InvalidInput("line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!out.emplace(key, value).second) {
      throw InvalidInput("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

SyntheticCohortSpec parse_cohort_spec(std::istream& in) {
  const auto kv = parse_key_values(in);
  static const std::set<std::string> known = {
      "n_cases", "prevalence", "primary_sensitivity", "primary_specificity", "sub_count",
      "sub_sensitivity", "sub_specificity", "p_hard", "hard_error_multiplier", "seed",
      "start_timestamp_ms", "case_interval_ms", "id_prefix", "cohort_tag"};
  for (const auto& [key, _] : kv) {
    if (!known.contains(key)) throw InvalidInput("unknown cohort spec key '" + key + "'");
  }
  auto get = [&kv](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  SyntheticCohortSpec spec;
  if (auto* v = get("n_cases")) spec.n_cases = to_int("n_cases", *v);
  if (auto* v = get("prevalence")) spec.prevalence = to_double("prevalence", *v);
  if (auto* v = get("primary_sensitivity")) spec.primary.sensitivity = to_double("primary_sensitivity", *v);
  if (auto* v = get("primary_specificity")) spec.primary.specificity = to_double("primary_specificity", *v);
  if (auto* v = get("p_hard")) spec.p_hard = to_double("p_hard", *v);
  if (auto* v = get("hard_error_multiplier")) {
    spec.hard_error_multiplier = to_double("hard_error_multiplier", *v);
  }
  if (auto* v = get("seed")) spec.seed = to_uint("seed", *v);
  if (auto* v = get("start_timestamp_ms")) spec.start_timestamp_ms = to_int("start_timestamp_ms", *v);
  if (auto* v = get("case_interval_ms")) spec.case_interval_ms = to_int("case_interval_ms", *v);
  if (auto* v = get("id_prefix")) spec.id_prefix = *v;
  if (auto* v = get("cohort_tag")) spec.cohort_tag = *v;

  std::vector<double> sens = {1.0};
  std::vector<double> spec_values = {1.0};
  if (auto* v = get("sub_sensitivity")) sens = to_list("sub_sensitivity", *v);
  if (auto* v = get("sub_specificity")) spec_values = to_list("sub_specificity", *v);
  std::size_t k = 5;
  if (auto* v = get("sub_count")) {
    const auto n = to_int("sub_count", *v);
    if (n < 1) throw InvalidInput("sub_count must be at least 1");
    k = static_cast<std::size_t>(n);
  } else if (sens.size() > 1 || spec_values.size() > 1) {
    k = std::max(sens.size(), spec_values.size());
  }
  auto expand = [k](std::vector<double>& v, const char* key) {
    if (v.size() == 1) v.assign(k, v.front());
    if (v.size() != k) {
      throw InvalidInput(std::string(key) + " lists " + std::to_string(v.size()) +
                         " values for " + std::to_string(k) + " sub-models");
    }
  };
  expand(sens, "sub_sensitivity");
  expand(spec_values, "sub_specificity");
  spec.subs.clear();
  for (std::size_t j = 0; j < k; ++j) spec.subs.push_back({sens[j], spec_values[j]});
  validate(spec);
  return spec;
}

SyntheticCohortSpec load_cohort_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read cohort spec " + path.string());
  return parse_cohort_spec(in);
}

}  // namespace emm
