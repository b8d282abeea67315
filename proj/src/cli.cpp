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

#include "emm/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "emm/cohort_config.hpp"
#include "emm/errors.hpp"
#include "emm/http.hpp"
#include "emm/json_io.hpp"

namespace emm::cli {

namespace {

/// Raised for data problems detected by the CLI itself (exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string in;
  std::string out;
  std::string policy;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

Dataset read_cases(const std::string& path, std::ostream& err) {
  const auto loaded = load_dataset(path);
  for (const auto& w : loaded.warnings) err << "warning: line " << w.line << ": " << w.message << '\n';
  if (loaded.cases.empty()) throw DataError("empty dataset");
  return loaded.cases;
}

StratificationPolicy policy_for(const std::string& path, int k) {
  auto policy = path.empty() ? default_policy(k) : load_policy(path);
  if (auto v = validate_policy(policy, k); !v.ok()) {
    std::string msg = "invalid policy";
    for (const auto& violation : v.violations) msg += "; " + violation.kind + ": " + violation.detail;
    throw InvalidInput(msg);
  }
  return policy;
}

// Writes to the file at `path`, or to `fallback` when path is empty.
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw StorageError("cannot write " + path);
  fn(file);
  if (!file) throw StorageError("cannot write " + path);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file || !(file << text)) throw StorageError("cannot write " + path.string());
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

void print_categories(std::ostream& err, const CategoryReport& report) {
  err << std::left << std::setw(6) << "class" << std::setw(11) << "category" << std::right << std::setw(8)
      << "count" << std::setw(10) << "fraction" << std::setw(10) << "accuracy" << '\n';
  for (auto label : kBothClasses) {
    for (auto c : kAllCategories) {
      const auto& cell = report.at(label, c);
      err << std::left << std::setw(6) << to_string(label) << std::setw(11) << to_string(c) << std::right
          << std::setw(8) << cell.count << std::setw(10) << fmt(cell.fraction) << std::setw(10)
          << fmt(cell.accuracy()) << '\n';
    }
  }
}

void print_report(std::ostream& err, const EvaluationReport& r) {
  err << "cases=" << r.evaluated_cases << " labeled=" << r.labeled_cases << " K=" << r.ensemble_size;
  if (r.design_prevalence) err << " prevalence=" << *r.design_prevalence << " (" << to_string(r.mode) << ")";
  err << '\n';
  print_categories(err, r.categories);
  for (const char* name : {"baseline.accuracy", "ed_spauc", "ed_snauc", "tradeoff.pos.false_alarm_rate",
                           "tradeoff.pos.relative_accuracy_improvement", "tradeoff.neg.false_alarm_rate",
                           "tradeoff.neg.relative_accuracy_improvement"}) {
    const auto* m = r.find(name);
    if (!m) continue;
    err << std::left << std::setw(44) << name << std::right << std::setw(10) << fmt(m->value);
    if (m->interval) err << "  [" << fmt(m->interval->ci_low) << ", " << fmt(m->interval->ci_high) << "]";
    err << '\n';
  }
  for (const auto& note : r.notes) err << "note: " << note << '\n';
}

void add_mode_option(CLI::App* cmd, std::string& mode) {
  cmd->add_option("--resample-mode", mode, "exact or paper_literal")
      ->check(CLI::IsMember({"exact", "paper_literal"}))
      ->capture_default_str();
}

ResampleMode mode_of(const std::string& text) { return *parse_resample_mode(text); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble monitoring of black-box binary classifiers", "emm"};
  app.require_subcommand(1, 1);

  Common c;
  std::optional<double> prevalence;
  std::optional<std::int64_t> n_cases;
  std::string spec_path;
  std::string mode = "exact";
  int draws = 1000;
  std::string csv_dir;
  bool stratified_curves = false;
  std::int64_t window_ms = 0;
  std::string baseline = "pinned";
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;
  DriftConfig drift_config;
  std::string metric = "spauc";
  std::string log_path;
  std::string listen;
  std::string token;
  int ensemble_size = 5;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort as JSONL");
  simulate->add_option("--spec", spec_path, "Cohort spec file (key = value)")->required();
  simulate->add_option("--seed", c.seed, "Overrides the spec seed");
  simulate->add_option("--n", n_cases, "Overrides n_cases");
  simulate->add_option("--prevalence", prevalence, "Overrides prevalence");
  simulate->add_option("--out", c.out, "Output path (default stdout)");
  simulate->add_option("--threads", c.threads)->capture_default_str();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a JSONL dataset");
  evaluate_cmd->add_option("--in", c.in, "Input JSONL")->required();
  evaluate_cmd->add_option("--policy", c.policy, "Policy JSON (default: built-in K=5 thresholds)");
  evaluate_cmd->add_option("--prevalence", prevalence, "Design prevalence in (0,1)")
      ->check(CLI::Range(0.0, 1.0));
  add_mode_option(evaluate_cmd, mode);
  evaluate_cmd->add_option("--draws", draws, "Bootstrap draws (0 disables intervals)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  evaluate_cmd->add_option("--seed", c.seed)->capture_default_str();
  evaluate_cmd->add_option("--threads", c.threads)->capture_default_str();
  evaluate_cmd->add_option("--csv-dir", csv_dir, "Directory for CSV tables");
  evaluate_cmd->add_flag("--stratified-curves", stratified_curves, "Also build per-class curves");

  auto* stratify_cmd = app.add_subcommand("stratify", "Assign each case a confidence category");
  stratify_cmd->add_option("--in", c.in, "Input JSONL")->required();
  stratify_cmd->add_option("--policy", c.policy, "Policy JSON");
  stratify_cmd->add_option("--out", c.out, "Output path (default stdout)");

  auto* resample_cmd = app.add_subcommand("resample", "Resample a dataset to a design prevalence");
  resample_cmd->add_option("--in", c.in, "Input JSONL")->required();
  resample_cmd->add_option("--prevalence", prevalence, "Design prevalence in (0,1)")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  add_mode_option(resample_cmd, mode);
  resample_cmd->add_option("--seed", c.seed)->capture_default_str();
  resample_cmd->add_option("--out", c.out, "Output path (default stdout)");

  auto* drift_cmd = app.add_subcommand("drift", "Score agreement-distribution drift over time windows");
  drift_cmd->add_option("--in", c.in, "Input JSONL")->required();
  drift_cmd->add_option("--window-ms", window_ms, "Window width in milliseconds")
      ->required()
      ->check(CLI::PositiveNumber);
  drift_cmd->add_option("--baseline", baseline, "pinned or rolling")
      ->check(CLI::IsMember({"pinned", "rolling"}))
      ->capture_default_str();
  drift_cmd->add_option("--start-ms", start_ms, "Default: earliest timestamp");
  drift_cmd->add_option("--end-ms", end_ms, "Default: one past the latest timestamp");
  drift_cmd->add_option("--threshold", drift_config.threshold)->capture_default_str();
  drift_cmd->add_option("--min-count", drift_config.min_count)->capture_default_str();
  drift_cmd->add_option("--csv-dir", csv_dir, "Directory for per-window histograms");

  auto* ablate_cmd = app.add_subcommand("ablate", "ED AUC against the number of sub-models");
  ablate_cmd->add_option("--in", c.in, "Input JSONL")->required();
  ablate_cmd->add_option("--metric", metric)->check(CLI::IsMember({"spauc", "snauc"}))->capture_default_str();
  ablate_cmd->add_option("--seed", c.seed)->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--log", log_path, "Event log (default EMM_LOG_PATH)");
  serve_cmd->add_option("--listen", listen, "host:port (default EMM_LISTEN_ADDR or 127.0.0.1:8080)");
  serve_cmd->add_option("--policy", c.policy, "Policy file (default EMM_POLICY_PATH)");
  serve_cmd->add_option("--ensemble-size", ensemble_size)->check(CLI::PositiveNumber)->capture_default_str();
  serve_cmd->add_option("--token", token, "Bearer token (default EMM_BEARER_TOKEN)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      auto spec = load_cohort_spec(spec_path);
      if (simulate->count("--seed")) spec.seed = c.seed;
      if (n_cases) spec.n_cases = *n_cases;
      if (prevalence) spec.prevalence = *prevalence;
      validate(spec);
      const auto cohort = generate_cohort(spec, c.threads);
      with_output(c.out, out, [&](std::ostream& o) { write_dataset(o, cohort); });
      err << "seed=" << spec.seed << '\n';
      return kExitOk;
    }

    if (evaluate_cmd->parsed()) {
      const auto cases = read_cases(c.in, err);
      const int k = ensemble_size_of(cases);
      const auto policy = policy_for(c.policy, k);
      EvaluationOptions options;
      options.prevalence = prevalence;
      options.mode = mode_of(mode);
      options.n_draws = draws;
      options.seed = c.seed;
      options.threads = c.threads;
      options.stratified_curves = stratified_curves;
      const auto report = evaluate(cases, policy, options);
      out << json_of(report).dump(2) << '\n';
      print_report(err, report);
      if (!csv_dir.empty()) {
        std::filesystem::create_directories(csv_dir);
        const std::filesystem::path dir(csv_dir);
        write_file(dir / "categories.csv", to_csv(report.categories));
        if (report.accuracy_table) write_file(dir / "accuracy_by_agreement.csv", to_csv(*report.accuracy_table));
        if (report.curve) write_file(dir / "error_detection_curve.csv", to_csv(*report.curve));
        for (auto label : kBothClasses) {
          if (const auto& curve = report.class_curves[class_index(label)]) {
            write_file(dir / ("error_detection_curve_" + std::string(to_string(label)) + ".csv"), to_csv(*curve));
          }
        }
      }
      err << "seed=" << c.seed << '\n';
      return kExitOk;
    }

    if (stratify_cmd->parsed()) {
      const auto cases = read_cases(c.in, err);
      const auto policy = policy_for(c.policy, ensemble_size_of(cases));
      with_output(c.out, out, [&](std::ostream& o) {
        for (const auto& r : cases) {
          const auto agreement = compute_agreement(r);
          const auto s = stratify(r.primary, agreement, policy);
          Json line{{"case_id", r.case_id},
                    {"ts", r.timestamp_ms},
                    {"primary", to_string(r.primary)},
                    {"agreement", json_of(agreement)},
                    {"category", to_string(s.category)},
                    {"suggested_action", s.action}};
          o << line.dump() << '\n';
        }
      });
      return kExitOk;
    }

    if (resample_cmd->parsed()) {
      const auto cases = read_cases(c.in, err);
      const auto resampled = resample_to_prevalence(cases, {*prevalence, mode_of(mode), c.seed});
      with_output(c.out, out, [&](std::ostream& o) { write_dataset(o, resampled); });
      err << "seed=" << c.seed << '\n';
      return kExitOk;
    }

    if (drift_cmd->parsed()) {
      const auto cases = read_cases(c.in, err);
      const int k = ensemble_size_of(cases);
      const auto [lo, hi] = std::minmax_element(cases.begin(), cases.end(), [](const auto& a, const auto& b) {
        return a.timestamp_ms < b.timestamp_ms;
      });
      const std::int64_t start = start_ms.value_or(lo->timestamp_ms);
      const std::int64_t end = end_ms.value_or(hi->timestamp_ms + 1);
      const auto verdicts = monitor_windows(cases, k, start, end, window_ms, *parse_baseline_mode(baseline),
                                            drift_config);
      Json j = Json::array();
      for (const auto& v : verdicts) j.push_back(json_of(v));
      out << j.dump(2) << '\n';
      if (!csv_dir.empty()) {
        std::filesystem::create_directories(csv_dir);
        const auto windows = tile_windows(start, end, window_ms);
        for (std::size_t i = 0; i < windows.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "window_%03zu.csv", i);
          write_file(std::filesystem::path(csv_dir) / name, to_csv(window_histogram(cases, windows[i], k)));
        }
      }
      int alerts = 0;
      for (const auto& v : verdicts) {
        err << "[" << v.current_window.start_ms << ", " << v.current_window.end_ms << ")";
        for (auto label : kBothClasses) {
          err << "  " << to_string(label) << "=" << fmt(v.classes[class_index(label)].divergence);
        }
        err << (v.alert ? "  ALERT" : "") << '\n';
        alerts += v.alert;
      }
      err << verdicts.size() << " windows scored, " << alerts << " alerts\n";
      return kExitOk;
    }

    if (ablate_cmd->parsed()) {
      const auto cases = read_cases(c.in, err);
      const auto report =
          ablation_submodel_count(cases, metric == "spauc" ? EdMetric::Spauc : EdMetric::Snauc, c.seed);
      out << json_of(report).dump(2) << '\n';
      err << "seed=" << c.seed << '\n';
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      auto env = config_from_env();
      if (!log_path.empty()) env.service.log_path = log_path;
      if (!c.policy.empty()) env.service.policy_path = c.policy;
      if (!listen.empty()) env.http = parse_listen_addr(listen);
      if (!token.empty()) env.http.bearer_token = token;
      env.service.ensemble_size = ensemble_size;
      MonitorService service(env.service);
      for (const auto& w : service.replay_warnings()) {
        err << "warning: line " << w.line << ": " << w.message << '\n';
      }
      err << "listening on " << env.http.host << ":" << env.http.port << " (" << service.case_count()
          << " cases replayed from " << env.service.log_path.string() << ")\n";
      if (!serve(service, env.http)) {
        err << "error: cannot listen on " << env.http.host << ":" << env.http.port << '\n';
        return kExitData;
      }
      return kExitOk;
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace emm::cli
