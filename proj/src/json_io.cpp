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

#include "emm/json_io.hpp"

#include <fstream>

#include "emm/errors.hpp"

namespace emm {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string cls(BinaryLabel label) { return std::string(to_string(label)); }
std::string cat(ConfidenceCategory c) { return std::string(to_string(c)); }

Json window_json(const TimeWindow& w) {
  Json j;
  j["start"] = w.start_ms;
  j["end"] = w.end_ms;
  return j;
}

std::vector<int> int_list(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidInput(where + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw InvalidInput(where + " must be an array of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

Json json_of(const StratificationPolicy& policy) {
  Json j;
  j["ensemble_size"] = policy.ensemble_size;
  for (auto label : kBothClasses) {
    Json sets;
    for (auto c : kAllCategories) sets[cat(c)] = policy.for_class(label).of(c);
    j[label == BinaryLabel::Positive ? "positive" : "negative"] = std::move(sets);
  }
  Json actions;
  for (auto c : kAllCategories) actions[cat(c)] = policy.action(c);
  j["actions"] = std::move(actions);
  return j;
}

StratificationPolicy policy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("policy must be a JSON object");
  StratificationPolicy p;
  auto k = j.find("ensemble_size");
  if (k == j.end() || !k->is_number_integer()) {
    throw InvalidInput("policy.ensemble_size must be an integer");
  }
  p.ensemble_size = k->get<int>();
  for (auto label : kBothClasses) {
    const char* key = label == BinaryLabel::Positive ? "positive" : "negative";
    auto it = j.find(key);
    if (it == j.end() || !it->is_object()) throw InvalidInput(std::string("policy.") + key + " must be an object");
    for (auto c : kAllCategories) {
      auto s = it->find(cat(c));
      if (s == it->end()) continue;  // empty set
      p.for_class(label).of(c) = int_list(*s, std::string("policy.") + key + "." + cat(c));
    }
  }
  p.actions = default_actions();
  if (auto a = j.find("actions"); a != j.end()) {
    if (!a->is_object()) throw InvalidInput("policy.actions must be an object");
    for (auto c : kAllCategories) {
      auto t = a->find(cat(c));
      if (t == a->end()) continue;
      if (!t->is_string()) throw InvalidInput("policy.actions." + cat(c) + " must be a string");
      p.actions[category_index(c)] = t->get<std::string>();
    }
  }
  return p;
}

StratificationPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read policy file " + path.string());
  try {
    return policy_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("policy file " + path.string() + " is not valid JSON: " + e.what());
  }
}

Json json_of(const PolicyValidation& validation) {
  Json j;
  j["ok"] = validation.ok();
  Json list = Json::array();
  for (const auto& v : validation.violations) list.push_back({{"kind", v.kind}, {"detail", v.detail}});
  j["violations"] = std::move(list);
  return j;
}

Json json_of(const AgreementLevel& level) {
  Json j;
  j["agreeing"] = level.agreeing_count();
  j["k"] = level.ensemble_size();
  j["fraction"] = level.fraction();
  return j;
}

Json json_of(const BaselineMetrics& m) {
  Json j;
  j["tp"] = m.counts.tp;
  j["fp"] = m.counts.fp;
  j["tn"] = m.counts.tn;
  j["fn"] = m.counts.fn;
  j["sensitivity"] = opt(m.sensitivity);
  j["specificity"] = opt(m.specificity);
  j["ppv"] = opt(m.ppv);
  j["npv"] = opt(m.npv);
  j["accuracy"] = opt(m.accuracy);
  return j;
}

Json json_of(const AccuracyByAgreementTable& table) {
  Json j;
  j["ensemble_size"] = table.ensemble_size;
  Json rows = Json::array();
  for (auto label : kBothClasses) {
    for (int level = 0; level <= table.ensemble_size; ++level) {
      const auto& cell = table.at(label, level);
      rows.push_back({{"class", cls(label)},
                      {"level", level},
                      {"count", cell.count},
                      {"correct", cell.correct},
                      {"accuracy", opt(cell.accuracy())}});
    }
  }
  j["cells"] = std::move(rows);
  return j;
}

Json json_of(const CategoryReport& report) {
  Json j;
  for (auto label : kBothClasses) {
    Json per;
    per["total"] = report.class_totals[class_index(label)];
    for (auto c : kAllCategories) {
      const auto& cell = report.at(label, c);
      per[cat(c)] = {{"count", cell.count},
                     {"fraction", opt(cell.fraction)},
                     {"labeled", cell.labeled},
                     {"correct", cell.correct},
                     {"accuracy", opt(cell.accuracy())}};
    }
    j[cls(label)] = std::move(per);
  }
  return j;
}

Json json_of(const TradeoffReport& report) {
  Json j;
  for (auto label : kBothClasses) {
    const auto& t = report.of(label);
    if (!t) {
      j[cls(label)] = nullptr;
      continue;
    }
    j[cls(label)] = {{"cases", t->cases},
                     {"baseline_correct", t->baseline_correct},
                     {"decreased", t->decreased},
                     {"false_alarms", t->decreased_correct},
                     {"corrections", t->decreased_incorrect},
                     {"baseline_accuracy", t->baseline_accuracy()},
                     {"false_alarm_rate", t->false_alarm_rate()},
                     {"post_review_accuracy", t->post_review_accuracy()},
                     {"relative_accuracy_improvement", opt(t->relative_accuracy_improvement())}};
  }
  return j;
}

Json json_of(const ErrorDetectionCurve& curve) {
  Json j;
  j["ensemble_size"] = curve.ensemble_size;
  j["cases"] = curve.cases;
  j["errors"] = curve.errors;
  Json pts = Json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"threshold", p.threshold},
                   {"flagged", p.flagged},
                   {"flagged_errors", p.flagged_errors},
                   {"sensitivity", opt(p.sensitivity)},
                   {"ppv", opt(p.ppv)},
                   {"specificity", opt(p.specificity)},
                   {"npv", opt(p.npv)}});
  }
  j["points"] = std::move(pts);
  return j;
}

Json json_of(const AucSummary& auc) {
  Json j;
  j["area"] = auc.area;
  j["normalized"] = auc.normalized;
  j["x_min"] = auc.x_min;
  j["x_max"] = auc.x_max;
  j["points"] = auc.points_used;
  return j;
}

Json json_of(const BootstrapInterval& iv) {
  Json j;
  j["ci_low"] = opt(iv.ci_low);
  j["ci_high"] = opt(iv.ci_high);
  j["defined_draws"] = iv.defined_draws;
  j["undefined_draws"] = iv.undefined_draws;
  j["unstable"] = iv.unstable();
  return j;
}

Json json_of(const EvaluationReport& r) {
  Json j;
  j["source_cases"] = r.source_cases;
  j["evaluated_cases"] = r.evaluated_cases;
  j["labeled_cases"] = r.labeled_cases;
  j["ensemble_size"] = r.ensemble_size;
  j["prevalence"] = r.design_prevalence ? Json(*r.design_prevalence) : Json("native");
  j["realized_prevalence"] = opt(r.realized_prevalence);
  j["resample_mode"] = to_string(r.mode);
  j["seed"] = r.seed;
  j["draws"] = r.n_draws;
  j["baseline"] = r.baseline ? json_of(*r.baseline) : Json(nullptr);
  j["categories"] = json_of(r.categories);
  j["tradeoff"] = r.tradeoff ? json_of(*r.tradeoff) : Json(nullptr);
  j["accuracy_by_agreement"] = r.accuracy_table ? json_of(*r.accuracy_table) : Json(nullptr);
  j["ed_spauc"] = r.spauc ? json_of(*r.spauc) : Json(nullptr);
  j["ed_snauc"] = r.snauc ? json_of(*r.snauc) : Json(nullptr);
  j["error_detection_curve"] = r.curve ? json_of(*r.curve) : Json(nullptr);
  if (r.class_curves[0] || r.class_curves[1]) {
    Json by;
    for (auto label : kBothClasses) {
      const auto& c = r.class_curves[class_index(label)];
      by[cls(label)] = c ? json_of(*c) : Json(nullptr);
    }
    j["error_detection_curve_by_class"] = std::move(by);
  }
  Json metrics;
  for (const auto& m : r.metrics) {
    Json e;
    e["value"] = opt(m.value);
    if (m.interval) {
      e["ci_low"] = opt(m.interval->ci_low);
      e["ci_high"] = opt(m.interval->ci_high);
      e["undefined_draws"] = m.interval->undefined_draws;
      e["unstable"] = m.interval->unstable();
    }
    metrics[m.name] = std::move(e);
  }
  j["metrics"] = std::move(metrics);
  j["notes"] = r.notes;
  return j;
}

Json json_of(const AgreementHistogram& h) {
  Json j;
  j["ensemble_size"] = h.ensemble_size;
  j["window"] = window_json(h.window);
  j["total"] = h.total;
  for (auto label : kBothClasses) j[cls(label)] = h.counts[class_index(label)];
  return j;
}

Json json_of(const DriftVerdict& v) {
  Json j;
  j["baseline_window"] = window_json(v.baseline_window);
  j["current_window"] = window_json(v.current_window);
  j["threshold"] = v.threshold;
  j["min_count"] = v.min_count;
  j["alert"] = v.alert;
  Json classes;
  for (auto label : kBothClasses) {
    const auto& c = v.classes[class_index(label)];
    classes[cls(label)] = {{"divergence", opt(c.divergence)},
                           {"insufficient_data", c.insufficient_data()},
                           {"baseline_total", c.baseline_total},
                           {"current_total", c.current_total}};
  }
  j["classes"] = std::move(classes);
  return j;
}

Json json_of(const AblationReport& report) {
  Json j;
  j["metric"] = report.metric == EdMetric::Spauc ? "ed_spauc" : "ed_snauc";
  j["ensemble_size"] = report.ensemble_size;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"submodels", r.submodels},
                    {"subsets", r.subsets},
                    {"defined_subsets", r.defined_subsets},
                    {"mean", opt(r.mean)},
                    {"min", opt(r.min)},
                    {"max", opt(r.max)}});
  }
  j["rows"] = std::move(rows);
  return j;
}

Json json_of(const Adjudication& a) { return Json::parse(serialize(a)); }

Json json_of(const CaseRecord& record) { return Json::parse(serialize(record)); }

namespace {

nlohmann::json with_envelope(const nlohmann::json& j, const char* kind) {
  if (!j.is_object()) throw SchemaError("body must be a JSON object");
  nlohmann::json copy = j;
  if (!copy.contains("v")) copy["v"] = kSchemaVersion;
  if (!copy.contains("kind")) copy["kind"] = kind;
  return copy;
}

}  // namespace

CaseRecord case_record_from_json(const nlohmann::json& j) {
  auto parsed = parse_line(with_envelope(j, "prediction").dump());
  if (auto* r = std::get_if<CaseRecord>(&parsed)) return std::move(*r);
  throw SchemaError("expected a prediction entry");
}

Adjudication adjudication_from_json(const nlohmann::json& j) {
  auto parsed = parse_line(with_envelope(j, "adjudication").dump());
  if (auto* a = std::get_if<Adjudication>(&parsed)) return std::move(*a);
  throw SchemaError("expected an adjudication entry");
}

}  // namespace emm
