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

#include "emm/service.hpp"

#include <fstream>
#include <mutex>

#include "emm/errors.hpp"
#include "emm/json_io.hpp"

namespace emm {

namespace {

std::string describe(const PolicyValidation& v) {
  std::string out = "policy rejected";
  for (const auto& violation : v.violations) out += "; " + violation.kind + ": " + violation.detail;
  return out;
}

bool matches(const CaseRecord& r, const DatasetFilter& f) {
  if (f.from_ms && r.timestamp_ms < *f.from_ms) return false;
  if (f.to_ms && r.timestamp_ms >= *f.to_ms) return false;
  if (f.cohort_tag && r.cohort_tag != f.cohort_tag) return false;
  return true;
}

void write_policy_file(const std::filesystem::path& path, const StratificationPolicy& policy) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw StorageError("cannot write policy file " + tmp.string());
    out << json_of(policy).dump(2) << '\n';
    if (!out) throw StorageError("cannot write policy file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StorageError("cannot replace policy file " + path.string() + ": " + ec.message());
}

}  // namespace

PolicyRejected::PolicyRejected(PolicyValidation validation)
    : InvalidInput(describe(validation)), validation_(std::move(validation)) {}

MonitorService::MonitorService(ServiceConfig config) : config_(std::move(config)) {
  const int k = config_.ensemble_size;
  StratificationPolicy active;
  if (config_.policy_path && std::filesystem::exists(*config_.policy_path)) {
    active = load_policy(*config_.policy_path);
  } else if (config_.initial_policy) {
    active = *config_.initial_policy;
  } else {
    active = default_policy(k);
  }
  if (auto v = validate_policy(active, k); !v.ok()) throw PolicyRejected(std::move(v));
  policy_history_.push_back(std::move(active));

  if (std::filesystem::exists(config_.log_path)) {
    LoadOptions options;
    options.overlay_adjudications = false;
    auto loaded = load_dataset(config_.log_path, options);
    replay_warnings_ = std::move(loaded.warnings);
    for (auto& r : loaded.cases) {
      if (static_cast<int>(r.subs.size()) != k) {
        throw InvalidInput("event log " + config_.log_path.string() + " holds K=" +
                           std::to_string(r.subs.size()) + " cases but the service is configured for K=" +
                           std::to_string(k));
      }
      const auto agreement = compute_agreement(r);
      IngestResult result{r.case_id, agreement, stratify(r.primary, agreement, policy_history_.back()),
                          1, false};
      index_.emplace(r.case_id, entries_.size());
      entries_.push_back({std::move(r), std::move(result)});
    }
    for (auto& a : loaded.adjudications) adjudications_[a.case_id] = std::move(a);
    tally_ = recompute_tally();
  }
  log_ = std::make_unique<EventLog>(config_.log_path);
}

IngestResult MonitorService::ingest(const CaseRecord& record) {
  validate_entry(record);
  if (static_cast<int>(record.subs.size()) != config_.ensemble_size) {
    throw InvalidInput("case " + record.case_id + " has " + std::to_string(record.subs.size()) +
                       " sub-model predictions; service expects " +
                       std::to_string(config_.ensemble_size));
  }
  std::unique_lock lock(mutex_);
  if (auto it = index_.find(record.case_id); it != index_.end()) {
    IngestResult prior = entries_[it->second].result;
    prior.duplicate = true;
    return prior;
  }
  const auto agreement = compute_agreement(record);
  const int version = static_cast<int>(policy_history_.size());
  IngestResult result{record.case_id, agreement,
                      stratify(record.primary, agreement, policy_history_.back()), version, false};
  log_->append(record);
  index_.emplace(record.case_id, entries_.size());
  entries_.push_back({record, result});
  return result;
}

AdjudicationTally MonitorService::adjudicate(const Adjudication& adjudication) {
  validate_entry(adjudication);
  std::unique_lock lock(mutex_);
  if (!index_.contains(adjudication.case_id)) {
    throw NotFound("unknown case_id " + adjudication.case_id);
  }
  log_->append(adjudication);
  adjudications_[adjudication.case_id] = adjudication;
  tally_ = recompute_tally();
  return tally_;
}

AdjudicationTally MonitorService::recompute_tally() const {
  AdjudicationTally t;
  for (const auto& [id, a] : adjudications_) {
    auto it = index_.find(id);
    if (it == index_.end()) continue;
    const auto& e = entries_[it->second];
    auto& counts = t.by_category[category_index(e.result.stratification.category)];
    ++counts.adjudicated;
    if (a.final_label == e.record.primary) ++counts.confirmed;
    else ++counts.corrected;
  }
  return t;
}

CaseView MonitorService::get_case(const std::string& case_id) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(case_id);
  if (it == index_.end()) throw NotFound("unknown case_id " + case_id);
  const auto& e = entries_[it->second];
  CaseView view{e.record, e.result, std::nullopt};
  if (auto a = adjudications_.find(case_id); a != adjudications_.end()) view.adjudication = a->second;
  return view;
}

Dataset MonitorService::snapshot_locked(const DatasetFilter& filter) const {
  Dataset out;
  for (const auto& e : entries_) {
    if (!matches(e.record, filter)) continue;
    out.push_back(e.record);
    if (!out.back().ground_truth) {
      if (auto a = adjudications_.find(e.record.case_id); a != adjudications_.end()) {
        out.back().ground_truth = a->second.final_label;
      }
    }
  }
  return out;
}

Dataset MonitorService::snapshot(const DatasetFilter& filter) const {
  std::shared_lock lock(mutex_);
  return snapshot_locked(filter);
}

EvaluationReport MonitorService::report(const ReportQuery& query) const {
  Dataset data;
  StratificationPolicy policy;
  {
    std::shared_lock lock(mutex_);
    data = snapshot_locked(query.filter);
    policy = policy_history_.back();
  }
  if (data.empty()) throw InvalidInput("no cases match the report filter");
  EvaluationOptions options;
  options.prevalence = query.prevalence;
  options.mode = query.mode;
  options.seed = query.seed;
  options.n_draws = query.n_draws;
  return evaluate(data, policy, options);
}

DriftVerdict MonitorService::drift(const DriftQuery& query) const {
  const Dataset data = snapshot();
  const auto baseline = window_histogram(data, query.baseline, config_.ensemble_size);
  const auto current = window_histogram(data, query.current, config_.ensemble_size);
  return drift_score(baseline, current, query.config);
}

WhatIfResponse MonitorService::what_if(const WhatIfRequest& request) const {
  if (auto v = validate_policy(request.policy, config_.ensemble_size); !v.ok()) {
    throw PolicyRejected(std::move(v));
  }
  const Dataset data = snapshot(request.filter);
  if (data.empty()) throw InvalidInput("no cases match the what-if filter");
  EvaluationOptions options;
  options.prevalence = request.prevalence;
  options.mode = request.mode;
  options.seed = request.seed;
  options.n_draws = 0;
  const auto r = evaluate(data, request.policy, options);
  return {r.categories, r.tradeoff, r.baseline, request.prevalence, request.seed, r.evaluated_cases};
}

VersionedPolicy MonitorService::policy() const {
  std::shared_lock lock(mutex_);
  return {static_cast<int>(policy_history_.size()), policy_history_.back()};
}

int MonitorService::put_policy(const StratificationPolicy& policy) {
  if (auto v = validate_policy(policy, config_.ensemble_size); !v.ok()) {
    throw PolicyRejected(std::move(v));
  }
  std::unique_lock lock(mutex_);
  if (config_.policy_path) write_policy_file(*config_.policy_path, policy);
  policy_history_.push_back(policy);
  return static_cast<int>(policy_history_.size());
}

AdjudicationTally MonitorService::tally() const {
  std::shared_lock lock(mutex_);
  return tally_;
}

std::size_t MonitorService::case_count() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace emm
