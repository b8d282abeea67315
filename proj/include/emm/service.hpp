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

// Real-time monitoring service: ingestion, stratification, adjudication,
// reports, drift and policy what-if. Transport-independent; see http.hpp for
// the HTTP binding.
//
// Writes (ingest, adjudicate, put_policy) are serialized and go through the
// single EventLog writer. Reads copy a snapshot under a shared lock and do
// their computation outside it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "emm/core.hpp"
#include "emm/drift.hpp"
#include "emm/errors.hpp"
#include "emm/evaluation.hpp"
#include "emm/metrics.hpp"
#include "emm/store.hpp"

namespace emm {

struct ServiceConfig {
  std::filesystem::path log_path;
  int ensemble_size = 5;
  /// Active policy is read from here at startup when the file exists, and
  /// written here by put_policy().
  std::optional<std::filesystem::path> policy_path;
  /// Used when policy_path is unset or missing; defaults to default_policy(K).
  std::optional<StratificationPolicy> initial_policy;
};

/// Rejected policy; carries the validation result.
class PolicyRejected : public InvalidInput {
 public:
  explicit PolicyRejected(PolicyValidation validation);
  const PolicyValidation& validation() const { return validation_; }

 private:
  PolicyValidation validation_;
};

struct IngestResult {
  std::string case_id;
  AgreementLevel agreement{0, 1};
  Stratification stratification;
  int policy_version = 0;
  bool duplicate = false;
};

/// Outcomes of human review, per confidence category of the reviewed case.
struct AdjudicationTally {
  struct Counts {
    std::int64_t adjudicated = 0;
    std::int64_t confirmed = 0;  // reviewer agreed with the primary prediction
    std::int64_t corrected = 0;  // reviewer overturned it
  };
  std::array<Counts, 3> by_category{};  // category_index

  const Counts& of(ConfidenceCategory c) const { return by_category[category_index(c)]; }
  /// Decreased-confidence cases the reviewer confirmed: unnecessary reviews.
  std::int64_t realized_false_alarms() const { return of(ConfidenceCategory::Decreased).confirmed; }
  std::int64_t realized_corrections() const { return of(ConfidenceCategory::Decreased).corrected; }
};

struct CaseView {
  CaseRecord record;
  IngestResult stratification;
  std::optional<Adjudication> adjudication;
};

struct DatasetFilter {
  std::optional<std::int64_t> from_ms;
  std::optional<std::int64_t> to_ms;
  std::optional<std::string> cohort_tag;
};

struct ReportQuery {
  DatasetFilter filter;
  std::optional<double> prevalence;  // nullopt: native
  ResampleMode mode = ResampleMode::Exact;
  std::uint64_t seed = kDefaultSeed;
  int n_draws = 1000;
};

struct WhatIfRequest {
  StratificationPolicy policy;
  std::optional<double> prevalence;  // nullopt: native
  ResampleMode mode = ResampleMode::Exact;
  DatasetFilter filter;
  std::uint64_t seed = kDefaultSeed;
};

struct WhatIfResponse {
  CategoryReport categories;
  std::optional<TradeoffReport> tradeoff;
  std::optional<BaselineMetrics> baseline;
  std::optional<double> prevalence;
  std::uint64_t seed = 0;
  std::int64_t evaluated_cases = 0;
};

struct DriftQuery {
  TimeWindow baseline;
  TimeWindow current;
  DriftConfig config;
};

struct VersionedPolicy {
  int version = 0;
  StratificationPolicy policy;
};

class MonitorService {
 public:
  /// Replays an existing log at config.log_path. Throws InvalidInput if no
  /// policy can be established or the log holds a different K.
  explicit MonitorService(ServiceConfig config);

  /// Throws InvalidInput on K mismatch or schema violation, StorageError when
  /// the log cannot be written. A repeated case_id returns the first result
  /// without appending.
  IngestResult ingest(const CaseRecord& record);

  /// Last write wins per case. Throws NotFound for an unknown case.
  AdjudicationTally adjudicate(const Adjudication& adjudication);

  CaseView get_case(const std::string& case_id) const;
  /// Cases matching the filter, adjudications overlaid onto missing truth.
  Dataset snapshot(const DatasetFilter& filter = {}) const;
  /// Throws InvalidInput when no cases match.
  EvaluationReport report(const ReportQuery& query) const;
  DriftVerdict drift(const DriftQuery& query) const;
  /// Never changes the active policy. Throws PolicyRejected.
  WhatIfResponse what_if(const WhatIfRequest& request) const;

  VersionedPolicy policy() const;
  /// Throws PolicyRejected; returns the new version.
  int put_policy(const StratificationPolicy& policy);

  AdjudicationTally tally() const;
  std::size_t case_count() const;
  int ensemble_size() const { return config_.ensemble_size; }
  const std::vector<LoadWarning>& replay_warnings() const { return replay_warnings_; }

 private:
  struct Entry {
    CaseRecord record;
    IngestResult result;
  };

  AdjudicationTally recompute_tally() const;  // caller holds the lock
  Dataset snapshot_locked(const DatasetFilter& filter) const;

  ServiceConfig config_;
  std::unique_ptr<EventLog> log_;
  mutable std::shared_mutex mutex_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, Adjudication> adjudications_;
  std::vector<StratificationPolicy> policy_history_;  // version = position + 1
  AdjudicationTally tally_;
  std::vector<LoadWarning> replay_warnings_;
};

}  // namespace emm
