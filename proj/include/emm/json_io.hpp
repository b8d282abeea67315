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

// JSON views of reports and policies. Key order is fixed so identical
// inputs serialize to identical bytes. Undefined values are null.

#include <filesystem>

#include "emm/core.hpp"
#include "emm/drift.hpp"
#include "emm/evaluation.hpp"
#include "emm/metrics.hpp"
#include "emm/simulator.hpp"
#include "emm/store.hpp"
#include "json.hpp"

namespace emm {

using Json = nlohmann::ordered_json;

Json json_of(const StratificationPolicy& policy);
/// Throws InvalidInput on a structurally malformed policy document. Level
/// sets are not validated here; use validate_policy().
StratificationPolicy policy_from_json(const nlohmann::json& j);
StratificationPolicy load_policy(const std::filesystem::path& path);

Json json_of(const PolicyValidation& validation);
Json json_of(const AgreementLevel& level);
Json json_of(const BaselineMetrics& m);
Json json_of(const AccuracyByAgreementTable& table);
Json json_of(const CategoryReport& report);
Json json_of(const TradeoffReport& report);
Json json_of(const ErrorDetectionCurve& curve);
Json json_of(const AucSummary& auc);
Json json_of(const BootstrapInterval& interval);
Json json_of(const EvaluationReport& report);
Json json_of(const AgreementHistogram& histogram);
Json json_of(const DriftVerdict& verdict);
Json json_of(const AblationReport& report);
Json json_of(const Adjudication& adjudication);

/// Store-schema field names (v, kind, case_id, ts, ...).
Json json_of(const CaseRecord& record);

/// Accepts the store-schema object; "v" and "kind" are optional here.
/// Throws SchemaError.
CaseRecord case_record_from_json(const nlohmann::json& j);
Adjudication adjudication_from_json(const nlohmann::json& j);

}  // namespace emm
