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

// HTTP+JSON binding for MonitorService.
//
//   POST /v1/predictions      store-schema case record -> stratification
//   POST /v1/adjudications    store-schema adjudication -> tally
//   GET  /v1/cases/{id}
//   GET  /v1/report           ?from_ms&to_ms&cohort_tag&prevalence&mode&seed&draws
//   GET  /v1/drift            ?baseline_from&baseline_to&current_from&current_to&threshold&min_count
//   POST /v1/whatif           {policy, prevalence, mode, seed, from_ms, to_ms, cohort_tag}
//   GET  /v1/policy
//   PUT  /v1/policy
//
// Status codes: 400 malformed JSON or query, 401 bad bearer token, 404
// unknown case, 422 invalid record or policy, 503 storage failure.

#include <optional>
#include <string>

#include "emm/service.hpp"

namespace httplib {
class Server;
}

namespace emm {

struct HttpConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// When set, every request must carry "Authorization: Bearer <token>".
  std::optional<std::string> bearer_token;
};

/// Splits "host:port"; a bare port binds 127.0.0.1. Throws InvalidInput.
HttpConfig parse_listen_addr(const std::string& text);

void install_routes(httplib::Server& server, MonitorService& service,
                    std::optional<std::string> bearer_token = std::nullopt);

/// Blocks until the server stops. Returns false if the address cannot be bound.
bool serve(MonitorService& service, const HttpConfig& config);

/// Service and listener configured from EMM_LOG_PATH, EMM_LISTEN_ADDR,
/// EMM_POLICY_PATH and EMM_BEARER_TOKEN.
struct EnvConfig {
  ServiceConfig service;
  HttpConfig http;
};
EnvConfig config_from_env();

}  // namespace emm
