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

#include "emm/http.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>

#include "emm/errors.hpp"
#include "emm/json_io.hpp"
#include "httplib.h"

namespace emm {

namespace {

constexpr const char* kJson = "application/json";

/// Malformed request syntax (400), as opposed to a well-formed request with
/// unacceptable content (422).
class BadRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json error_body(const std::string& message) { return Json{{"error", message}}; }

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

Json json_of(const IngestResult& r) {
  return Json{{"case_id", r.case_id},
              {"agreement", emm::json_of(r.agreement)},
              {"category", to_string(r.stratification.category)},
              {"suggested_action", r.stratification.action},
              {"policy_version", r.policy_version},
              {"duplicate", r.duplicate}};
}

Json json_of(const AdjudicationTally& t) {
  Json by_category;
  for (auto c : kAllCategories) {
    const auto& n = t.of(c);
    by_category[std::string(to_string(c))] = {
        {"adjudicated", n.adjudicated}, {"confirmed", n.confirmed}, {"corrected", n.corrected}};
  }
  return Json{{"realized_false_alarms", t.realized_false_alarms()},
              {"realized_corrections", t.realized_corrections()},
              {"by_category", by_category}};
}

Json json_of(const CaseView& v) {
  Json j = emm::json_of(v.record);
  j["stratification"] = json_of(v.stratification);
  j["adjudication"] = v.adjudication ? emm::json_of(*v.adjudication) : Json(nullptr);
  return j;
}

Json json_of(const VersionedPolicy& p) {
  return Json{{"version", p.version}, {"policy", emm::json_of(p.policy)}};
}

Json json_of(const WhatIfResponse& r) {
  return Json{{"evaluated_cases", r.evaluated_cases},
              {"prevalence", r.prevalence ? Json(*r.prevalence) : Json("native")},
              {"seed", r.seed},
              {"categories", emm::json_of(r.categories)},
              {"tradeoff", r.tradeoff ? emm::json_of(*r.tradeoff) : Json(nullptr)},
              {"baseline", r.baseline ? emm::json_of(*r.baseline) : Json(nullptr)}};
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BadRequest(std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw BadRequest("query parameter " + key + ": cannot parse '" + text + "'");
  }
  return v;
}

template <typename T>
std::optional<T> query(const httplib::Request& req, const std::string& key) {
  if (!req.has_param(key)) return std::nullopt;
  return parse_number<T>(key, req.get_param_value(key));
}

std::optional<double> check_prevalence(std::optional<double> p) {
  if (p && !(*p > 0.0 && *p < 1.0)) throw InvalidInput("prevalence must lie in (0,1) or be \"native\"");
  return p;
}

std::optional<double> prevalence_param(const httplib::Request& req) {
  if (!req.has_param("prevalence")) return std::nullopt;
  const auto text = req.get_param_value("prevalence");
  if (text == "native") return std::nullopt;
  return check_prevalence(parse_number<double>("prevalence", text));
}

ResampleMode mode_from(const std::string& text) {
  auto m = parse_resample_mode(text);
  if (!m) throw BadRequest("unknown resample mode '" + text + "'");
  return *m;
}

DatasetFilter filter_from_query(const httplib::Request& req) {
  DatasetFilter f;
  f.from_ms = query<std::int64_t>(req, "from_ms");
  f.to_ms = query<std::int64_t>(req, "to_ms");
  if (req.has_param("cohort_tag")) f.cohort_tag = req.get_param_value("cohort_tag");
  return f;
}

DatasetFilter filter_from_body(const nlohmann::json& j) {
  DatasetFilter f;
  try {
    if (j.contains("from_ms") && !j["from_ms"].is_null()) f.from_ms = j["from_ms"].get<std::int64_t>();
    if (j.contains("to_ms") && !j["to_ms"].is_null()) f.to_ms = j["to_ms"].get<std::int64_t>();
    if (j.contains("cohort_tag") && !j["cohort_tag"].is_null()) {
      f.cohort_tag = j["cohort_tag"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("filter: ") + e.what());
  }
  return f;
}

std::int64_t required(const httplib::Request& req, const std::string& key) {
  auto v = query<std::int64_t>(req, key);
  if (!v) throw BadRequest("missing query parameter " + key);
  return *v;
}

// Runs a handler and maps exceptions onto status codes.
httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const BadRequest& e) {
      reply(res, 400, error_body(e.what()));
    } catch (const PolicyRejected& e) {
      Json body = error_body("policy rejected");
      body["violations"] = emm::json_of(e.validation())["violations"];
      reply(res, 422, body);
    } catch (const NotFound& e) {
      reply(res, 404, error_body(e.what()));
    } catch (const InvalidInput& e) {
      reply(res, 422, error_body(e.what()));
    } catch (const StorageError& e) {
      reply(res, 503, error_body(e.what()));
    } catch (const std::exception& e) {
      reply(res, 500, error_body(e.what()));
    }
  };
}

}  // namespace

HttpConfig parse_listen_addr(const std::string& text) {
  HttpConfig c;
  std::string port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    c.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
    if (c.host.empty()) c.host = "0.0.0.0";
  }
  int port = 0;
  const auto* end = port_text.data() + port_text.size();
  auto [ptr, ec] = std::from_chars(port_text.data(), end, port);
  if (ec != std::errc() || ptr != end || port < 0 || port > 65535) {
    throw InvalidInput("bad listen address '" + text + "'");
  }
  c.port = port;
  return c;
}

void install_routes(httplib::Server& server, MonitorService& service,
                    std::optional<std::string> bearer_token) {
  if (bearer_token) {
    server.set_pre_routing_handler([token = "Bearer " + *bearer_token](const httplib::Request& req,
                                                                       httplib::Response& res) {
      if (req.get_header_value("Authorization") == token) return httplib::Server::HandlerResponse::Unhandled;
      reply(res, 401, error_body("missing or invalid bearer token"));
      return httplib::Server::HandlerResponse::Handled;
    });
  }

  server.Post("/v1/predictions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto record = case_record_from_json(parse_body(req));
    reply(res, 200, json_of(service.ingest(record)));
  }));

  server.Post("/v1/adjudications", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto adjudication = adjudication_from_json(parse_body(req));
    reply(res, 200, json_of(service.adjudicate(adjudication)));
  }));

  server.Get("/v1/cases/:id", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, json_of(service.get_case(req.path_params.at("id"))));
  }));

  server.Get("/v1/report", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    ReportQuery q;
    q.filter = filter_from_query(req);
    q.prevalence = prevalence_param(req);
    if (req.has_param("mode")) q.mode = mode_from(req.get_param_value("mode"));
    if (auto seed = query<std::uint64_t>(req, "seed")) q.seed = *seed;
    if (auto draws = query<int>(req, "draws")) {
      if (*draws < 0) throw InvalidInput("draws must be non-negative");
      q.n_draws = *draws;
    }
    if (service.snapshot(q.filter).empty()) {
      reply(res, 200, Json{{"source_cases", 0}, {"evaluated_cases", 0}, {"notes", {"no cases match the filter"}}});
      return;
    }
    reply(res, 200, emm::json_of(service.report(q)));
  }));

  server.Get("/v1/drift", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    DriftQuery q;
    q.baseline = {required(req, "baseline_from"), required(req, "baseline_to")};
    q.current = {required(req, "current_from"), required(req, "current_to")};
    if (auto t = query<double>(req, "threshold")) q.config.threshold = *t;
    if (auto m = query<std::int64_t>(req, "min_count")) q.config.min_count = *m;
    reply(res, 200, emm::json_of(service.drift(q)));
  }));

  server.Post("/v1/whatif", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.is_object() || !body.contains("policy")) throw InvalidInput("what-if body needs a policy");
    WhatIfRequest w;
    w.policy = policy_from_json(body["policy"]);
    w.filter = filter_from_body(body);
    try {
      if (body.contains("prevalence") && !body["prevalence"].is_null() &&
          !(body["prevalence"].is_string() && body["prevalence"] == "native")) {
        w.prevalence = check_prevalence(body["prevalence"].get<double>());
      }
      if (body.contains("mode")) w.mode = mode_from(body["mode"].get<std::string>());
      if (body.contains("seed")) w.seed = body["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("what-if: ") + e.what());
    }
    reply(res, 200, json_of(service.what_if(w)));
  }));

  server.Get("/v1/policy", guarded([&service](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, json_of(service.policy()));
  }));

  server.Put("/v1/policy", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto& doc = body.is_object() && body.contains("policy") ? body["policy"] : body;
    service.put_policy(policy_from_json(doc));
    reply(res, 200, json_of(service.policy()));
  }));
}

bool serve(MonitorService& service, const HttpConfig& config) {
  httplib::Server server;
  install_routes(server, service, config.bearer_token);
  return server.listen(config.host, config.port);
}

EnvConfig config_from_env() {
  EnvConfig c;
  const char* log = std::getenv("EMM_LOG_PATH");
  c.service.log_path = log && *log ? log : "emm_events.jsonl";
  if (const char* policy = std::getenv("EMM_POLICY_PATH"); policy && *policy) c.service.policy_path = policy;
  if (const char* addr = std::getenv("EMM_LISTEN_ADDR"); addr && *addr) c.http = parse_listen_addr(addr);
  if (const char* token = std::getenv("EMM_BEARER_TOKEN"); token && *token) c.http.bearer_token = token;
  return c;
}

}  // namespace emm
