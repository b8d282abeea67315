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

#include "emm/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "emm/errors.hpp"
#include "json.hpp"

namespace emm {

using OrderedJson = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string dump_line(const OrderedJson& j) {
  try {
    return j.dump();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("entry is not valid UTF-8: ") + e.what());
  }
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::int64_t require_int(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number_integer()) throw SchemaError(std::string("field \"") + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

BinaryLabel label_of(const nlohmann::json& v, const char* key) {
  if (v.is_string()) {
    if (auto l = parse_label(v.get_ref<const std::string&>())) return *l;
  }
  throw SchemaError(std::string("field \"") + key + "\" must be \"pos\" or \"neg\"");
}

}  // namespace

void validate_entry(const EventLogEntry& entry) {
  std::visit(Overloaded{
                 [](const CaseRecord& r) {
                   if (r.case_id.empty()) throw SchemaError("case_id must be nonempty");
                   if (r.subs.empty()) throw SchemaError("subs must be nonempty");
                 },
                 [](const Adjudication& a) {
                   if (a.case_id.empty()) throw SchemaError("case_id must be nonempty");
                   if (a.reviewer_id.empty()) throw SchemaError("reviewer must be nonempty");
                 },
             },
             entry);
}

std::string serialize(const CaseRecord& r) {
  validate_entry(r);
  OrderedJson j;
  j["v"] = kSchemaVersion;
  j["kind"] = "prediction";
  j["case_id"] = r.case_id;
  j["ts"] = r.timestamp_ms;
  j["primary"] = to_string(r.primary);
  auto& subs = j["subs"] = OrderedJson::array();
  for (auto s : r.subs) subs.push_back(to_string(s));
  j["truth"] = r.ground_truth ? OrderedJson(to_string(*r.ground_truth)) : OrderedJson(nullptr);
  j["cohort"] = r.cohort_tag ? OrderedJson(*r.cohort_tag) : OrderedJson(nullptr);
  return dump_line(j);
}

std::string serialize(const Adjudication& a) {
  validate_entry(a);
  OrderedJson j;
  j["v"] = kSchemaVersion;
  j["kind"] = "adjudication";
  j["case_id"] = a.case_id;
  j["reviewer"] = a.reviewer_id;
  j["label"] = to_string(a.final_label);
  j["ts"] = a.reviewed_at_ms;
  return dump_line(j);
}

std::string serialize(const EventLogEntry& entry) {
  return std::visit([](const auto& e) { return serialize(e); }, entry);
}

ParsedLine parse_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("line is not a JSON object");
  const auto version = require_int(j, "v");
  if (version != kSchemaVersion) {
    throw SchemaError("unsupported schema version " + std::to_string(version));
  }
  const std::string kind = require_string(j, "kind");
  if (kind == "prediction") {
    CaseRecord r;
    r.case_id = require_string(j, "case_id");
    if (r.case_id.empty()) throw SchemaError("case_id must be nonempty");
    r.timestamp_ms = require_int(j, "ts");
    r.primary = label_of(require(j, "primary"), "primary");
    const auto& subs = require(j, "subs");
    if (!subs.is_array() || subs.empty()) throw SchemaError("field \"subs\" must be a nonempty array");
    for (const auto& s : subs) r.subs.push_back(label_of(s, "subs"));
    if (auto it = j.find("truth"); it != j.end() && !it->is_null()) {
      r.ground_truth = label_of(*it, "truth");
    }
    if (auto it = j.find("cohort"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaError("field \"cohort\" must be a string or null");
      r.cohort_tag = it->get<std::string>();
    }
    return r;
  }
  if (kind == "adjudication") {
    Adjudication a;
    a.case_id = require_string(j, "case_id");
    if (a.case_id.empty()) throw SchemaError("case_id must be nonempty");
    a.reviewer_id = require_string(j, "reviewer");
    a.final_label = label_of(require(j, "label"), "label");
    a.reviewed_at_ms = require_int(j, "ts");
    return a;
  }
  return UnknownKind{kind};
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw StorageError("cannot open event log " + path_.string() + ": " + std::strerror(errno));
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

void EventLog::append(const EventLogEntry& entry) {
  const std::string line = serialize(entry) + "\n";
  std::lock_guard lock(mutex_);
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError("write to event log " + path_.string() + " failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw StorageError("fsync of event log " + path_.string() + " failed: " + std::strerror(errno));
  }
}

void append_event(EventLog& log, const EventLogEntry& entry) { log.append(entry); }

LoadedDataset parse_dataset(std::istream& in, const LoadOptions& options) {
  struct Numbered {
    std::size_t line;
    ParsedLine value;
  };
  LoadedDataset out;
  std::vector<Numbered> parsed;
  std::size_t nonblank = 0;
  std::size_t malformed = 0;
  std::string text;
  for (std::size_t line_no = 1; std::getline(in, text); ++line_no) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++nonblank;
    try {
      parsed.push_back({line_no, parse_line(text)});
    } catch (const SchemaError& e) {
      ++malformed;
      out.warnings.push_back({line_no, std::string("malformed line: ") + e.what()});
    }
  }
  if (nonblank > 0 &&
      static_cast<double>(malformed) > options.max_malformed_fraction * static_cast<double>(nonblank)) {
    throw InvalidInput(std::to_string(malformed) + " of " + std::to_string(nonblank) +
                       " lines are malformed (first at line " +
                       std::to_string(out.warnings.front().line) + ": " +
                       out.warnings.front().message + ")");
  }

  // Predictions first, so adjudications may precede their case in the file.
  std::unordered_set<std::string> all_ids;
  std::unordered_map<std::string, std::size_t> kept;  // case_id -> index in out.cases
  std::optional<std::size_t> k;
  for (auto& item : parsed) {
    auto* r = std::get_if<CaseRecord>(&item.value);
    if (!r) continue;
    if (!all_ids.insert(r->case_id).second) {
      out.warnings.push_back({item.line, "duplicate case_id " + r->case_id + "; record ignored"});
      continue;
    }
    if (!k) k = r->subs.size();
    if (r->subs.size() != *k) {
      out.warnings.push_back({item.line, "case " + r->case_id + " has " +
                                             std::to_string(r->subs.size()) +
                                             " sub-model predictions, expected " +
                                             std::to_string(*k) + "; record ignored"});
      continue;
    }
    if (options.from_ms && r->timestamp_ms < *options.from_ms) continue;
    if (options.to_ms && r->timestamp_ms >= *options.to_ms) continue;
    if (options.cohort_tag && r->cohort_tag != options.cohort_tag) continue;
    kept.emplace(r->case_id, out.cases.size());
    out.cases.push_back(std::move(*r));
  }

  std::unordered_map<std::string, BinaryLabel> overlay;
  for (auto& item : parsed) {
    if (auto* u = std::get_if<UnknownKind>(&item.value)) {
      out.warnings.push_back({item.line, "unknown entry kind \"" + u->kind + "\"; line skipped"});
      continue;
    }
    auto* a = std::get_if<Adjudication>(&item.value);
    if (!a) continue;
    if (!all_ids.contains(a->case_id)) {
      out.warnings.push_back({item.line, "adjudication for unknown case_id " + a->case_id + "; skipped"});
      continue;
    }
    if (!kept.contains(a->case_id)) continue;
    overlay[a->case_id] = a->final_label;
    out.adjudications.push_back(std::move(*a));
  }
  if (options.overlay_adjudications) {
    for (const auto& [id, label] : overlay) {
      auto& c = out.cases[kept.at(id)];
      if (!c.ground_truth) c.ground_truth = label;
    }
  }
  std::stable_sort(out.warnings.begin(), out.warnings.end(),
                   [](const LoadWarning& x, const LoadWarning& y) { return x.line < y.line; });
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read dataset " + path.string());
  return parse_dataset(in, options);
}

void write_dataset(std::ostream& out, std::span<const CaseRecord> cases) {
  for (const auto& c : cases) out << serialize(c) << '\n';
}

}  // namespace emm
