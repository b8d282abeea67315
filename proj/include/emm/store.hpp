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

// Append-only JSONL event log. One object per line, UTF-8:
//
//   {"v":1,"kind":"prediction","case_id":"c1","ts":1700000000000,"primary":"pos",
//    "subs":["pos","neg",...],"truth":"pos"|"neg"|null,"cohort":"ed"|null}
//   {"v":1,"kind":"adjudication","case_id":"c1","reviewer":"r7","label":"neg","ts":...}
//
// Writers emit exactly these fields in this order. Readers ignore unknown
// fields and warn on unknown kinds.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "emm/core.hpp"

namespace emm {

inline constexpr int kSchemaVersion = 1;

struct Adjudication {
  std::string case_id;
  std::string reviewer_id;
  BinaryLabel final_label = BinaryLabel::Negative;
  std::int64_t reviewed_at_ms = 0;
  bool operator==(const Adjudication&) const = default;
};

using EventLogEntry = std::variant<CaseRecord, Adjudication>;

/// Throws SchemaError if the entry cannot be written under the schema.
void validate_entry(const EventLogEntry& entry);

/// One JSONL line, without the trailing newline. Throws SchemaError.
std::string serialize(const CaseRecord& record);
std::string serialize(const Adjudication& adjudication);
std::string serialize(const EventLogEntry& entry);

/// A line whose "kind" is not one this reader knows.
struct UnknownKind {
  std::string kind;
};

using ParsedLine = std::variant<CaseRecord, Adjudication, UnknownKind>;

/// Parses one line. Throws SchemaError naming the problem.
ParsedLine parse_line(std::string_view line);

/// Single-writer append handle. Every append is one write(2) of a complete
/// line followed by fsync, so concurrent readers always see whole lines.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Validates, then appends. SchemaError leaves the file untouched;
  /// StorageError carries the path.
  void append(const EventLogEntry& entry);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mutex_;
};

void append_event(EventLog& log, const EventLogEntry& entry);

struct LoadOptions {
  std::optional<std::int64_t> from_ms;  // inclusive
  std::optional<std::int64_t> to_ms;    // exclusive
  std::optional<std::string> cohort_tag;
  /// Adjudications fill in ground truth for cases that lack one.
  bool overlay_adjudications = true;
  double max_malformed_fraction = 0.10;
};

struct LoadWarning {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadedDataset {
  Dataset cases;
  /// Adjudications of loaded cases, file order.
  std::vector<Adjudication> adjudications;
  std::vector<LoadWarning> warnings;
};

/// Throws StorageError if the file cannot be read, InvalidInput if more than
/// max_malformed_fraction of the non-blank lines are malformed.
LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});
LoadedDataset parse_dataset(std::istream& in, const LoadOptions& options = {});

/// Writes prediction lines, one per record.
void write_dataset(std::ostream& out, std::span<const CaseRecord> cases);

}  // namespace emm
