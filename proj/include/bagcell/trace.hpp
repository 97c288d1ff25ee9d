// Copyright 2026 The Bagcell Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace bagcell {

inline constexpr int kTraceVersion = 1;

enum class TraceKind { Publish, DeviceEvent, Transition, Action, Metric };

std::string_view to_string(TraceKind k);
std::optional<TraceKind> trace_kind_from_string(std::string_view s);

/// One line of a JSON Lines trace:
///
///     {"entity":"drop","kind":"publish","payload":{...},"seq":12,"t":31.5,"v":1}
struct TraceRecord {
  std::uint64_t seq = 0;
  double timestamp = 0.0;
  TraceKind kind = TraceKind::Action;
  std::string entity;
  nlohmann::json payload;

  bool operator==(const TraceRecord&) const = default;
};

/// Append-only record list that assigns the global sequence numbers.
class TraceLog {
 public:
  const TraceRecord& append(double timestamp, TraceKind kind, std::string entity,
                            nlohmann::json payload);
  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<TraceRecord> records_;
};

std::string to_line(const TraceRecord& record);

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

/// Throws MalformedTrace with the 1-based line number on bad JSON, a missing
/// field, a version mismatch, a non-increasing seq or a timestamp going back.
std::vector<TraceRecord> read_trace(std::istream& in);

void save_trace(const std::string& path, const std::vector<TraceRecord>& records);
std::vector<TraceRecord> load_trace(const std::string& path);

}  // namespace bagcell
