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

#include "bagcell/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "bagcell/errors.hpp"

namespace bagcell {

std::string_view to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Publish: return "publish";
    case TraceKind::DeviceEvent: return "device_event";
    case TraceKind::Transition: return "transition";
    case TraceKind::Action: return "action";
    case TraceKind::Metric: return "metric";
  }
  return "unknown";
}

std::optional<TraceKind> trace_kind_from_string(std::string_view s) {
  for (TraceKind k : {TraceKind::Publish, TraceKind::DeviceEvent, TraceKind::Transition,
                      TraceKind::Action, TraceKind::Metric}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

const TraceRecord& TraceLog::append(double timestamp, TraceKind kind, std::string entity,
                                    nlohmann::json payload) {
  const std::uint64_t seq = records_.empty() ? 1 : records_.back().seq + 1;
  records_.push_back({seq, timestamp, kind, std::move(entity), std::move(payload)});
  return records_.back();
}

std::string to_line(const TraceRecord& r) {
  nlohmann::json j;
  j["v"] = kTraceVersion;
  j["seq"] = r.seq;
  j["t"] = r.timestamp;
  j["kind"] = to_string(r.kind);
  j["entity"] = r.entity;
  j["payload"] = r.payload;
  return j.dump();
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const auto& r : records) out << to_line(r) << '\n';
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedTrace(line_no, "invalid JSON (" + std::string(e.what()) + ")");
    }
    if (!j.is_object()) throw MalformedTrace(line_no, "record is not an object");
    for (const char* key : {"v", "seq", "t", "kind", "entity", "payload"}) {
      if (!j.contains(key)) throw MalformedTrace(line_no, std::string("missing field '") + key + "'");
    }
    if (!j["v"].is_number_integer() || j["v"].get<int>() != kTraceVersion) {
      throw MalformedTrace(line_no, "unsupported version");
    }
    if (!j["seq"].is_number_unsigned() || !j["t"].is_number() || !j["kind"].is_string() ||
        !j["entity"].is_string()) {
      throw MalformedTrace(line_no, "field has the wrong type");
    }
    auto kind = trace_kind_from_string(j["kind"].get<std::string>());
    if (!kind) throw MalformedTrace(line_no, "unknown kind '" + j["kind"].get<std::string>() + "'");

    TraceRecord r{j["seq"].get<std::uint64_t>(), j["t"].get<double>(), *kind,
                  j["entity"].get<std::string>(), j["payload"]};
    if (!out.empty()) {
      if (r.seq <= out.back().seq) throw MalformedTrace(line_no, "seq not increasing");
      if (r.timestamp < out.back().timestamp) throw MalformedTrace(line_no, "timestamp went back");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_trace(const std::string& path, const std::vector<TraceRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write trace '" + path + "'");
  write_trace(out, records);
}

std::vector<TraceRecord> load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read trace '" + path + "'");
  return read_trace(in);
}

}  // namespace bagcell
