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

#include "bagcell/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "bagcell/errors.hpp"

namespace bagcell {

namespace {

using PhaseField = std::optional<double> PhaseTimings::*;

struct PhaseColumn {
  const char* key;
  const char* header;
  PhaseField field;
};

constexpr PhaseColumn kPhaseColumns[] = {
    {"feeding", "Feeding (s)", &PhaseTimings::feeding_s},
    {"cutting", "Cutting (s)", &PhaseTimings::cutting_s},
    {"removal", "Removal (s)", &PhaseTimings::removal_s},
    {"delivery", "Delivery (s)", &PhaseTimings::delivery_s},
};

double mean_of(const std::vector<RunReport>& rows, double (*get)(const RunReport&)) {
  double sum = 0.0;
  for (const auto& r : rows) sum += get(r);
  return sum / static_cast<double>(rows.size());
}

std::string join(const std::vector<std::string>& cells, TableStyle style) {
  std::string out = style == TableStyle::Markdown ? "| " : "";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += style == TableStyle::Markdown ? " | " : ",";
    out += cells[i];
  }
  if (style == TableStyle::Markdown) out += " |";
  return out + "\n";
}

}  // namespace

Stat compute_stat(const std::vector<double>& values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

CampaignReport summarize_campaign(const std::vector<RunReport>& rows) {
  if (rows.empty()) throw EmptyCampaign();
  CampaignReport c;
  c.rows = rows;
  c.mean_detected = mean_of(rows, [](const RunReport& r) { return double(r.detected); });
  c.mean_picked = mean_of(rows, [](const RunReport& r) { return double(r.picked); });
  c.mean_placed = mean_of(rows, [](const RunReport& r) { return double(r.placed); });
  c.mean_detection_rate = mean_of(rows, [](const RunReport& r) { return r.detection_rate(); });
  c.mean_picking_rate = mean_of(rows, [](const RunReport& r) { return r.picking_rate(); });
  c.mean_placing_rate = mean_of(rows, [](const RunReport& r) { return r.placing_rate(); });

  std::vector<double> minutes;
  for (const auto& r : rows) {
    minutes.push_back(r.total_time_min());
    c.aborted = c.aborted || r.aborted;
  }
  c.total_time_min = compute_stat(minutes);

  for (const auto& col : kPhaseColumns) {
    std::vector<double> values;
    for (const auto& r : rows) {
      if (r.phases.*col.field) values.push_back(*(r.phases.*col.field));
    }
    if (!values.empty()) c.phase_stats[col.key] = compute_stat(values);
  }
  return c;
}

std::string render_table(const CampaignReport& report, TableStyle style) {
  bool timings = false;
  bool multi_cycle = false;
  for (const auto& r : report.rows) {
    timings = timings || !r.phases.empty();
    multi_cycle = multi_cycle || r.cycle != 1;
  }

  std::vector<std::string> header{"Test"};
  if (multi_cycle) header.push_back("Cycle");
  for (const char* h : {"Detected", "Picked", "Placed", "Total Time (min)",
                        "Detection Success Rate (%)", "Picking Success Rate (%)",
                        "Placing Success Rate (%)"}) {
    header.push_back(h);
  }
  if (timings) {
    for (const auto& col : kPhaseColumns) header.push_back(col.header);
  }

  std::string out = join(header, style);
  if (style == TableStyle::Markdown) {
    out += join(std::vector<std::string>(header.size(), "---"), style);
  }

  for (const auto& r : report.rows) {
    std::vector<std::string> cells{std::to_string(r.test)};
    if (multi_cycle) cells.push_back(std::to_string(r.cycle));
    cells.push_back(std::to_string(r.detected));
    cells.push_back(std::to_string(r.picked));
    cells.push_back(std::to_string(r.placed));
    cells.push_back(fmt::format("{:.1f}", r.total_time_min()));
    cells.push_back(fmt::format("{:.2f}", r.detection_rate()));
    cells.push_back(fmt::format("{:.2f}", r.picking_rate()));
    cells.push_back(fmt::format("{:.2f}", r.placing_rate()));
    if (timings) {
      for (const auto& col : kPhaseColumns) {
        const auto& v = r.phases.*col.field;
        cells.push_back(v ? fmt::format("{:.1f}", *v) : "");
      }
    }
    out += join(cells, style);
  }

  std::vector<std::string> means{"Mean"};
  if (multi_cycle) means.push_back("");
  means.push_back(fmt::format("{:.2f}", report.mean_detected));
  means.push_back(fmt::format("{:.2f}", report.mean_picked));
  means.push_back(fmt::format("{:.2f}", report.mean_placed));
  means.push_back(fmt::format("{:.1f}", report.total_time_min.mean));
  means.push_back(fmt::format("{:.2f}", report.mean_detection_rate));
  means.push_back(fmt::format("{:.2f}", report.mean_picking_rate));
  means.push_back(fmt::format("{:.2f}", report.mean_placing_rate));
  if (timings) {
    for (const auto& col : kPhaseColumns) {
      auto it = report.phase_stats.find(col.key);
      means.push_back(it == report.phase_stats.end() ? "" : fmt::format("{:.1f}", it->second.mean));
    }
  }
  out += join(means, style);
  return out;
}

std::string render_summary(const CampaignReport& report) {
  std::string out = fmt::format(
      "rows: {}\ndetection: {:.2f}%  picking: {:.2f}%  placing: {:.2f}%\n"
      "total time: {:.2f} min (sd {:.2f})\n",
      report.rows.size(), report.mean_detection_rate, report.mean_picking_rate,
      report.mean_placing_rate, report.total_time_min.mean, report.total_time_min.stddev);
  for (const auto& col : kPhaseColumns) {
    auto it = report.phase_stats.find(col.key);
    if (it == report.phase_stats.end()) continue;
    out += fmt::format("{}: {:.2f} s (sd {:.2f})\n", col.key, it->second.mean, it->second.stddev);
  }
  if (report.aborted) out += "aborted: yes\n";
  return out;
}

}  // namespace bagcell
