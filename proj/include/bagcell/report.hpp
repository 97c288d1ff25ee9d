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

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bagcell {

inline constexpr int kSlotsPerCycle = 8;

/// Seconds spent in each phase of one cycle. Absent when the phase did not
/// run (for example after an abort).
struct PhaseTimings {
  std::optional<double> feeding_s;
  std::optional<double> cutting_s;
  std::optional<double> removal_s;
  std::optional<double> delivery_s;

  bool empty() const { return !feeding_s && !cutting_s && !removal_s && !delivery_s; }
  bool operator==(const PhaseTimings&) const = default;
};

/// One row of the trial table. Total time is the pick-and-place
/// (feeding) time; the other phases are in `phases`.
struct RunReport {
  int test = 1;
  int cycle = 1;
  int detected = 0;
  int picked = 0;
  int placed = 0;
  int detected_first_attempt = 0;
  double total_time_s = 0.0;
  PhaseTimings phases;
  bool aborted = false;

  double total_time_min() const { return total_time_s / 60.0; }
  double detection_rate() const { return 100.0 * detected / kSlotsPerCycle; }
  double picking_rate() const { return 100.0 * picked / kSlotsPerCycle; }
  double placing_rate() const { return 100.0 * placed / kSlotsPerCycle; }

  bool operator==(const RunReport&) const = default;
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  int n = 0;
  bool operator==(const Stat&) const = default;
};

Stat compute_stat(const std::vector<double>& values);

struct CampaignReport {
  std::vector<RunReport> rows;
  double mean_detected = 0.0;
  double mean_picked = 0.0;
  double mean_placed = 0.0;
  double mean_detection_rate = 0.0;
  double mean_picking_rate = 0.0;
  double mean_placing_rate = 0.0;
  Stat total_time_min;
  std::map<std::string, Stat> phase_stats;  // seconds, keyed by phase name
  bool aborted = false;

  bool operator==(const CampaignReport&) const = default;
};

/// Throws EmptyCampaign when `rows` is empty.
CampaignReport summarize_campaign(const std::vector<RunReport>& rows);

enum class TableStyle { Markdown, Csv };

/// Trial table column order, one line per row plus a means line. Phase timing
/// columns only appear when at least one row has timings.
std::string render_table(const CampaignReport& report, TableStyle style);

/// Short human-readable means summary.
std::string render_summary(const CampaignReport& report);

}  // namespace bagcell
