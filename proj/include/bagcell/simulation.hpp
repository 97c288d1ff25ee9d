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

#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "bagcell/bus.hpp"
#include "bagcell/config.hpp"
#include "bagcell/faults.hpp"
#include "bagcell/motion.hpp"
#include "bagcell/orchestrator.hpp"
#include "bagcell/report.hpp"
#include "bagcell/trace.hpp"
#include "bagcell/vision.hpp"
#include "bagcell/world.hpp"

namespace bagcell {

struct FeedingReport {
  CycleTally tally;
  double elapsed_s = 0.0;
  std::vector<ActionOutcome> outcomes;
};

struct CutReport {
  int cut = 0;
  std::vector<int> timeouts;  // enclosure of every SuctionTimeout, in order
  double elapsed_s = 0.0;
  std::vector<ActionOutcome> outcomes;
};

struct RemovalReport {
  int removed = 0;
  int failed = 0;
  int retries = 0;
  double elapsed_s = 0.0;
  std::vector<ActionOutcome> outcomes;
};

struct DeliveryReport {
  int delivered = 0;
  int failed = 0;
  std::vector<int> stalled;  // pusher indices
  double elapsed_s = 0.0;
  std::vector<ActionOutcome> outcomes;
};

struct SimOptions {
  int test = 1;
  int cycles = 3;
  // Runs check_invariants after every event and keeps the violations.
  bool check_invariants = false;
};

/// Seeds the engine of one test so that tests are independent of the order
/// in which they run.
Rng make_rng(std::uint64_t seed, int test);

/// Event loop around the pure transition function. Owns the world, the bus,
/// the fault injector and the trace of one simulated test.
class Simulation {
 public:
  explicit Simulation(CellConfig config, FaultScript script = {}, SimOptions options = {});

  /// Each run_* call starts the machine when it is idle, drives it until
  /// the phase ends and throws AbortRequested if the run aborts.
  FeedingReport run_feeding_cycle();
  CutReport run_cutting_sequence();
  RemovalReport run_removal_sequence();
  DeliveryReport run_delivery_sequence();

  /// Runs until Done or Aborted; returns one row per cycle that started.
  std::vector<RunReport> run();

  /// Queues an abort that takes effect at the next event.
  void request_abort(std::string reason);

  const World& world() const { return world_; }
  const OrchestratorState& state() const { return state_; }
  const CellConfig& config() const { return config_; }
  const std::vector<TraceRecord>& trace() const { return trace_.records(); }
  const std::vector<ActionOutcome>& outcomes() const { return outcomes_; }
  const std::vector<RunReport>& cycle_reports() const { return reports_; }
  const std::vector<std::string>& violations() const { return violations_; }
  const FaultScript& script() const { return injector_.script(); }
  bool aborted() const { return state_.phase == Phase::Aborted; }

 private:
  struct Pending {
    double time;
    std::uint64_t order;
    EventBody body;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
  };

  void start_if_idle();
  void run_phase(Phase phase);
  bool advance();
  void schedule(double time, EventBody body);
  void dispatch(const Pending& p);
  void execute(const Action& action);
  void record_device_event(const DeviceEvent& e);
  void on_phase_change(const PhaseChange& pc);
  void check();

  void do_move(const MoveAction& m);
  void do_capture(const CaptureAction& c);
  void do_contact(const ContactAction& c);
  void do_command(const CommandAction& c);

  std::vector<ActionOutcome> outcomes_since(std::size_t mark) const;

  CellConfig config_;
  SimOptions options_;
  World world_;
  Bus bus_;
  FaultInjector injector_;
  Rng rng_;
  MotionParams motion_;
  CameraModel camera_;
  OrchestratorState state_;
  TraceLog trace_;

  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::uint64_t order_ = 0;
  std::map<int, Pose3> move_targets_;

  std::vector<ActionOutcome> outcomes_;
  std::vector<int> suction_timeouts_;
  std::vector<RunReport> reports_;
  std::vector<std::string> violations_;
  std::map<Phase, double> phase_started_;
  RunReport current_;
  bool cycle_open_ = false;
  double cycle_started_ = 0.0;
  std::optional<std::string> pending_abort_;
};

struct CampaignOptions {
  int tests = 10;
  int cycles_per_test = 1;
  int workers = 1;
};

struct TestResult {
  int test = 1;
  std::vector<RunReport> rows;
  std::vector<TraceRecord> trace;
  bool aborted = false;
  std::vector<ScriptEntry> unused_script_entries;
};

struct CampaignResult {
  CampaignReport report;
  std::vector<TestResult> tests;  // in test order
};

/// Runs independent tests (fresh world per test) and aggregates their rows.
/// Script entries are split per test. Results do not depend on `workers`.
CampaignResult run_full_campaign(const CellConfig& config, const FaultScript& script,
                                 const CampaignOptions& options);

}  // namespace bagcell
