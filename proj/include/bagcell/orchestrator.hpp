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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bagcell/bus.hpp"
#include "bagcell/config.hpp"
#include "bagcell/devices.hpp"
#include "bagcell/faults.hpp"
#include "bagcell/geometry.hpp"
#include "bagcell/vision.hpp"
#include "bagcell/world.hpp"

namespace bagcell {

enum class Phase { Idle, Feeding, Cutting, Removal, Delivery, Resetting, Done, Aborted };

enum class SubState {
  None,
  // Feeding
  HomePose,
  DetectTarget,
  Approaching,
  Gripping,
  Reset,
  Abandon,
  Transfer,
  Dropping,
  VerifyPlacement,
  Release,
  Discard,
  // Cutting
  AwaitSecure,
  Tension,
  Traverse,
  CutRecovery,
  // Removal
  RemovalApproach,
  RemovalGrip,
  RemovalLift,
  RemovalToBin,
  RemovalRelease,
  // Delivery
  DoorOpening,
  Pushing,
  Retracting,
  DoorClosing,
  // Resetting
  Settling,
};

std::string_view to_string(Phase p);
std::string_view to_string(SubState s);

/// Only the forward chain and the jump to Aborted are legal.
bool phase_transition_allowed(Phase from, Phase to);

enum class ActionType { Detect, Pick, Place, Cut, Remove, Deliver };

std::string_view to_string(ActionType a);

struct ActionOutcome {
  ActionType action = ActionType::Detect;
  int stack = -1;
  int enclosure = -1;
  bool success = false;
  int retries = 0;  // failed attempts before the final outcome
  double wall_time_s = 0.0;
};

struct RetryCounters {
  int detect = 0;
  int pick = 0;
  int place = 0;
  int remove = 0;
  int cut = 0;
  int home = 0;

  bool operator==(const RetryCounters&) const = default;
};

/// Counts for one feeding cycle.
struct CycleTally {
  int slots = 0;
  int detected = 0;
  int detected_first_attempt = 0;
  int picked = 0;
  int placed = 0;

  bool operator==(const CycleTally&) const = default;
};

struct OrchestratorState {
  Phase phase = Phase::Idle;
  SubState sub = SubState::None;
  int test = 1;
  int cycle_index = 0;  // 0-based
  int cycles_planned = 3;
  int current_enclosure = 0;
  RetryCounters retries;
  CycleTally tally;

  int next_token = 1;
  int wait_token = 0;    // motion, frame, timer or reading the sub-state waits for
  int window_token = 0;  // placement or suction window

  Pose3 robot_pose;
  std::vector<Pose3> pending_move;  // re-issued after a recoverable plan failure

  int target_stack = -1;
  Pose3 target_pose;
  double action_started = 0.0;

  bool swing_engaged = false;
  bool tote_exhausted = false;
  bool hold_elapsed = false;
  bool cobot_secure = false;
  std::array<bool, kEnclosureCount> bottom_secure{};
  std::array<std::optional<int>, kEnclosureCount> occupants{};
  std::array<bool, kEnclosureCount> in_cut_set{};
  std::array<bool, kEnclosureCount> pusher_stalled{};
  int pending_actuators = 0;

  bool operator==(const OrchestratorState&) const = default;
};

// Events fed to the machine.
struct StartEvent {};
struct AbortEvent {
  std::string reason;
};
struct MotionDone {
  int token = 0;
};
struct PlanFailed {
  int token = 0;
  int attempts = 0;
};
struct FrameReady {
  int token = 0;
  Frame frame;
};
struct TimerFired {
  int token = 0;
};
struct UltrasonicRead {
  int token = 0;
  int enclosure = 0;
  SensorReading reading;
};

using EventBody = std::variant<StartEvent, AbortEvent, MotionDone, PlanFailed, FrameReady,
                               TimerFired, UltrasonicRead, DeviceEvent>;

struct Event {
  double time = 0.0;
  EventBody body;
};

std::string describe(const EventBody& body);

// Actions emitted by the machine and carried out by the executor.
struct PublishAction {
  std::string topic;
  Payload payload;
};
struct CommandAction {
  Command command;
};
/// Robot motion through `waypoints` (the first one is the current pose).
/// Planned moves go through the linear planner; timed moves take a fixed
/// duration.
struct MoveAction {
  int token = 0;
  std::vector<Pose3> waypoints;
  double delay_s = 0.0;
  std::optional<double> timed_s;
  FaultContext plan_ctx;
};
struct CaptureAction {
  int token = 0;
  double delay_s = 0.0;
  FaultContext ctx;
};
struct TimerAction {
  int token = 0;
  double duration_s = 0.0;
};
struct ReadUltrasonicAction {
  int token = 0;
  int enclosure = 0;
};
/// A physical attempt (grip, placement, seal, actuator run) whose outcome
/// the fault injector decides.
struct ContactAction {
  FaultContext ctx;
};
struct StackAction {
  int stack = 0;
  StackState to = StackState::InTote;
  int enclosure = -1;
};
struct PackagingAction {
  int stack = 0;
  Packaging packaging = Packaging::Intact;
};
struct OutcomeAction {
  ActionOutcome outcome;
};
struct NoteAction {
  std::string text;
  int enclosure = -1;
  int stack = -1;
};
struct PhaseChange {
  Phase from = Phase::Idle;
  Phase to = Phase::Idle;
};

using Action = std::variant<PublishAction, CommandAction, MoveAction, CaptureAction, TimerAction,
                            ReadUltrasonicAction, ContactAction, StackAction, PackagingAction,
                            OutcomeAction, NoteAction, PhaseChange>;

struct Transition {
  OrchestratorState state;
  std::vector<Action> actions;
};

/// Initial machine state for a run of `cycles` feeding cycles.
OrchestratorState initial_state(const CellConfig& config, int test, int cycles);

/// The cell's control logic as a pure function. Events that mean nothing in
/// the current state leave it unchanged and produce a single NoteAction.
Transition transition(const CellConfig& config, const OrchestratorState& state,
                      const Event& event);

// Poses used by the feeding and removal paths.
Pose3 drop_pose(const CellConfig& config, int enclosure);
Pose3 insert_pose(const CellConfig& config, int enclosure);

}  // namespace bagcell
