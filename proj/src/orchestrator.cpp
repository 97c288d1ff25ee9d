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

#include "bagcell/orchestrator.hpp"

#include <algorithm>
#include <limits>

#include "bagcell/errors.hpp"

namespace bagcell {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "Idle";
    case Phase::Feeding: return "Feeding";
    case Phase::Cutting: return "Cutting";
    case Phase::Removal: return "Removal";
    case Phase::Delivery: return "Delivery";
    case Phase::Resetting: return "Resetting";
    case Phase::Done: return "Done";
    case Phase::Aborted: return "Aborted";
  }
  return "Unknown";
}

std::string_view to_string(SubState s) {
  switch (s) {
    case SubState::None: return "None";
    case SubState::HomePose: return "HomePose";
    case SubState::DetectTarget: return "DetectTarget";
    case SubState::Approaching: return "Approaching";
    case SubState::Gripping: return "Gripping";
    case SubState::Reset: return "Reset";
    case SubState::Abandon: return "Abandon";
    case SubState::Transfer: return "Transfer";
    case SubState::Dropping: return "Dropping";
    case SubState::VerifyPlacement: return "VerifyPlacement";
    case SubState::Release: return "Release";
    case SubState::Discard: return "Discard";
    case SubState::AwaitSecure: return "AwaitSecure";
    case SubState::Tension: return "Tension";
    case SubState::Traverse: return "Traverse";
    case SubState::CutRecovery: return "CutRecovery";
    case SubState::RemovalApproach: return "RemovalApproach";
    case SubState::RemovalGrip: return "RemovalGrip";
    case SubState::RemovalLift: return "RemovalLift";
    case SubState::RemovalToBin: return "RemovalToBin";
    case SubState::RemovalRelease: return "RemovalRelease";
    case SubState::DoorOpening: return "DoorOpening";
    case SubState::Pushing: return "Pushing";
    case SubState::Retracting: return "Retracting";
    case SubState::DoorClosing: return "DoorClosing";
    case SubState::Settling: return "Settling";
  }
  return "Unknown";
}

std::string_view to_string(ActionType a) {
  switch (a) {
    case ActionType::Detect: return "detect";
    case ActionType::Pick: return "pick";
    case ActionType::Place: return "place";
    case ActionType::Cut: return "cut";
    case ActionType::Remove: return "remove";
    case ActionType::Deliver: return "deliver";
  }
  return "unknown";
}

bool phase_transition_allowed(Phase from, Phase to) {
  if (to == Phase::Aborted) return from != Phase::Done && from != Phase::Aborted;
  switch (from) {
    case Phase::Idle: return to == Phase::Feeding;
    case Phase::Feeding: return to == Phase::Cutting;
    case Phase::Cutting: return to == Phase::Removal;
    case Phase::Removal: return to == Phase::Delivery;
    case Phase::Delivery: return to == Phase::Resetting;
    case Phase::Resetting: return to == Phase::Feeding || to == Phase::Done;
    case Phase::Done:
    case Phase::Aborted: return false;
  }
  return false;
}

std::string describe(const EventBody& body) {
  struct Visitor {
    std::string operator()(const StartEvent&) const { return "start"; }
    std::string operator()(const AbortEvent& e) const { return "abort: " + e.reason; }
    std::string operator()(const MotionDone& e) const {
      return "motion_done #" + std::to_string(e.token);
    }
    std::string operator()(const PlanFailed& e) const {
      return "plan_failed #" + std::to_string(e.token);
    }
    std::string operator()(const FrameReady& e) const {
      return "frame #" + std::to_string(e.token);
    }
    std::string operator()(const TimerFired& e) const {
      return "timer #" + std::to_string(e.token);
    }
    std::string operator()(const UltrasonicRead& e) const {
      return "ultrasonic" + std::to_string(e.enclosure) + " #" + std::to_string(e.token);
    }
    std::string operator()(const DeviceEvent& e) const {
      return std::string(to_string(e.kind)) + " " + e.device.name();
    }
  };
  return std::visit(Visitor{}, body);
}

Pose3 drop_pose(const CellConfig& config, int enclosure) {
  Pose3 p = config.layout.enclosure_origin;
  p.x += enclosure * config.layout.enclosure_pitch_m;
  return p;
}

Pose3 insert_pose(const CellConfig& config, int enclosure) {
  return offset_z(drop_pose(config, enclosure), -config.layout.insert_depth_m);
}

OrchestratorState initial_state(const CellConfig& config, int test, int cycles) {
  OrchestratorState st;
  st.test = test;
  st.cycles_planned = cycles;
  st.robot_pose = config.layout.home_pose;
  return st;
}

namespace {

// Builds one transition. Helpers mutate the copied state and append actions.
class Machine {
 public:
  Machine(const CellConfig& cfg, const OrchestratorState& st, double now)
      : cfg_(cfg), st_(st), now_(now) {}

  Transition finish() { return {std::move(st_), std::move(actions_)}; }

  void handle(const EventBody& body) {
    if (std::holds_alternative<AbortEvent>(body)) {
      abort(std::get<AbortEvent>(body).reason);
      return;
    }
    if (const auto* d = std::get_if<DeviceEvent>(&body)) track_device(*d);

    bool handled = false;
    switch (st_.phase) {
      case Phase::Idle: handled = on_idle(body); break;
      case Phase::Feeding: handled = on_feeding(body); break;
      case Phase::Cutting: handled = on_cutting(body); break;
      case Phase::Removal: handled = on_removal(body); break;
      case Phase::Delivery: handled = on_delivery(body); break;
      case Phase::Resetting: handled = on_resetting(body); break;
      case Phase::Done:
      case Phase::Aborted: break;
    }
    if (!handled) {
      note("ignored " + describe(body) + " in " + std::string(to_string(st_.phase)) + "/" +
           std::string(to_string(st_.sub)));
    }
  }

 private:
  // ---- plumbing ----------------------------------------------------------

  int token() { return st_.next_token++; }

  void emit(Action a) { actions_.push_back(std::move(a)); }
  void note(std::string text, int enclosure = -1, int stack = -1) {
    emit(NoteAction{std::move(text), enclosure, stack});
  }
  void publish(const char* topic, std::string status, int stack = -1, int enclosure = -1) {
    emit(PublishAction{topic, StatusPayload{std::move(status), stack, enclosure}});
  }
  void command(DeviceId id, CommandOp op, double target = 0.0) {
    emit(CommandAction{{id, op, target}});
  }
  void suction_cmd(bool on) {
    emit(PublishAction{topics::kSuctionCmd, CommandPayload{on ? "on" : "off", "cobot_suction"}});
    command(DeviceId::cobot(), on ? CommandOp::OpenSolenoid : CommandOp::CloseSolenoid);
  }

  void set_phase(Phase to, SubState sub) {
    if (to != st_.phase) {
      if (!phase_transition_allowed(st_.phase, to)) {
        throw LifecycleViolation("phase " + std::string(to_string(st_.phase)) + " -> " +
                                 std::string(to_string(to)) + " not allowed");
      }
      emit(PhaseChange{st_.phase, to});
      st_.phase = to;
    }
    st_.sub = sub;
  }

  FaultContext ctx(FaultClass cls, int attempt, int slot, int stack) const {
    FaultContext c;
    c.cls = cls;
    c.test = st_.test;
    c.cycle = st_.cycle_index + 1;
    c.slot = slot;
    c.stack = stack;
    c.attempt = attempt;
    return c;
  }

  void move(SubState sub, std::vector<Pose3> via, double delay = 0.0) {
    std::vector<Pose3> pts{st_.robot_pose};
    pts.insert(pts.end(), via.begin(), via.end());
    MoveAction m;
    m.token = token();
    m.waypoints = pts;
    m.delay_s = delay;
    m.plan_ctx = ctx(FaultClass::Plan, 1, st_.current_enclosure, st_.target_stack);
    st_.wait_token = m.token;
    st_.pending_move = std::move(via);
    st_.sub = sub;
    emit(std::move(m));
  }

  void timed_move(SubState sub, const Pose3& to, double duration) {
    MoveAction m;
    m.token = token();
    m.waypoints = {st_.robot_pose, to};
    m.timed_s = duration;
    st_.wait_token = m.token;
    st_.pending_move = {to};
    st_.sub = sub;
    emit(std::move(m));
  }

  void timer(SubState sub, double duration) {
    const int t = token();
    st_.wait_token = t;
    st_.sub = sub;
    emit(TimerAction{t, duration});
  }

  void window(double duration) {
    st_.window_token = token();
    emit(TimerAction{st_.window_token, duration});
  }

  void outcome(ActionType type, int stack, int enclosure, bool ok, int retries) {
    emit(OutcomeAction{{type, stack, enclosure, ok, retries, now_ - st_.action_started}});
  }

  void stack_to(int id, StackState to, int enclosure = -1) {
    emit(StackAction{id, to, enclosure});
  }

  void track_device(const DeviceEvent& d) {
    const bool secured = d.kind == DeviceEventKind::SuctionSecured;
    const bool lost = d.kind == DeviceEventKind::SuctionLost;
    if (!secured && !lost) return;
    if (d.device.kind == DeviceKind::CobotSuction) st_.cobot_secure = secured;
    if (d.device.kind == DeviceKind::BottomSuction) st_.bottom_secure[d.device.index] = secured;
  }

  void abort(const std::string& reason) {
    if (st_.phase == Phase::Done || st_.phase == Phase::Aborted) {
      note("abort ignored after " + std::string(to_string(st_.phase)));
      return;
    }
    note("abort: " + reason);
    command(DeviceId::cobot(), CommandOp::CloseSolenoid);
    set_phase(Phase::Aborted, SubState::None);
  }

  static bool is(const EventBody& b, int token) {
    if (const auto* m = std::get_if<MotionDone>(&b)) return m->token == token;
    return false;
  }
  static bool timer_is(const EventBody& b, int token) {
    if (const auto* t = std::get_if<TimerFired>(&b)) return t->token == token;
    return false;
  }
  static bool plan_failed(const EventBody& b, int token) {
    if (const auto* p = std::get_if<PlanFailed>(&b)) return p->token == token;
    return false;
  }
  static bool device_is(const EventBody& b, DeviceEventKind kind, DeviceId id) {
    if (const auto* d = std::get_if<DeviceEvent>(&b)) return d->kind == kind && d->device == id;
    return false;
  }

  Pose3 pending_end() const {
    return st_.pending_move.empty() ? st_.robot_pose : st_.pending_move.back();
  }

  // Waits for a motion. On arrival updates the pose and returns true.
  bool arrived(const EventBody& b) {
    if (!is(b, st_.wait_token)) return false;
    st_.robot_pose = pending_end();
    st_.retries.home = 0;
    return true;
  }

  // Plan failures outside picking and placing re-issue the same move until
  // the motion cap is spent, then abort.
  bool retry_motion(const EventBody& b) {
    if (!plan_failed(b, st_.wait_token)) return false;
    if (++st_.retries.home >= cfg_.retries.home) {
      abort("motion planning failed " + std::to_string(st_.retries.home) + " times");
      return true;
    }
    note("replanning after plan failure");
    move(st_.sub, st_.pending_move);
    return true;
  }

  // ---- idle and resetting -----------------------------------------------

  bool on_idle(const EventBody& b) {
    if (!std::holds_alternative<StartEvent>(b)) return false;
    publish(topics::kSystemReady, "ready");
    start_cycle();
    return true;
  }

  void start_cycle() {
    set_phase(Phase::Feeding, SubState::HomePose);
    st_.current_enclosure = 0;
    st_.tally = {};
    st_.retries = {};
    st_.occupants = {};
    st_.in_cut_set = {};
    st_.pusher_stalled = {};
    start_slot();
  }

  bool on_resetting(const EventBody& b) {
    if (!timer_is(b, st_.wait_token)) return false;
    if (st_.cycle_index + 1 < st_.cycles_planned && !st_.tote_exhausted) {
      ++st_.cycle_index;
      publish(topics::kSystemReady, "ready");
      start_cycle();
    } else {
      set_phase(Phase::Done, SubState::None);
      publish(topics::kSystemReady, "done");
    }
    return true;
  }

  // ---- feeding ------------------------------------------------------------

  void start_slot() {
    st_.target_stack = -1;
    st_.retries.detect = st_.retries.pick = st_.retries.place = 0;
    st_.action_started = now_;
    move(SubState::HomePose, {cfg_.layout.home_pose}, cfg_.timing.slot_overhead_s);
  }

  void capture() {
    CaptureAction c;
    c.token = token();
    c.delay_s = cfg_.timing.detect_service_s;
    c.ctx = ctx(FaultClass::Detect, st_.retries.detect + 1, st_.current_enclosure, -1);
    st_.wait_token = c.token;
    st_.sub = SubState::DetectTarget;
    emit(std::move(c));
  }

  void approach() {
    const Pose3 over = offset_z(st_.target_pose, cfg_.layout.approach_clearance_m);
    move(SubState::Approaching, {over, st_.target_pose});
  }

  void advance_slot() {
    ++st_.tally.slots;
    ++st_.current_enclosure;
    if (st_.current_enclosure >= kEnclosureCount || st_.tote_exhausted) {
      publish(topics::kFinishedCycle, "finished", -1, st_.current_enclosure);
      enter_cutting();
      return;
    }
    start_slot();
  }

  bool on_feeding(const EventBody& b) {
    switch (st_.sub) {
      case SubState::HomePose:
        if (arrived(b)) {
          publish(topics::kReadyForPicking, "ready", -1, st_.current_enclosure);
          capture();
          return true;
        }
        return retry_motion(b);

      case SubState::DetectTarget:
        if (const auto* f = std::get_if<FrameReady>(&b); f && f->token == st_.wait_token) {
          on_frame(f->frame);
          return true;
        }
        return false;

      case SubState::Approaching:
        if (arrived(b)) {
          emit(ContactAction{ctx(FaultClass::Pick, st_.retries.pick + 1, st_.current_enclosure,
                                 st_.target_stack)});
          timer(SubState::Gripping, cfg_.timing.grip_timeout_s);
          return true;
        }
        if (plan_failed(b, st_.wait_token)) {
          note("approach plan failed", st_.current_enclosure, st_.target_stack);
          pick_failed();
          return true;
        }
        return false;

      case SubState::Gripping:
        if (device_is(b, DeviceEventKind::SuctionSecured, DeviceId::cobot())) {
          stack_to(st_.target_stack, StackState::HeldByRobot);
          ++st_.tally.picked;
          outcome(ActionType::Pick, st_.target_stack, st_.current_enclosure, true,
                  st_.retries.pick);
          st_.action_started = now_;
          const Pose3 over = offset_z(st_.target_pose, cfg_.layout.approach_clearance_m);
          move(SubState::Transfer,
               {over, cfg_.layout.transfer_via, drop_pose(cfg_, st_.current_enclosure)},
               cfg_.timing.grip_dwell_s);
          return true;
        }
        if (timer_is(b, st_.wait_token)) {
          note("grip timeout", st_.current_enclosure, st_.target_stack);
          pick_failed();
          return true;
        }
        return false;

      case SubState::Reset:
        if (arrived(b)) {
          suction_cmd(true);
          approach();
          return true;
        }
        return retry_motion(b);

      case SubState::Abandon:
        if (arrived(b)) {
          advance_slot();
          return true;
        }
        return retry_motion(b);

      case SubState::Transfer:
        if (arrived(b)) {
          const int i = st_.current_enclosure;
          if (!st_.swing_engaged) {
            command(DeviceId::swing(), CommandOp::MoveTo,
                    cfg_.devices.swing_contact_position);
            st_.swing_engaged = true;
          }
          command(DeviceId::bottom(i), CommandOp::OpenSolenoid);
          publish(topics::kDrop, "drop", st_.target_stack, i);
          move(SubState::Dropping, {insert_pose(cfg_, i)});
          return true;
        }
        if (plan_failed(b, st_.wait_token)) {
          note("transfer plan failed", st_.current_enclosure, st_.target_stack);
          place_failed();
          return true;
        }
        return false;

      case SubState::Dropping:
        if (arrived(b)) {
          emit(ContactAction{ctx(FaultClass::Place, st_.retries.place + 1, st_.current_enclosure,
                                 st_.target_stack)});
          st_.sub = SubState::VerifyPlacement;
          st_.wait_token = 0;
          window(cfg_.timing.placement_window_s);
          if (st_.bottom_secure[st_.current_enclosure]) read_ultrasonic();
          return true;
        }
        if (plan_failed(b, st_.wait_token)) {
          note("insert plan failed", st_.current_enclosure, st_.target_stack);
          place_failed();
          return true;
        }
        return false;

      case SubState::VerifyPlacement: {
        const int i = st_.current_enclosure;
        if (device_is(b, DeviceEventKind::SuctionSecured, DeviceId::bottom(i))) {
          read_ultrasonic();
          return true;
        }
        if (const auto* u = std::get_if<UltrasonicRead>(&b); u && u->token == st_.wait_token) {
          if (u->reading.present) {
            placement_verified();
          } else {
            note("ultrasonic reports no stack", i, st_.target_stack);
            place_failed();
          }
          return true;
        }
        if (timer_is(b, st_.window_token)) {
          note("bottom suction not secured within the placement window", i, st_.target_stack);
          place_failed();
          return true;
        }
        return false;
      }

      case SubState::Release:
        if (arrived(b)) {
          advance_slot();
          return true;
        }
        return retry_motion(b);

      case SubState::Discard:
        if (arrived(b)) {
          suction_cmd(false);
          stack_to(st_.target_stack, StackState::FailedUnhandled);
          advance_slot();
          return true;
        }
        return retry_motion(b);

      default:
        return false;
    }
  }

  void on_frame(const Frame& frame) {
    if (frame.ground_truth.empty()) {
      note("tote empty", st_.current_enclosure);
      st_.tote_exhausted = true;
      --st_.tally.slots;  // no stack was available for this slot
      advance_slot();
      return;
    }

    std::optional<int> stack;
    Pose3 pose;
    try {
      const BoundingBox& target = select_pick_target(frame.detections);
      double best = 0.0;
      for (const auto& gt : frame.ground_truth) {
        const double v = iou(target, gt.box);
        if (v >= 0.5 && v > best) {
          best = v;
          stack = gt.stack_id;
        }
      }
      const int zone = frame.zone_in_view;
      const double depth =
          estimate_zone_depth(frame, zone, cfg_.layout.stack_depth_offset_m[zone - 1]);
      pose = pixel_to_robot(target.center_x(), target.center_y(), depth,
                            CameraModel::from_config(cfg_.camera));
    } catch (const NoDetections&) {
      stack.reset();
    } catch (const QRNotVisible&) {
      stack.reset();
    }

    if (stack) {
      if (st_.retries.detect == 0) ++st_.tally.detected_first_attempt;
      ++st_.tally.detected;
      outcome(ActionType::Detect, *stack, st_.current_enclosure, true, st_.retries.detect);
      st_.action_started = now_;
      st_.target_stack = *stack;
      st_.target_pose = pose;
      suction_cmd(true);
      approach();
      return;
    }

    ++st_.retries.detect;
    note("no usable detection", st_.current_enclosure);
    if (st_.retries.detect < cfg_.retries.detect) {
      capture();
      return;
    }
    // Give up on the leftmost stack still in view.
    const GroundTruthBox* leftmost = &frame.ground_truth.front();
    for (const auto& gt : frame.ground_truth) {
      if (gt.box.center_x() < leftmost->box.center_x()) leftmost = &gt;
    }
    outcome(ActionType::Detect, leftmost->stack_id, st_.current_enclosure, false,
            st_.retries.detect);
    stack_to(leftmost->stack_id, StackState::FailedUnhandled);
    advance_slot();
  }

  void pick_failed() {
    suction_cmd(false);
    ++st_.retries.pick;
    if (st_.retries.pick < cfg_.retries.pick) {
      const Pose3 over = offset_z(st_.target_pose, cfg_.layout.approach_clearance_m);
      move(SubState::Reset, {over, cfg_.layout.home_pose});
      return;
    }
    outcome(ActionType::Pick, st_.target_stack, st_.current_enclosure, false, st_.retries.pick);
    stack_to(st_.target_stack, StackState::FailedUnhandled);
    const Pose3 over = offset_z(st_.target_pose, cfg_.layout.approach_clearance_m);
    move(SubState::Abandon, {over, cfg_.layout.home_pose});
  }

  void read_ultrasonic() {
    const int t = token();
    st_.wait_token = t;
    emit(ReadUltrasonicAction{t, st_.current_enclosure});
  }

  void placement_verified() {
    const int i = st_.current_enclosure;
    st_.window_token = 0;
    suction_cmd(false);
    stack_to(st_.target_stack, StackState::InEnclosure, i);
    st_.occupants[i] = st_.target_stack;
    ++st_.tally.placed;
    publish(topics::kPlacementFeedback, "placed", st_.target_stack, i);
    outcome(ActionType::Place, st_.target_stack, i, true, st_.retries.place);
    move(SubState::Release, {drop_pose(cfg_, i)}, cfg_.timing.release_dwell_s);
  }

  void place_failed() {
    const int i = st_.current_enclosure;
    st_.window_token = 0;
    ++st_.retries.place;
    publish(topics::kPlacementFeedback, "failed", st_.target_stack, i);
    if (st_.retries.place < cfg_.retries.place) {
      move(SubState::Transfer, {drop_pose(cfg_, i)});
      return;
    }
    outcome(ActionType::Place, st_.target_stack, i, false, st_.retries.place);
    move(SubState::Discard, {drop_pose(cfg_, i), cfg_.layout.bin_pose});
  }

  // ---- cutting ------------------------------------------------------------

  bool cut_set_empty() const {
    return std::none_of(st_.in_cut_set.begin(), st_.in_cut_set.end(), [](bool b) { return b; });
  }

  bool cut_set_secured() const {
    for (int i = 0; i < kEnclosureCount; ++i) {
      if (st_.in_cut_set[i] && !st_.bottom_secure[i]) return false;
    }
    return true;
  }

  void enter_cutting() {
    set_phase(Phase::Cutting, SubState::AwaitSecure);
    st_.retries.cut = 0;
    for (int i = 0; i < kEnclosureCount; ++i) st_.in_cut_set[i] = st_.occupants[i].has_value();
    st_.action_started = now_;
    if (cut_set_empty()) {
      note("nothing to cut");
      enter_removal();
      return;
    }
    begin_securing();
  }

  void begin_securing() {
    for (int i = 0; i < kEnclosureCount; ++i) {
      if (!st_.in_cut_set[i]) continue;
      command(DeviceId::bottom(i), CommandOp::OpenSolenoid);
      emit(ContactAction{
          ctx(FaultClass::BottomSuction, st_.retries.cut + 1, i, *st_.occupants[i])});
    }
    if (!st_.swing_engaged) {
      command(DeviceId::swing(), CommandOp::MoveTo, cfg_.devices.swing_contact_position);
      st_.swing_engaged = true;
    }
    st_.hold_elapsed = false;
    timer(SubState::AwaitSecure, cfg_.timing.secure_hold_s);
    window(cfg_.timing.suction_window_s);
  }

  void start_tension() {
    st_.window_token = 0;
    command(DeviceId::swing(), CommandOp::MoveTo, 1.0);
    st_.sub = SubState::Tension;
    st_.wait_token = 0;
  }

  int first_unsecured() const {
    for (int i = 0; i < kEnclosureCount; ++i) {
      if (st_.in_cut_set[i] && !st_.bottom_secure[i]) return i;
    }
    return -1;
  }

  void suction_timeout() {
    const int i = first_unsecured();
    st_.window_token = 0;
    note("suction_timeout", i, i >= 0 && st_.occupants[i] ? *st_.occupants[i] : -1);
    for (int j = 0; j < kEnclosureCount; ++j) {
      if (st_.in_cut_set[j]) command(DeviceId::bottom(j), CommandOp::CloseSolenoid);
    }
    if (st_.sub == SubState::Tension) {
      command(DeviceId::swing(), CommandOp::MoveTo, cfg_.devices.swing_contact_position);
    }
    ++st_.retries.cut;
    if (st_.retries.cut >= cfg_.retries.cut && i >= 0) {
      const int id = *st_.occupants[i];
      outcome(ActionType::Cut, id, i, false, st_.retries.cut);
      stack_to(id, StackState::FailedUnhandled);
      st_.occupants[i].reset();
      st_.in_cut_set[i] = false;
      st_.retries.cut = 0;
    }
    timer(SubState::CutRecovery, cfg_.devices.pressure_ramp_s);
  }

  bool on_cutting(const EventBody& b) {
    switch (st_.sub) {
      case SubState::AwaitSecure:
        if (timer_is(b, st_.wait_token)) {
          st_.hold_elapsed = true;
          if (cut_set_secured()) start_tension();
          return true;
        }
        if (const auto* d = std::get_if<DeviceEvent>(&b);
            d && d->device.kind == DeviceKind::BottomSuction) {
          if (st_.hold_elapsed && cut_set_secured()) start_tension();
          return true;
        }
        if (timer_is(b, st_.window_token)) {
          suction_timeout();
          return true;
        }
        return false;

      case SubState::Tension:
        if (device_is(b, DeviceEventKind::ActuatorDone, DeviceId::swing())) {
          if (!cut_set_secured()) {
            suction_timeout();
            return true;
          }
          for (int i = 0; i < kEnclosureCount; ++i) {
            if (st_.in_cut_set[i]) emit(PackagingAction{*st_.occupants[i], Packaging::Tensioned});
          }
          command(DeviceId::cutter(), CommandOp::MoveTo, 1.0);
          st_.sub = SubState::Traverse;
          return true;
        }
        return false;

      case SubState::Traverse:
        if (device_is(b, DeviceEventKind::ActuatorDone, DeviceId::cutter())) {
          for (int i = 0; i < kEnclosureCount; ++i) {
            if (!st_.in_cut_set[i]) continue;
            const int id = *st_.occupants[i];
            emit(PackagingAction{id, Packaging::Cut});
            stack_to(id, StackState::CutInEnclosure, i);
            outcome(ActionType::Cut, id, i, true, st_.retries.cut);
            command(DeviceId::bottom(i), CommandOp::CloseSolenoid);
          }
          command(DeviceId::cutter(), CommandOp::MoveTo, 0.0);
          publish(topics::kCutComplete, "cut");
          enter_removal();
          return true;
        }
        if (const auto* d = std::get_if<DeviceEvent>(&b);
            d && d->kind == DeviceEventKind::SuctionLost) {
          note("suction lost during traverse", d->device.index);
          return true;
        }
        return false;

      case SubState::CutRecovery:
        if (timer_is(b, st_.wait_token)) {
          if (cut_set_empty()) {
            note("nothing left to cut");
            enter_removal();
          } else {
            begin_securing();
          }
          return true;
        }
        return std::holds_alternative<DeviceEvent>(b);

      default:
        return false;
    }
  }

  // ---- removal ------------------------------------------------------------

  void enter_removal() {
    set_phase(Phase::Removal, SubState::RemovalApproach);
    publish(topics::kStartRemoval, "start");
    // Valves of slots that never got a stack were opened at their drop.
    for (int i = 0; i < kEnclosureCount; ++i) {
      if (!st_.in_cut_set[i]) command(DeviceId::bottom(i), CommandOp::CloseSolenoid);
    }
    if (st_.swing_engaged) {
      command(DeviceId::swing(), CommandOp::MoveTo, 0.0);
      st_.swing_engaged = false;
    }
    st_.current_enclosure = -1;
    next_removal();
  }

  void next_removal() {
    st_.retries.remove = 0;
    int i = st_.current_enclosure + 1;
    while (i < kEnclosureCount && !st_.occupants[i]) ++i;
    st_.current_enclosure = i;
    if (i >= kEnclosureCount) {
      enter_delivery();
      return;
    }
    st_.target_stack = *st_.occupants[i];
    st_.action_started = now_;
    timed_move(SubState::RemovalApproach, drop_pose(cfg_, i), cfg_.timing.removal_approach_s);
  }

  void removal_grip() {
    suction_cmd(true);
    emit(ContactAction{ctx(FaultClass::Remove, st_.retries.remove + 1, st_.current_enclosure,
                           st_.target_stack)});
    timer(SubState::RemovalGrip, cfg_.timing.grip_timeout_s);
  }

  bool on_removal(const EventBody& b) {
    const int i = st_.current_enclosure;
    switch (st_.sub) {
      case SubState::RemovalApproach:
        if (arrived(b)) {
          publish(topics::kReadyForRemoval, "ready", st_.target_stack, i);
          removal_grip();
          return true;
        }
        return false;

      case SubState::RemovalGrip:
        if (device_is(b, DeviceEventKind::SuctionSecured, DeviceId::cobot())) {
          timed_move(SubState::RemovalLift,
                     offset_z(drop_pose(cfg_, i), cfg_.layout.approach_clearance_m),
                     cfg_.timing.removal_lift_s);
          return true;
        }
        if (timer_is(b, st_.wait_token)) {
          suction_cmd(false);
          ++st_.retries.remove;
          note("removal grip timeout", i, st_.target_stack);
          if (st_.retries.remove < cfg_.retries.remove) {
            removal_grip();
          } else {
            outcome(ActionType::Remove, st_.target_stack, i, false, st_.retries.remove);
            stack_to(st_.target_stack, StackState::FailedUnhandled);
            st_.occupants[i].reset();
            next_removal();
          }
          return true;
        }
        return false;

      case SubState::RemovalLift:
        if (arrived(b)) {
          emit(PackagingAction{st_.target_stack, Packaging::Removed});
          stack_to(st_.target_stack, StackState::Unpacked, i);
          timed_move(SubState::RemovalToBin, cfg_.layout.bin_pose, cfg_.timing.removal_to_bin_s);
          return true;
        }
        return false;

      case SubState::RemovalToBin:
        if (arrived(b)) {
          publish(topics::kRemovingBag, "removing", st_.target_stack, i);
          suction_cmd(false);
          timer(SubState::RemovalRelease, cfg_.timing.removal_release_s);
          return true;
        }
        return false;

      case SubState::RemovalRelease:
        if (timer_is(b, st_.wait_token)) {
          outcome(ActionType::Remove, st_.target_stack, i, true, st_.retries.remove);
          next_removal();
          return true;
        }
        return false;

      default:
        return false;
    }
  }

  // ---- delivery -----------------------------------------------------------

  void enter_delivery() {
    set_phase(Phase::Delivery, SubState::DoorOpening);
    st_.current_enclosure = 0;
    st_.target_stack = -1;
    st_.action_started = now_;
    const bool any = std::any_of(st_.occupants.begin(), st_.occupants.end(),
                                 [](const auto& o) { return o.has_value(); });
    if (!any) {
      note("nothing to deliver");
      enter_resetting();
      return;
    }
    emit(ContactAction{ctx(FaultClass::DoorStall, 1, 0, -1)});
    command(DeviceId::door(), CommandOp::MoveTo, 1.0);
  }

  void retract_all() {
    st_.pending_actuators = kEnclosureCount;
    for (int i = 0; i < kEnclosureCount; ++i) command(DeviceId::pusher(i), CommandOp::MoveTo, 0.0);
    st_.sub = SubState::Retracting;
  }

  bool on_delivery(const EventBody& b) {
    const auto* d = std::get_if<DeviceEvent>(&b);
    switch (st_.sub) {
      case SubState::DoorOpening:
        if (device_is(b, DeviceEventKind::ActuatorDone, DeviceId::door())) {
          st_.pusher_stalled = {};
          st_.pending_actuators = kEnclosureCount;
          for (int i = 0; i < kEnclosureCount; ++i) {
            emit(ContactAction{ctx(FaultClass::PusherStall, 1, i,
                                   st_.occupants[i] ? *st_.occupants[i] : -1)});
            command(DeviceId::pusher(i), CommandOp::MoveTo, 1.0);
          }
          st_.sub = SubState::Pushing;
          return true;
        }
        if (device_is(b, DeviceEventKind::ActuatorStalled, DeviceId::door())) {
          note("door stalled");
          for (int i = 0; i < kEnclosureCount; ++i) {
            if (!st_.occupants[i]) continue;
            outcome(ActionType::Deliver, *st_.occupants[i], i, false, 0);
            stack_to(*st_.occupants[i], StackState::FailedUnhandled);
            st_.occupants[i].reset();
          }
          command(DeviceId::door(), CommandOp::MoveTo, 0.0);
          st_.sub = SubState::DoorClosing;
          return true;
        }
        return false;

      case SubState::Pushing:
        if (d && d->device.kind == DeviceKind::Pusher &&
            (d->kind == DeviceEventKind::ActuatorDone ||
             d->kind == DeviceEventKind::ActuatorStalled)) {
          if (d->kind == DeviceEventKind::ActuatorStalled) {
            st_.pusher_stalled[d->device.index] = true;
            note("pusher stalled", d->device.index);
          }
          if (--st_.pending_actuators == 0) {
            for (int i = 0; i < kEnclosureCount; ++i) {
              if (!st_.occupants[i]) continue;
              const int id = *st_.occupants[i];
              const bool ok = !st_.pusher_stalled[i];
              outcome(ActionType::Deliver, id, i, ok, 0);
              stack_to(id, ok ? StackState::Delivered : StackState::FailedUnhandled);
              st_.occupants[i].reset();
            }
            publish(topics::kDelivery, "delivered");
            retract_all();
          }
          return true;
        }
        return false;

      case SubState::Retracting:
        if (d && d->device.kind == DeviceKind::Pusher && d->kind == DeviceEventKind::ActuatorDone) {
          if (--st_.pending_actuators == 0) {
            command(DeviceId::door(), CommandOp::MoveTo, 0.0);
            st_.sub = SubState::DoorClosing;
          }
          return true;
        }
        return false;

      case SubState::DoorClosing:
        if (device_is(b, DeviceEventKind::ActuatorDone, DeviceId::door())) {
          publish(topics::kDelivery, "reset");
          enter_resetting();
          return true;
        }
        return false;

      default:
        return false;
    }
  }

  void enter_resetting() {
    set_phase(Phase::Resetting, SubState::Settling);
    st_.target_stack = -1;
    timer(SubState::Settling, 0.0);
  }

  const CellConfig& cfg_;
  OrchestratorState st_;
  double now_;
  std::vector<Action> actions_;
};

}  // namespace

Transition transition(const CellConfig& config, const OrchestratorState& state,
                      const Event& event) {
  Machine m(config, state, event.time);
  m.handle(event.body);
  return m.finish();
}

}  // namespace bagcell
