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

#include "bagcell/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "bagcell/errors.hpp"

namespace bagcell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json to_json(const Pose3& p) { return {p.x, p.y, p.z, p.yaw}; }

nlohmann::json to_json(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CommandPayload>) {
          return {{"command", p.command}, {"target", p.target}};
        } else if constexpr (std::is_same_v<T, SensorPayload>) {
          return {{"sensor", p.sensor}, {"value", p.value}};
        } else {
          return {{"status", p.status}, {"stack", p.stack}, {"enclosure", p.enclosure}};
        }
      },
      payload);
}

std::string_view to_string(CommandOp op) {
  switch (op) {
    case CommandOp::OpenSolenoid: return "open";
    case CommandOp::CloseSolenoid: return "close";
    case CommandOp::MoveTo: return "move_to";
  }
  return "unknown";
}

nlohmann::json to_json(const FaultContext& c) {
  return {{"class", to_string(c.cls)}, {"test", c.test},     {"cycle", c.cycle},
          {"slot", c.slot},            {"stack", c.stack},   {"attempt", c.attempt}};
}

const std::vector<std::string> kRobotTopics{topics::kReadyForPicking, topics::kSuctionCmd,
                                            topics::kDrop, topics::kReadyForRemoval,
                                            topics::kRemovingBag};

}  // namespace

Rng make_rng(std::uint64_t seed, int test) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(test)};
  return Rng(seq);
}

Simulation::Simulation(CellConfig config, FaultScript script, SimOptions options)
    : config_(std::move(config)),
      options_(options),
      world_(build_world(config_)),
      injector_(config_.faults, std::move(script)),
      rng_(make_rng(config_.seed, options.test)),
      motion_(MotionParams::from_config(config_.motion)),
      camera_(CameraModel::from_config(config_.camera)),
      state_(initial_state(config_, options.test, options.cycles)) {
  validate(config_);
  for (const auto& t : config_.extra_topics) bus_.register_topic(t);
  bus_.add_subscriber("robot");
  for (const auto& t : kRobotTopics) bus_.subscribe("robot", t);
  bus_.add_subscriber("controller");
  for (const auto& t : default_topics()) bus_.subscribe("controller", t);
  bus_.set_observer([this](const Message& m) {
    nlohmann::json p = to_json(m.payload);
    p["seq"] = m.seq;
    trace_.append(m.timestamp, TraceKind::Publish, m.topic, std::move(p));
  });
}

void Simulation::request_abort(std::string reason) { pending_abort_ = std::move(reason); }

void Simulation::schedule(double time, EventBody body) {
  queue_.push({time, order_++, std::move(body)});
}

void Simulation::start_if_idle() {
  if (state_.phase == Phase::Idle) dispatch({world_.clock, order_++, StartEvent{}});
}

bool Simulation::advance() {
  const double now = world_.clock;
  if (pending_abort_) {
    std::string reason = std::move(*pending_abort_);
    pending_abort_.reset();
    dispatch({now, order_++, AbortEvent{std::move(reason)}});
    return true;
  }
  if (cycle_open_ && now - cycle_started_ > config_.timing.max_cycle_time_s) {
    dispatch({now, order_++, AbortEvent{"cycle exceeded max_cycle_time_s"}});
    return true;
  }

  auto settled = world_.devices.settle(now);
  if (!settled.empty()) {
    for (const auto& e : settled) dispatch({now, order_++, e});
    return true;
  }
  // Contact changes only show up in the suction flags after settling.
  if (options_.check_invariants) check();

  const double tq = queue_.empty() ? kInf : queue_.top().time;
  if (tq <= now) {
    Pending p = queue_.top();
    queue_.pop();
    dispatch(p);
    return true;
  }
  const double td = world_.devices.next_event_time(now);
  const double t = std::min(tq, td);
  if (!std::isfinite(t)) return false;

  auto events = world_.devices.step(now, t - now);
  world_.clock = t;
  for (const auto& e : events) dispatch({t, order_++, e});
  return true;
}

void Simulation::record_device_event(const DeviceEvent& e) {
  nlohmann::json p{{"event", to_string(e.kind)}};
  if (e.device.kind == DeviceKind::CobotSuction || e.device.kind == DeviceKind::BottomSuction) {
    const SuctionState& s = e.device.kind == DeviceKind::CobotSuction
                                ? world_.devices.cobot()
                                : world_.devices.bottom(e.device.index);
    p["pressure_kpa"] = s.gauge_pressure_kpa;
  } else {
    p["position"] = world_.devices.actuator(e.device).position;
  }
  trace_.append(world_.clock, TraceKind::DeviceEvent, e.device.name(), std::move(p));

  if (e.kind == DeviceEventKind::SuctionSecured || e.kind == DeviceEventKind::SuctionLost) {
    const SensorReading r = world_.devices.read_sensor(e.device, rng_, injector_.profile());
    bus_.publish(topics::kPressure, SensorPayload{e.device.name(), r.value}, world_.clock);
  }
}

void Simulation::dispatch(const Pending& p) {
  if (const auto* d = std::get_if<DeviceEvent>(&p.body)) record_device_event(*d);
  if (const auto* m = std::get_if<MotionDone>(&p.body)) {
    auto it = move_targets_.find(m->token);
    if (it != move_targets_.end()) {
      world_.robot_pose = it->second;
      move_targets_.erase(it);
    }
  }
  if (const auto* f = std::get_if<PlanFailed>(&p.body)) move_targets_.erase(f->token);

  const Phase from_phase = state_.phase;
  const SubState from_sub = state_.sub;
  Transition tr = transition(config_, state_, Event{p.time, p.body});
  state_ = std::move(tr.state);
  if (state_.phase != from_phase || state_.sub != from_sub) {
    trace_.append(world_.clock, TraceKind::Transition, "orchestrator",
                  {{"event", describe(p.body)},
                   {"from", std::string(to_string(from_phase)) + "/" +
                                std::string(to_string(from_sub))},
                   {"to", std::string(to_string(state_.phase)) + "/" +
                              std::string(to_string(state_.sub))}});
  }
  for (const auto& a : tr.actions) execute(a);

  bus_.poll("robot");
  bus_.poll("controller");
}

void Simulation::check() {
  for (const auto& v : check_invariants(world_)) {
    violations_.push_back(v.entity + ": " + v.rule + " (" + v.detail + ")");
  }
}

void Simulation::do_command(const CommandAction& c) {
  const Command& cmd = c.command;
  const ScheduledCompletion done = world_.devices.apply_command(cmd, world_.clock);
  nlohmann::json p{{"op", to_string(cmd.op)}};
  if (cmd.op == CommandOp::MoveTo) p["target"] = cmd.target;
  trace_.append(world_.clock, TraceKind::Action, cmd.device.name(), std::move(p));

  if (cmd.device.kind == DeviceKind::CobotSuction && cmd.op == CommandOp::CloseSolenoid) {
    world_.devices.engage_cobot(std::nullopt, false);
  }
  // An actuator told to go where it already is reports done right away.
  if (cmd.op == CommandOp::MoveTo && done.time <= world_.clock &&
      !world_.devices.actuator(cmd.device).moving) {
    schedule(world_.clock, DeviceEvent{DeviceEventKind::ActuatorDone, cmd.device, world_.clock});
  }
}

void Simulation::do_move(const MoveAction& m) {
  const double start = world_.clock + m.delay_s;
  move_targets_[m.token] = m.waypoints.back();
  nlohmann::json p{{"token", m.token}, {"to", to_json(m.waypoints.back())}, {"delay_s", m.delay_s}};

  if (m.timed_s) {
    p["duration_s"] = *m.timed_s;
    trace_.append(world_.clock, TraceKind::Action, "robot", std::move(p));
    schedule(start + *m.timed_s, MotionDone{m.token});
    return;
  }

  FaultContext ctx = m.plan_ctx;
  auto oracle = [&](int attempt) {
    ctx.attempt = attempt;
    return injector_.resolve(ctx, rng_);
  };
  const PlanResult result = plan_with_retries(m.waypoints, motion_, oracle);
  if (const auto* ok = std::get_if<PlanSuccess>(&result)) {
    p["duration_s"] = ok->trajectory.total_duration;
    p["planning_s"] = ok->planning_time_s;
    p["attempts"] = ok->attempts;
    trace_.append(world_.clock, TraceKind::Action, "robot", std::move(p));
    schedule(start + ok->planning_time_s + ok->trajectory.total_duration, MotionDone{m.token});
  } else {
    const auto& fail = std::get<PlanFailure>(result);
    p["plan_failed"] = true;
    p["planning_s"] = fail.planning_time_s;
    p["attempts"] = fail.attempts;
    trace_.append(world_.clock, TraceKind::Action, "robot", std::move(p));
    schedule(start + fail.planning_time_s, PlanFailed{m.token, fail.attempts});
  }
}

void Simulation::do_capture(const CaptureAction& c) {
  Frame frame = observe(world_, camera_, injector_.profile(), rng_);
  frame.timestamp = world_.clock;
  FaultContext ctx = c.ctx;
  Outcome outcome = Outcome::Succeed;
  if (!frame.ground_truth.empty()) {
    const GroundTruthBox* leftmost = &frame.ground_truth.front();
    for (const auto& gt : frame.ground_truth) {
      if (gt.box.center_x() < leftmost->box.center_x()) leftmost = &gt;
    }
    ctx.stack = leftmost->stack_id;
    outcome = injector_.resolve(ctx, rng_);
    if (outcome == Outcome::Fail) frame.detections.clear();
  }
  trace_.append(world_.clock, TraceKind::Action, "camera",
                {{"token", c.token},
                 {"zone", frame.zone_in_view},
                 {"ground_truth", frame.ground_truth.size()},
                 {"detections", frame.detections.size()},
                 {"ctx", to_json(ctx)},
                 {"outcome", outcome == Outcome::Succeed ? "succeed" : "fail"}});
  schedule(world_.clock + c.delay_s, FrameReady{c.token, std::move(frame)});
}

void Simulation::do_contact(const ContactAction& c) {
  const FaultContext& ctx = c.ctx;
  const bool fail = injector_.resolve(ctx, rng_) == Outcome::Fail;
  trace_.append(world_.clock, TraceKind::Action, "contact",
                {{"ctx", to_json(ctx)}, {"outcome", fail ? "fail" : "succeed"}});
  DeviceBank& d = world_.devices;
  switch (ctx.cls) {
    case FaultClass::Pick:
    case FaultClass::Remove:
      d.engage_cobot(ctx.stack, fail);
      break;
    case FaultClass::Place:
      d.set_contents(ctx.slot, fail ? std::nullopt : std::optional<int>(ctx.stack));
      d.set_bottom_leak(ctx.slot, false);
      break;
    case FaultClass::BottomSuction:
      d.set_bottom_leak(ctx.slot, fail);
      break;
    case FaultClass::PusherStall:
      if (fail) d.inject_stall(DeviceId::pusher(ctx.slot), 0.5);
      break;
    case FaultClass::DoorStall:
      if (fail) d.inject_stall(DeviceId::door(), 0.5);
      break;
    case FaultClass::Detect:
    case FaultClass::Plan:
      break;
  }
}

void Simulation::on_phase_change(const PhaseChange& pc) {
  const double now = world_.clock;
  trace_.append(now, TraceKind::Transition, "phase",
                {{"from", to_string(pc.from)}, {"to", to_string(pc.to)}});

  if (auto it = phase_started_.find(pc.from); it != phase_started_.end() && cycle_open_) {
    const double dt = now - it->second;
    switch (pc.from) {
      case Phase::Feeding: current_.phases.feeding_s = dt; break;
      case Phase::Cutting: current_.phases.cutting_s = dt; break;
      case Phase::Removal: current_.phases.removal_s = dt; break;
      case Phase::Delivery: current_.phases.delivery_s = dt; break;
      default: break;
    }
  }
  phase_started_[pc.to] = now;

  if (pc.from == Phase::Feeding || (pc.to == Phase::Aborted && cycle_open_)) {
    const CycleTally& t = state_.tally;
    current_.detected = t.detected;
    current_.picked = t.picked;
    current_.placed = t.placed;
    current_.detected_first_attempt = t.detected_first_attempt;
    if (pc.from == Phase::Feeding) current_.total_time_s = now - cycle_started_;
  }

  const bool closes = pc.from == Phase::Resetting || pc.to == Phase::Aborted;
  if (closes && cycle_open_) {
    if (pc.to == Phase::Aborted) {
      current_.aborted = true;
      if (!current_.phases.feeding_s) current_.total_time_s = now - cycle_started_;
    }
    trace_.append(now, TraceKind::Metric, "cycle_report",
                  {{"test", current_.test},
                   {"cycle", current_.cycle},
                   {"detected", current_.detected},
                   {"picked", current_.picked},
                   {"placed", current_.placed},
                   {"total_time_s", current_.total_time_s},
                   {"aborted", current_.aborted}});
    reports_.push_back(current_);
    cycle_open_ = false;
  }

  if (pc.to == Phase::Feeding) {
    current_ = RunReport{};
    current_.test = state_.test;
    current_.cycle = state_.cycle_index + 1;
    cycle_started_ = now;
    cycle_open_ = true;
  }
}

void Simulation::execute(const Action& action) {
  const double now = world_.clock;
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PublishAction>) {
          bus_.publish(a.topic, a.payload, now);
        } else if constexpr (std::is_same_v<T, CommandAction>) {
          do_command(a);
        } else if constexpr (std::is_same_v<T, MoveAction>) {
          do_move(a);
        } else if constexpr (std::is_same_v<T, CaptureAction>) {
          do_capture(a);
        } else if constexpr (std::is_same_v<T, TimerAction>) {
          schedule(now + a.duration_s, TimerFired{a.token});
        } else if constexpr (std::is_same_v<T, ReadUltrasonicAction>) {
          const SensorReading r =
              world_.devices.read_sensor(DeviceId::ultrasonic(a.enclosure), rng_, injector_.profile());
          bus_.publish(topics::kUltrasonic,
                       SensorPayload{DeviceId::ultrasonic(a.enclosure).name(), r.value}, now);
          schedule(now, UltrasonicRead{a.token, a.enclosure, r});
        } else if constexpr (std::is_same_v<T, ContactAction>) {
          do_contact(a);
        } else if constexpr (std::is_same_v<T, StackAction>) {
          transition_stack(world_, a.stack, a.to, a.enclosure);
          trace_.append(now, TraceKind::Action, "stack" + std::to_string(a.stack),
                        {{"to", to_string(a.to)}, {"enclosure", a.enclosure}});
        } else if constexpr (std::is_same_v<T, PackagingAction>) {
          set_packaging(world_, a.stack, a.packaging);
          trace_.append(now, TraceKind::Action, "stack" + std::to_string(a.stack),
                        {{"packaging", to_string(a.packaging)}});
        } else if constexpr (std::is_same_v<T, OutcomeAction>) {
          const ActionOutcome& o = a.outcome;
          outcomes_.push_back(o);
          trace_.append(now, TraceKind::Metric, "outcome",
                        {{"action", to_string(o.action)},
                         {"stack", o.stack},
                         {"enclosure", o.enclosure},
                         {"success", o.success},
                         {"retries", o.retries},
                         {"wall_time_s", o.wall_time_s}});
        } else if constexpr (std::is_same_v<T, NoteAction>) {
          if (a.text == "suction_timeout") suction_timeouts_.push_back(a.enclosure);
          trace_.append(now, TraceKind::Action, "note",
                        {{"text", a.text}, {"enclosure", a.enclosure}, {"stack", a.stack}});
        } else if constexpr (std::is_same_v<T, PhaseChange>) {
          on_phase_change(a);
        }
      },
      action);
}

std::vector<ActionOutcome> Simulation::outcomes_since(std::size_t mark) const {
  return {outcomes_.begin() + static_cast<std::ptrdiff_t>(mark), outcomes_.end()};
}

void Simulation::run_phase(Phase phase) {
  start_if_idle();
  auto terminal = [&] { return state_.phase == Phase::Done || state_.phase == Phase::Aborted; };
  auto step = [&] {
    if (!advance()) {
      throw Error("simulation stalled in " + std::string(to_string(state_.phase)) + "/" +
                  std::string(to_string(state_.sub)));
    }
  };
  while (state_.phase != phase && !terminal()) step();
  while (state_.phase == phase) step();
  if (state_.phase == Phase::Aborted) throw AbortRequested("run aborted during " + std::string(to_string(phase)));
}

FeedingReport Simulation::run_feeding_cycle() {
  const std::size_t mark = outcomes_.size();
  const double start = world_.clock;
  run_phase(Phase::Feeding);
  return {state_.tally, world_.clock - start, outcomes_since(mark)};
}

CutReport Simulation::run_cutting_sequence() {
  const std::size_t mark = outcomes_.size();
  const std::size_t tmark = suction_timeouts_.size();
  const double start = world_.clock;
  run_phase(Phase::Cutting);
  CutReport r;
  r.outcomes = outcomes_since(mark);
  for (const auto& o : r.outcomes) r.cut += o.action == ActionType::Cut && o.success;
  r.timeouts.assign(suction_timeouts_.begin() + static_cast<std::ptrdiff_t>(tmark),
                    suction_timeouts_.end());
  r.elapsed_s = world_.clock - start;
  return r;
}

RemovalReport Simulation::run_removal_sequence() {
  const std::size_t mark = outcomes_.size();
  const double start = world_.clock;
  run_phase(Phase::Removal);
  RemovalReport r;
  r.outcomes = outcomes_since(mark);
  for (const auto& o : r.outcomes) {
    if (o.action != ActionType::Remove) continue;
    (o.success ? r.removed : r.failed) += 1;
    r.retries += o.retries;
  }
  r.elapsed_s = world_.clock - start;
  return r;
}

DeliveryReport Simulation::run_delivery_sequence() {
  const std::size_t mark = outcomes_.size();
  const double start = world_.clock;
  run_phase(Phase::Delivery);
  DeliveryReport r;
  r.outcomes = outcomes_since(mark);
  for (const auto& o : r.outcomes) {
    if (o.action != ActionType::Deliver) continue;
    (o.success ? r.delivered : r.failed) += 1;
  }
  for (int i = 0; i < kEnclosureCount; ++i) {
    if (state_.pusher_stalled[i]) r.stalled.push_back(i);
  }
  r.elapsed_s = world_.clock - start;
  return r;
}

std::vector<RunReport> Simulation::run() {
  start_if_idle();
  while (state_.phase != Phase::Done && state_.phase != Phase::Aborted) {
    if (!advance()) {
      throw Error("simulation stalled in " + std::string(to_string(state_.phase)) + "/" +
                  std::string(to_string(state_.sub)));
    }
  }
  return reports_;
}

CampaignResult run_full_campaign(const CellConfig& config, const FaultScript& script,
                                 const CampaignOptions& options) {
  if (options.tests < 1) throw EmptyCampaign();
  std::vector<TestResult> results(static_cast<std::size_t>(options.tests));

  auto run_one = [&](int index) {
    const int test = index + 1;
    SimOptions so;
    so.test = test;
    so.cycles = options.cycles_per_test;
    Simulation sim(config, script.for_test(test), so);
    TestResult& r = results[static_cast<std::size_t>(index)];
    r.test = test;
    r.rows = sim.run();
    r.trace = sim.trace();
    r.aborted = sim.aborted();
    r.unused_script_entries = sim.script().unconsumed();
  };

  const int workers = std::clamp(options.workers, 1, options.tests);
  if (workers == 1) {
    for (int i = 0; i < options.tests; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(options.tests));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < options.tests; i = next++) {
          try {
            run_one(i);
          } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<RunReport> rows;
  for (const auto& r : results) rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  CampaignResult out;
  out.report = summarize_campaign(rows);
  out.tests = std::move(results);
  return out;
}

}  // namespace bagcell
