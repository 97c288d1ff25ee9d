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

#include "bagcell/devices.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bagcell/errors.hpp"
#include "bagcell/world.hpp"

namespace bagcell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool indexed(DeviceKind k) {
  return k == DeviceKind::BottomSuction || k == DeviceKind::Pusher ||
         k == DeviceKind::Ultrasonic;
}

std::string_view base_name(DeviceKind k) {
  switch (k) {
    case DeviceKind::CobotSuction: return "cobot_suction";
    case DeviceKind::BottomSuction: return "bottom_suction";
    case DeviceKind::Pusher: return "pusher";
    case DeviceKind::Door: return "door";
    case DeviceKind::Swing: return "swing";
    case DeviceKind::Cutter: return "cutter";
    case DeviceKind::Ultrasonic: return "ultrasonic";
  }
  return "unknown";
}

void check_exists(DeviceId id) {
  bool ok = indexed(id.kind) ? (id.index >= 0 && id.index < kEnclosureCount) : id.index == 0;
  if (!ok) throw UnknownDevice(id.name());
}

}  // namespace

std::string DeviceId::name() const {
  std::string s(base_name(kind));
  if (indexed(kind)) s += std::to_string(index);
  return s;
}

std::optional<DeviceId> DeviceId::parse(const std::string& name) {
  for (auto k : {DeviceKind::CobotSuction, DeviceKind::BottomSuction, DeviceKind::Pusher,
                 DeviceKind::Door, DeviceKind::Swing, DeviceKind::Cutter,
                 DeviceKind::Ultrasonic}) {
    std::string_view base = base_name(k);
    if (name.rfind(base, 0) != 0) continue;
    std::string rest = name.substr(base.size());
    if (!indexed(k)) {
      if (rest.empty()) return DeviceId{k, 0};
      continue;
    }
    if (rest.size() != 1 || rest[0] < '0' || rest[0] > '7') continue;
    return DeviceId{k, rest[0] - '0'};
  }
  return std::nullopt;
}

std::string_view to_string(DeviceEventKind k) {
  switch (k) {
    case DeviceEventKind::SuctionSecured: return "SuctionSecured";
    case DeviceEventKind::SuctionLost: return "SuctionLost";
    case DeviceEventKind::ActuatorDone: return "ActuatorDone";
    case DeviceEventKind::ActuatorStalled: return "ActuatorStalled";
  }
  return "Unknown";
}

DeviceBank::DeviceBank(const DeviceConfig& config) : config_(config) {
  for (int i = 0; i < kEnclosureCount; ++i) {
    pushers_[i].id = DeviceId::pusher(i);
    pushers_[i].travel_s = config.pusher_travel_s;
  }
  door_.id = DeviceId::door();
  door_.travel_s = config.door_travel_s;
  swing_.id = DeviceId::swing();
  swing_.travel_s = config.swing_travel_s;
  cutter_.id = DeviceId::cutter();
  cutter_.travel_s = config.cutter_traversal_s;
}

const ActuatorState& DeviceBank::actuator(DeviceId id) const {
  return const_cast<DeviceBank*>(this)->actuator_mut(id);
}

ActuatorState& DeviceBank::actuator_mut(DeviceId id) {
  check_exists(id);
  switch (id.kind) {
    case DeviceKind::Pusher: return pushers_[id.index];
    case DeviceKind::Door: return door_;
    case DeviceKind::Swing: return swing_;
    case DeviceKind::Cutter: return cutter_;
    default: throw UnknownDevice(id.name() + " (not an actuator)");
  }
}

UltrasonicSensor DeviceBank::ultrasonic(int i) const {
  check_exists(DeviceId::ultrasonic(i));
  UltrasonicSensor s;
  s.enclosure_index = i;
  s.reading_cm = contents_[i] ? config_.stack_distance_cm : config_.back_wall_distance_cm;
  s.present = s.reading_cm < config_.presence_threshold_cm;
  return s;
}

bool DeviceBank::any_pusher_extended() const {
  return std::any_of(pushers_.begin(), pushers_.end(),
                     [](const ActuatorState& p) { return p.position > kEps; });
}

bool DeviceBank::is_idle() const {
  return next_event_time(0.0) == kInf;
}

double DeviceBank::pressure_rate() const {
  return std::abs(config_.secure_threshold_kpa) / config_.pressure_ramp_s;
}

double DeviceBank::pressure_target(const SuctionState& s) const {
  if (!s.solenoid_open || !s.engaged_on) return 0.0;
  return s.leaking ? config_.leak_level_kpa : config_.vacuum_level_kpa;
}

std::optional<int> DeviceBank::bottom_engagement(int i) const {
  if (swing_.position + kEps < config_.swing_contact_position) return std::nullopt;
  return contents_[i];
}

void DeviceBank::engage_cobot(std::optional<int> object, bool leaking) {
  cobot_.engaged_on = object;
  cobot_.leaking = object.has_value() && leaking;
}

void DeviceBank::set_bottom_leak(int enclosure, bool leaking) {
  check_exists(DeviceId::bottom(enclosure));
  bottom_[enclosure].leaking = leaking;
}

void DeviceBank::set_contents(int enclosure, std::optional<int> stack) {
  check_exists(DeviceId::ultrasonic(enclosure));
  contents_[enclosure] = stack;
}

void DeviceBank::inject_stall(DeviceId actuator, double at_position) {
  actuator_mut(actuator).stall_at = std::clamp(at_position, 0.0, 1.0);
}

ScheduledCompletion DeviceBank::apply_command(const Command& cmd, double now) {
  check_exists(cmd.device);
  const DeviceKind kind = cmd.device.kind;

  if (cmd.op == CommandOp::OpenSolenoid || cmd.op == CommandOp::CloseSolenoid) {
    SuctionState* s = nullptr;
    if (kind == DeviceKind::CobotSuction) s = &cobot_;
    if (kind == DeviceKind::BottomSuction) s = &bottom_[cmd.device.index];
    if (s == nullptr) throw UnknownDevice(cmd.device.name() + " (no solenoid)");
    s->solenoid_open = cmd.op == CommandOp::OpenSolenoid;
    double rate = pressure_rate();
    double target = s->solenoid_open ? config_.secure_threshold_kpa : 0.0;
    return {cmd.device, now + std::abs(target - s->gauge_pressure_kpa) / rate};
  }

  if (kind == DeviceKind::CobotSuction || kind == DeviceKind::BottomSuction ||
      kind == DeviceKind::Ultrasonic) {
    throw UnknownDevice(cmd.device.name() + " (not an actuator)");
  }
  ActuatorState& a = actuator_mut(cmd.device);
  double target = std::clamp(cmd.target, 0.0, 1.0);
  if (a.moving && std::abs(a.target - target) > kEps) throw DeviceBusy(cmd.device.name());
  a.target = target;
  a.stalled = false;
  if (kind == DeviceKind::Door && target < 1.0 - kEps) a.limit_hit = false;
  double remaining = std::abs(target - a.position);
  if (remaining <= kEps) {
    a.position = target;
    a.moving = false;
    if (kind == DeviceKind::Door && target >= 1.0 - kEps) a.limit_hit = true;
    return {cmd.device, now};
  }
  a.moving = true;
  return {cmd.device, now + remaining * a.travel_s};
}

void DeviceBank::update_suction(SuctionState& s, std::optional<int> engaged, double dt) const {
  s.engaged_on = engaged;
  double target = pressure_target(s);
  double max_delta = pressure_rate() * dt;
  double delta = std::clamp(target - s.gauge_pressure_kpa, -max_delta, max_delta);
  s.gauge_pressure_kpa = std::clamp(s.gauge_pressure_kpa + delta, -101.3, 0.0);
  if (std::abs(s.gauge_pressure_kpa - target) <= kEps) s.gauge_pressure_kpa = target;
}

void DeviceBank::refresh_flags(double time, std::vector<DeviceEvent>& events) {
  auto refresh = [&](SuctionState& s, DeviceId id) {
    bool secure = s.solenoid_open && s.engaged_on.has_value() &&
                  s.gauge_pressure_kpa <= config_.secure_threshold_kpa + kEps;
    if (secure != s.secure) {
      s.secure = secure;
      events.push_back({secure ? DeviceEventKind::SuctionSecured : DeviceEventKind::SuctionLost,
                        id, time});
    }
  };
  cobot_.leaking = cobot_.leaking && cobot_.engaged_on.has_value();
  refresh(cobot_, DeviceId::cobot());
  for (int i = 0; i < kEnclosureCount; ++i) {
    bottom_[i].engaged_on = bottom_engagement(i);
    refresh(bottom_[i], DeviceId::bottom(i));
  }
}

std::vector<DeviceEvent> DeviceBank::step(double now, double dt) {
  std::vector<DeviceEvent> events;
  if (!(dt > 0.0)) return events;
  // Contact or valve changes made since the last step take effect first.
  refresh_flags(now, events);
  const double end = now + dt;

  update_suction(cobot_, cobot_.engaged_on, dt);
  for (int i = 0; i < kEnclosureCount; ++i) {
    update_suction(bottom_[i], bottom_engagement(i), dt);
  }

  auto advance = [&](ActuatorState& a) {
    if (!a.moving) return;
    double dir = a.target > a.position ? 1.0 : -1.0;
    double next = a.position + dir * dt / a.travel_s;
    if (a.stall_at && dir > 0.0 && next >= *a.stall_at - kEps && a.position < *a.stall_at) {
      a.position = *a.stall_at;
      a.moving = false;
      a.stalled = true;
      a.stall_at.reset();
      events.push_back({DeviceEventKind::ActuatorStalled, a.id, end});
      return;
    }
    if ((dir > 0.0 && next >= a.target - kEps) || (dir < 0.0 && next <= a.target + kEps)) {
      a.position = a.target;
      a.moving = false;
      if (a.id.kind == DeviceKind::Door && a.position >= 1.0 - kEps) a.limit_hit = true;
      events.push_back({DeviceEventKind::ActuatorDone, a.id, end});
      return;
    }
    a.position = std::clamp(next, 0.0, 1.0);
  };
  for (auto& p : pushers_) advance(p);
  advance(door_);
  advance(swing_);
  advance(cutter_);

  refresh_flags(end, events);
  return events;
}

std::vector<DeviceEvent> DeviceBank::settle(double now) {
  std::vector<DeviceEvent> events;
  refresh_flags(now, events);
  return events;
}

double DeviceBank::suction_event_time(const SuctionState& s) const {
  double thr = config_.secure_threshold_kpa;
  double rate = pressure_rate();
  double target = pressure_target(s);
  double p = s.gauge_pressure_kpa;
  if (!s.solenoid_open || !s.engaged_on) return kInf;
  if (p > thr + kEps && target <= thr) return (p - thr) / rate;
  if (p <= thr + kEps && target > thr + kEps) return (thr + 2 * kEps - p) / rate;
  return kInf;
}

double DeviceBank::next_event_time(double now) const {
  double best = kInf;
  // Pending discrete changes resolve at the next step.
  auto pending = [&](const SuctionState& s, std::optional<int> engaged) {
    bool secure = s.solenoid_open && engaged.has_value() &&
                  s.gauge_pressure_kpa <= config_.secure_threshold_kpa + kEps;
    return secure != s.secure;
  };
  if (pending(cobot_, cobot_.engaged_on)) return now;
  for (int i = 0; i < kEnclosureCount; ++i) {
    if (pending(bottom_[i], bottom_engagement(i))) return now;
  }

  best = std::min(best, now + suction_event_time(cobot_));
  for (int i = 0; i < kEnclosureCount; ++i) {
    SuctionState s = bottom_[i];
    s.engaged_on = bottom_engagement(i);
    best = std::min(best, now + suction_event_time(s));
  }
  auto arrival = [&](const ActuatorState& a) {
    if (!a.moving) return kInf;
    double stop = a.target;
    if (a.stall_at && a.target > a.position && *a.stall_at > a.position) {
      stop = std::min(stop, *a.stall_at);
    }
    return now + std::abs(stop - a.position) * a.travel_s;
  };
  for (const auto& p : pushers_) best = std::min(best, arrival(p));
  best = std::min({best, arrival(door_), arrival(swing_), arrival(cutter_)});
  return best;
}

SensorReading DeviceBank::read_sensor(DeviceId sensor, Rng& rng,
                                      const FaultProfile& noise) const {
  check_exists(sensor);
  SensorReading r;
  switch (sensor.kind) {
    case DeviceKind::CobotSuction:
      r.value = cobot_.gauge_pressure_kpa + gaussian(rng, noise.pressure_noise_sigma_kpa);
      return r;
    case DeviceKind::BottomSuction:
      r.value = bottom_[sensor.index].gauge_pressure_kpa +
                gaussian(rng, noise.pressure_noise_sigma_kpa);
      return r;
    case DeviceKind::Ultrasonic: {
      double truth = ultrasonic(sensor.index).reading_cm;
      r.value = std::max(0.0, truth + gaussian(rng, noise.ultrasonic_noise_sigma_cm));
      r.present = r.value < config_.presence_threshold_cm;
      return r;
    }
    default:
      throw UnknownDevice(sensor.name() + " (not a sensor)");
  }
}

std::vector<DeviceEvent> step(World& world, double dt) {
  auto events = world.devices.step(world.clock, dt);
  if (dt > 0.0) world.clock += dt;
  return events;
}

SensorReading read_sensor(const DeviceBank& bank, DeviceId sensor, Rng& rng,
                          const FaultProfile& noise) {
  return bank.read_sensor(sensor, rng, noise);
}

Outcome resolve_fault(FaultInjector& injector, const FaultContext& ctx, Rng& rng) {
  return injector.resolve(ctx, rng);
}

}  // namespace bagcell
