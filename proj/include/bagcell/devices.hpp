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
#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "bagcell/config.hpp"
#include "bagcell/faults.hpp"

namespace bagcell {

struct World;

enum class DeviceKind {
  CobotSuction,
  BottomSuction,
  Pusher,
  Door,
  Swing,
  Cutter,
  Ultrasonic,
};

struct DeviceId {
  DeviceKind kind = DeviceKind::CobotSuction;
  int index = 0;

  auto operator<=>(const DeviceId&) const = default;

  static DeviceId cobot() { return {DeviceKind::CobotSuction, 0}; }
  static DeviceId bottom(int i) { return {DeviceKind::BottomSuction, i}; }
  static DeviceId pusher(int i) { return {DeviceKind::Pusher, i}; }
  static DeviceId door() { return {DeviceKind::Door, 0}; }
  static DeviceId swing() { return {DeviceKind::Swing, 0}; }
  static DeviceId cutter() { return {DeviceKind::Cutter, 0}; }
  static DeviceId ultrasonic(int i) { return {DeviceKind::Ultrasonic, i}; }

  /// "cobot_suction", "bottom_suction3", "pusher5", "door", ...
  std::string name() const;
  static std::optional<DeviceId> parse(const std::string& name);
};

/// Vacuum cup with solenoid valve and pressure sensor. Gauge pressure is in
/// kPa relative to ambient (negative is vacuum).
struct SuctionState {
  bool solenoid_open = false;
  double gauge_pressure_kpa = 0.0;
  std::optional<int> engaged_on;
  bool secure = false;
  bool leaking = false;
};

struct ActuatorState {
  DeviceId id;
  double position = 0.0;  // normalized travel, 0 = home
  double target = 0.0;
  bool moving = false;
  bool limit_hit = false;  // door only
  bool stalled = false;
  std::optional<double> stall_at;  // scripted: extension stops here
  double travel_s = 1.0;           // time for full 0 -> 1 travel
};

struct UltrasonicSensor {
  int enclosure_index = 0;
  double reading_cm = 0.0;
  bool present = false;
};

enum class CommandOp { OpenSolenoid, CloseSolenoid, MoveTo };

struct Command {
  DeviceId device;
  CommandOp op = CommandOp::MoveTo;
  double target = 0.0;  // MoveTo only; clamped to [0, 1]
};

struct ScheduledCompletion {
  DeviceId device;
  double time = 0.0;
};

enum class DeviceEventKind { SuctionSecured, SuctionLost, ActuatorDone, ActuatorStalled };

std::string_view to_string(DeviceEventKind k);

struct DeviceEvent {
  DeviceEventKind kind;
  DeviceId device;
  double time = 0.0;

  bool operator==(const DeviceEvent&) const = default;
};

struct SensorReading {
  double value = 0.0;
  bool present = false;  // ultrasonic only
};

/// Behavioral model of every actuator and sensor in the cell. Pressure and
/// actuator position follow linear ramps, so threshold crossings happen at
/// closed-form times.
class DeviceBank {
 public:
  explicit DeviceBank(const DeviceConfig& config = {});

  ScheduledCompletion apply_command(const Command& cmd, double now);

  /// Advances every device by dt (> 0). Each threshold crossing produces
  /// exactly one event, stamped with the end of the step.
  std::vector<DeviceEvent> step(double now, double dt);

  /// Emits events for contact or valve changes made since the last step
  /// without advancing time.
  std::vector<DeviceEvent> settle(double now);

  /// Absolute time of the next crossing or arrival, +inf when idle.
  double next_event_time(double now) const;

  SensorReading read_sensor(DeviceId sensor, Rng& rng, const FaultProfile& noise) const;

  // Physical contact changes made by the world, not by commands.
  void engage_cobot(std::optional<int> object, bool leaking);
  void set_bottom_leak(int enclosure, bool leaking);
  /// Which stack physically sits in an enclosure's sensing volume.
  void set_contents(int enclosure, std::optional<int> stack);
  std::optional<int> contents(int enclosure) const { return contents_.at(enclosure); }
  void inject_stall(DeviceId actuator, double at_position);

  const SuctionState& cobot() const { return cobot_; }
  const SuctionState& bottom(int i) const { return bottom_.at(i); }
  const ActuatorState& actuator(DeviceId id) const;
  UltrasonicSensor ultrasonic(int i) const;
  const DeviceConfig& config() const { return config_; }

  bool door_open() const { return door_.position >= 1.0 - kEps && !door_.moving; }
  bool any_pusher_extended() const;

  bool is_idle() const;

  static constexpr double kEps = 1e-9;

 private:
  ActuatorState& actuator_mut(DeviceId id);
  void update_suction(SuctionState& s, std::optional<int> engaged, double dt) const;
  double pressure_target(const SuctionState& s) const;
  double pressure_rate() const;
  std::optional<int> bottom_engagement(int i) const;
  void refresh_flags(double time, std::vector<DeviceEvent>& events);
  double suction_event_time(const SuctionState& s) const;

  DeviceConfig config_;
  SuctionState cobot_;
  std::array<SuctionState, kEnclosureCount> bottom_;
  std::array<ActuatorState, kEnclosureCount> pushers_;
  ActuatorState door_;
  ActuatorState swing_;
  ActuatorState cutter_;
  std::array<std::optional<int>, kEnclosureCount> contents_;
};

/// Advances the world's devices and clock together.
std::vector<DeviceEvent> step(World& world, double dt);

SensorReading read_sensor(const DeviceBank& bank, DeviceId sensor, Rng& rng,
                          const FaultProfile& noise);

Outcome resolve_fault(FaultInjector& injector, const FaultContext& ctx, Rng& rng);

}  // namespace bagcell
