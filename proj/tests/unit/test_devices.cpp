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

#include <gtest/gtest.h>

#include "bagcell/devices.hpp"
#include "bagcell/errors.hpp"
#include "bagcell/world.hpp"

namespace bagcell {
namespace {

std::vector<DeviceEvent> run_steps(DeviceBank& bank, double dt, int n, double start = 0.0) {
  std::vector<DeviceEvent> out;
  for (int i = 0; i < n; ++i) {
    auto ev = bank.step(start + i * dt, dt);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

int first_step_with(DeviceBank& bank, DeviceEventKind kind, double dt, int max_steps) {
  for (int i = 0; i < max_steps; ++i) {
    for (const auto& e : bank.step(i * dt, dt)) {
      if (e.kind == kind) return i + 1;
    }
  }
  return -1;
}

TEST(DeviceId, NamesRoundTrip) {
  for (DeviceId id : {DeviceId::cobot(), DeviceId::bottom(3), DeviceId::pusher(7), DeviceId::door(),
                      DeviceId::swing(), DeviceId::cutter(), DeviceId::ultrasonic(0)}) {
    EXPECT_EQ(DeviceId::parse(id.name()), id);
  }
  EXPECT_EQ(DeviceId::bottom(3).name(), "bottom_suction3");
  EXPECT_EQ(DeviceId::parse("pusher9"), std::nullopt);
}

TEST(Suction, SecuredOnFifthTenthOfASecond) {
  DeviceBank bank;  // ramp 0.5 s to the threshold, no noise
  bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
  bank.engage_cobot(7, false);
  EXPECT_EQ(first_step_with(bank, DeviceEventKind::SuctionSecured, 0.1, 20), 5);
  EXPECT_TRUE(bank.cobot().secure);
}

TEST(Suction, PressureMonotoneDuringRamp) {
  DeviceBank bank;
  bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
  bank.engage_cobot(1, false);
  double last = bank.cobot().gauge_pressure_kpa;
  for (int i = 0; i < 200; ++i) {
    bank.step(i * 0.01, 0.01);
    EXPECT_LE(bank.cobot().gauge_pressure_kpa, last);
    last = bank.cobot().gauge_pressure_kpa;
  }
  EXPECT_DOUBLE_EQ(last, bank.config().vacuum_level_kpa);
}

TEST(Suction, LeakNeverSecures) {
  DeviceBank bank;
  bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
  bank.engage_cobot(1, true);
  EXPECT_EQ(first_step_with(bank, DeviceEventKind::SuctionSecured, 0.1, 50), -1);
  EXPECT_FALSE(bank.cobot().secure);
}

TEST(Suction, ClosingValveLosesGrip) {
  DeviceBank bank;
  bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
  bank.engage_cobot(1, false);
  run_steps(bank, 0.1, 10);
  bank.apply_command({DeviceId::cobot(), CommandOp::CloseSolenoid}, 1.0);
  const auto ev = bank.settle(1.0);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, DeviceEventKind::SuctionLost);
}

TEST(Suction, EventOnceUnderRefinement) {
  auto events = [](double dt) {
    DeviceBank bank;
    bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
    bank.engage_cobot(2, false);
    const int n = static_cast<int>(std::lround(2.0 / dt));
    return run_steps(bank, dt, n);
  };
  const auto coarse = events(0.1);
  const auto fine = events(0.01);
  ASSERT_EQ(coarse.size(), fine.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    EXPECT_EQ(coarse[i].kind, fine[i].kind);
    EXPECT_EQ(coarse[i].device, fine[i].device);
    EXPECT_NEAR(coarse[i].time, fine[i].time, 0.1);
  }
}

TEST(Suction, NextEventTimeIsExact) {
  DeviceBank bank;
  bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
  bank.engage_cobot(2, false);
  bank.settle(0.0);
  const double t = bank.next_event_time(0.0);
  EXPECT_NEAR(t, 0.5, 1e-12);
  const auto ev = bank.step(0.0, t);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, DeviceEventKind::SuctionSecured);
}

TEST(Bottom, EngagesOnlyWithSwingInContact) {
  DeviceBank bank;
  bank.set_contents(5, 11);
  bank.apply_command({DeviceId::bottom(5), CommandOp::OpenSolenoid}, 0.0);
  EXPECT_EQ(first_step_with(bank, DeviceEventKind::SuctionSecured, 0.1, 20), -1);
  bank.apply_command({DeviceId::swing(), CommandOp::MoveTo, bank.config().swing_contact_position}, 2.0);
  const auto ev = run_steps(bank, 0.05, 40, 2.0);
  bool secured = false;
  for (const auto& e : ev) secured |= e.kind == DeviceEventKind::SuctionSecured && e.device == DeviceId::bottom(5);
  EXPECT_TRUE(secured);
}

TEST(Actuator, PusherCompletesOnTime) {
  DeviceBank bank;
  const auto sc = bank.apply_command({DeviceId::pusher(3), CommandOp::MoveTo, 1.0}, 10.0);
  EXPECT_NEAR(sc.time, 10.0 + bank.config().pusher_travel_s, 1e-12);
  const auto ev = bank.step(10.0, bank.config().pusher_travel_s);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, DeviceEventKind::ActuatorDone);
  EXPECT_DOUBLE_EQ(bank.actuator(DeviceId::pusher(3)).position, 1.0);
}

TEST(Actuator, DoorClampsAtLimit) {
  DeviceBank bank;
  bank.apply_command({DeviceId::door(), CommandOp::MoveTo, 1.7}, 0.0);
  bank.step(0.0, 10.0);
  EXPECT_DOUBLE_EQ(bank.actuator(DeviceId::door()).position, 1.0);
  EXPECT_TRUE(bank.actuator(DeviceId::door()).limit_hit);
  EXPECT_TRUE(bank.door_open());
}

TEST(Actuator, BusyRejectsConflictingTarget) {
  DeviceBank bank;
  bank.apply_command({DeviceId::door(), CommandOp::MoveTo, 1.0}, 0.0);
  EXPECT_THROW(bank.apply_command({DeviceId::door(), CommandOp::MoveTo, 0.0}, 0.1), DeviceBusy);
  EXPECT_NO_THROW(bank.apply_command({DeviceId::door(), CommandOp::MoveTo, 1.0}, 0.1));
}

TEST(Actuator, StallStopsExtension) {
  DeviceBank bank;
  bank.inject_stall(DeviceId::pusher(2), 0.5);
  bank.apply_command({DeviceId::pusher(2), CommandOp::MoveTo, 1.0}, 0.0);
  EXPECT_NEAR(bank.next_event_time(0.0), 0.5 * bank.config().pusher_travel_s, 1e-12);
  const auto ev = bank.step(0.0, 10.0);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, DeviceEventKind::ActuatorStalled);
  EXPECT_TRUE(bank.actuator(DeviceId::pusher(2)).stalled);
}

TEST(Actuator, UnknownTargets) {
  DeviceBank bank;
  EXPECT_THROW(bank.apply_command({DeviceId::pusher(8), CommandOp::MoveTo, 1.0}, 0.0), UnknownDevice);
  EXPECT_THROW(bank.apply_command({DeviceId::ultrasonic(0), CommandOp::MoveTo, 1.0}, 0.0),
               UnknownDevice);
  EXPECT_THROW(bank.apply_command({DeviceId::door(), CommandOp::OpenSolenoid}, 0.0), UnknownDevice);
}

TEST(Actuator, IdleStepChangesNothing) {
  DeviceBank bank;
  EXPECT_TRUE(bank.step(0.0, 1.0).empty());
  EXPECT_TRUE(bank.is_idle());
  EXPECT_EQ(bank.next_event_time(0.0), std::numeric_limits<double>::infinity());
}

TEST(Sensors, UltrasonicPresence) {
  DeviceBank bank;
  Rng rng(1);
  const FaultProfile quiet;
  bank.set_contents(1, 4);
  const SensorReading full = bank.read_sensor(DeviceId::ultrasonic(1), rng, quiet);
  EXPECT_DOUBLE_EQ(full.value, 5.0);
  EXPECT_TRUE(full.present);
  const SensorReading empty = bank.read_sensor(DeviceId::ultrasonic(2), rng, quiet);
  EXPECT_DOUBLE_EQ(empty.value, 30.0);
  EXPECT_FALSE(empty.present);
}

TEST(Sensors, PressureNoiseMean) {
  DeviceBank bank;
  bank.apply_command({DeviceId::cobot(), CommandOp::OpenSolenoid}, 0.0);
  bank.engage_cobot(1, false);
  run_steps(bank, 0.5, 4);
  ASSERT_DOUBLE_EQ(bank.cobot().gauge_pressure_kpa, -60.0);
  FaultProfile noisy;
  noisy.pressure_noise_sigma_kpa = 1.0;
  Rng rng(2024);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += bank.read_sensor(DeviceId::cobot(), rng, noisy).value;
  EXPECT_NEAR(sum / 10000, -60.0, 0.05);
}

TEST(Sensors, NotASensor) {
  DeviceBank bank;
  Rng rng(1);
  EXPECT_THROW(bank.read_sensor(DeviceId::door(), rng, {}), UnknownDevice);
}

TEST(WorldStep, AdvancesClock) {
  World w = build_world(CellConfig{});
  step(w, 0.25);
  step(w, 0.25);
  EXPECT_DOUBLE_EQ(w.clock, 0.5);
}

TEST(ResolveFault, DelegatesToInjector) {
  FaultProfile p;
  p.place_drop_fail_prob = 1.0;
  FaultInjector inj(p, {});
  Rng rng(3);
  FaultContext c;
  c.cls = FaultClass::Place;
  EXPECT_EQ(resolve_fault(inj, c, rng), Outcome::Fail);
  c.cls = FaultClass::Pick;
  EXPECT_EQ(resolve_fault(inj, c, rng), Outcome::Succeed);
}

}  // namespace
}  // namespace bagcell
