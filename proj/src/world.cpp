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

#include "bagcell/world.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "bagcell/errors.hpp"

namespace bagcell {

std::string_view to_string(StackState s) {
  switch (s) {
    case StackState::InTote: return "InTote";
    case StackState::HeldByRobot: return "HeldByRobot";
    case StackState::InEnclosure: return "InEnclosure";
    case StackState::CutInEnclosure: return "CutInEnclosure";
    case StackState::Unpacked: return "Unpacked";
    case StackState::Delivered: return "Delivered";
    case StackState::FailedUnhandled: return "FailedUnhandled";
  }
  return "Unknown";
}

std::string_view to_string(Packaging p) {
  switch (p) {
    case Packaging::Intact: return "Intact";
    case Packaging::Tensioned: return "Tensioned";
    case Packaging::Cut: return "Cut";
    case Packaging::Removed: return "Removed";
  }
  return "Unknown";
}

namespace {

bool in_enclosure_state(StackState s) {
  return s == StackState::InEnclosure || s == StackState::CutInEnclosure ||
         s == StackState::Unpacked;
}

// Depth along the optical axis of a base-frame point, for a row-major
// camera->base extrinsic.
double camera_depth(const std::array<double, 16>& e, const Pose3& p) {
  double dx = p.x - e[3];
  double dy = p.y - e[7];
  double dz = p.z - e[11];
  return e[2] * dx + e[6] * dy + e[10] * dz;
}

}  // namespace

Stack& World::stack(int id) {
  if (id < 1 || id > static_cast<int>(stacks.size())) {
    throw LifecycleViolation("no stack with id " + std::to_string(id));
  }
  return stacks[id - 1];
}

const Stack& World::stack(int id) const { return const_cast<World*>(this)->stack(id); }

bool World::pusher_extended(int i) const {
  return devices.actuator(DeviceId::pusher(i)).position > DeviceBank::kEps;
}

int World::count(StackState s) const {
  return static_cast<int>(
      std::count_if(stacks.begin(), stacks.end(), [s](const Stack& st) { return st.state == s; }));
}

std::vector<int> World::remaining_in_zone(int zone) const {
  std::vector<int> out;
  if (zone < 1 || zone > kZoneCount) return out;
  for (int id : tote.zones[zone - 1]) {
    if (stack(id).state == StackState::InTote) out.push_back(id);
  }
  return out;
}

std::optional<int> World::active_zone() const {
  for (int z = 1; z <= kZoneCount; ++z) {
    if (!remaining_in_zone(z).empty()) return z;
  }
  return std::nullopt;
}

World build_world(const CellConfig& config) {
  validate(config);
  const auto& l = config.layout;
  World w;
  w.devices = DeviceBank(config.devices);
  w.rng_seed = config.seed;
  w.robot_pose = l.home_pose;
  w.tote.incline_deg = l.incline_deg;
  w.tote.stack_top_size_m = l.stack_top_size_m;

  const double incline = l.incline_deg * std::numbers::pi / 180.0;
  int next_id = 1;
  for (int zone = 1; zone <= kZoneCount; ++zone) {
    const int row = zone - 1;
    const int n = l.zone_sizes[row];
    const double x = l.tote_origin.x + row * l.row_pitch_m * std::cos(incline);
    const double z = l.tote_origin.z + row * l.row_pitch_m * std::sin(incline);
    for (int col = 0; col < n; ++col) {
      Stack s;
      s.id = next_id++;
      s.zone = zone;
      s.grid = {row, col};
      // Column 0 is leftmost in the image, which is +y in the base frame.
      s.top = {x, l.tote_origin.y + ((n - 1) / 2.0 - col) * l.column_pitch_m, z, 0.0};
      w.tote.zones[row].push_back(s.id);
      w.stacks.push_back(s);
    }
    QRAnchor& qr = w.tote.qr_anchors[row];
    qr.zone_id = zone;
    qr.pose = {x, l.tote_origin.y + l.qr_lateral_m, z, 0.0};
    qr.true_depth = camera_depth(config.camera.extrinsic, qr.pose);
    if (!(qr.true_depth > 0.0)) {
      throw ConfigInvalid("camera.extrinsic", "QR anchor of zone " + std::to_string(zone) +
                                                  " is behind the camera");
    }
  }

  for (int i = 0; i < kEnclosureCount; ++i) {
    Enclosure& e = w.enclosures[i];
    e.index = i;
    e.back_wall_distance_cm = config.devices.back_wall_distance_cm;
    e.drop_pose = l.enclosure_origin;
    e.drop_pose.x += i * l.enclosure_pitch_m;
  }
  return w;
}

bool same_structure(const World& a, const World& b) {
  return a.clock == b.clock && a.tote == b.tote && a.stacks == b.stacks &&
         a.enclosures == b.enclosures && a.rng_seed == b.rng_seed &&
         a.robot_pose == b.robot_pose && a.held_stack == b.held_stack;
}

bool lifecycle_allows(StackState from, StackState to) {
  if (to == StackState::FailedUnhandled) {
    return from != StackState::Delivered && from != StackState::FailedUnhandled;
  }
  return static_cast<int>(to) == static_cast<int>(from) + 1 && to != StackState::FailedUnhandled;
}

void transition_stack(World& world, int id, StackState to, int enclosure) {
  Stack& s = world.stack(id);
  const StackState from = s.state;
  if (!lifecycle_allows(from, to)) {
    throw LifecycleViolation("stack " + std::to_string(id) + ": " + std::string(to_string(from)) +
                             " -> " + std::string(to_string(to)) + " not allowed");
  }
  if (to == StackState::HeldByRobot && world.held_stack && *world.held_stack != id) {
    throw LifecycleViolation("stack " + std::to_string(id) + ": robot already holds stack " +
                             std::to_string(*world.held_stack));
  }
  if (to == StackState::InEnclosure) {
    if (enclosure < 0 || enclosure >= kEnclosureCount) {
      throw LifecycleViolation("stack " + std::to_string(id) + ": bad enclosure index");
    }
    const auto& occ = world.enclosures[enclosure].occupant;
    if (occ && *occ != id) {
      throw LifecycleViolation("enclosure " + std::to_string(enclosure) + " already holds stack " +
                               std::to_string(*occ));
    }
  }

  if (from == StackState::HeldByRobot && world.held_stack == id) world.held_stack.reset();
  if (in_enclosure_state(from) && !in_enclosure_state(to)) {
    world.enclosures[s.enclosure].occupant.reset();
    world.devices.set_contents(s.enclosure, std::nullopt);
    s.enclosure = -1;
  }

  s.state = to;
  if (to == StackState::HeldByRobot) world.held_stack = id;
  if (to == StackState::InEnclosure) {
    s.enclosure = enclosure;
    world.enclosures[enclosure].occupant = id;
    world.devices.set_contents(enclosure, id);
  }
}

void set_packaging(World& world, int id, Packaging p) {
  Stack& s = world.stack(id);
  if (static_cast<int>(p) < static_cast<int>(s.packaging)) {
    throw LifecycleViolation("stack " + std::to_string(id) + ": packaging cannot go back to " +
                             std::string(to_string(p)));
  }
  s.packaging = p;
}

std::vector<Violation> check_invariants(const World& w) {
  std::vector<Violation> out;
  auto flag = [&out](std::string entity, std::string rule, std::string detail = {}) {
    out.push_back({std::move(entity), std::move(rule), std::move(detail)});
  };

  if (!std::isfinite(w.clock) || w.clock < 0.0) flag("world", "clock finite and non-negative");
  if (!is_valid(w.robot_pose)) flag("robot", "pose valid");

  int held = 0;
  std::map<StackState, int> per_state;
  for (const Stack& s : w.stacks) {
    const std::string name = "stack " + std::to_string(s.id);
    ++per_state[s.state];
    if (s.state == StackState::HeldByRobot) ++held;
    if (!is_valid(s.top)) flag(name, "pose valid");
    if (s.zone < 1 || s.zone > kZoneCount) flag(name, "zone in 1..4");
    if (s.packaging == Packaging::Cut && s.state != StackState::CutInEnclosure &&
        s.state != StackState::Unpacked && s.state != StackState::FailedUnhandled) {
      flag(name, "cut packaging requires cut state", std::string(to_string(s.state)));
    }
    if (in_enclosure_state(s.state)) {
      if (s.enclosure < 0 || s.enclosure >= kEnclosureCount ||
          w.enclosures[s.enclosure].occupant != s.id) {
        flag(name, "occupant consistency", "stack not registered in its enclosure");
      }
    }
  }
  if (held > 1) flag("world", "single held stack", std::to_string(held) + " stacks held");
  if ((held == 1) != w.held_stack.has_value()) flag("world", "held slot consistency");

  int total = 0;
  for (const auto& [state, n] : per_state) total += n;
  if (total != static_cast<int>(w.stacks.size())) flag("world", "conservation");

  std::map<int, int> occupant_seen;
  for (const Enclosure& e : w.enclosures) {
    if (!e.occupant) continue;
    if (++occupant_seen[*e.occupant] == 2) {
      flag("enclosure " + std::to_string(e.index), "occupant unique",
           "stack " + std::to_string(*e.occupant));
    }
    if (*e.occupant < 1 || *e.occupant > static_cast<int>(w.stacks.size())) {
      flag("enclosure " + std::to_string(e.index), "occupant exists");
      continue;
    }
    const Stack& s = w.stack(*e.occupant);
    if (!in_enclosure_state(s.state) || s.enclosure != e.index) {
      flag("enclosure " + std::to_string(e.index), "occupant consistency",
           "occupant is " + std::string(to_string(s.state)));
    }
  }

  const auto& cfg = w.devices.config();
  auto check_suction = [&](const SuctionState& s, const std::string& name) {
    bool expect = s.solenoid_open && s.engaged_on.has_value() &&
                  s.gauge_pressure_kpa <= cfg.secure_threshold_kpa + DeviceBank::kEps;
    if (s.secure != expect) flag(name, "secure flag equivalence");
    if (s.gauge_pressure_kpa < -101.3 || s.gauge_pressure_kpa > 0.0) flag(name, "pressure range");
  };
  check_suction(w.devices.cobot(), "cobot_suction");
  for (int i = 0; i < kEnclosureCount; ++i) {
    check_suction(w.devices.bottom(i), DeviceId::bottom(i).name());
  }

  const auto& door = w.devices.actuator(DeviceId::door());
  if (door.position > 1.0 + DeviceBank::kEps) flag("door", "door limit");
  if (door.limit_hit && door.position < 1.0 - DeviceBank::kEps) flag("door", "limit switch consistency");
  for (int i = 0; i < kEnclosureCount; ++i) {
    if (w.pusher_extended(i) && door.position < 1.0 - DeviceBank::kEps) {
      flag(DeviceId::pusher(i).name(), "pusher requires door open");
    }
  }
  return out;
}

}  // namespace bagcell
