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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bagcell/config.hpp"
#include "bagcell/devices.hpp"
#include "bagcell/geometry.hpp"

namespace bagcell {

/// Lifecycle order; FailedUnhandled is reachable from any state before
/// Delivered.
enum class StackState {
  InTote,
  HeldByRobot,
  InEnclosure,
  CutInEnclosure,
  Unpacked,
  Delivered,
  FailedUnhandled,
};

enum class Packaging { Intact, Tensioned, Cut, Removed };

std::string_view to_string(StackState s);
std::string_view to_string(Packaging p);

struct GridPos {
  int row = 0;
  int col = 0;
  bool operator==(const GridPos&) const = default;
};

struct Stack {
  int id = 0;
  int zone = 1;  // 1..4
  GridPos grid;
  StackState state = StackState::InTote;
  int enclosure = -1;  // valid for InEnclosure, CutInEnclosure, Unpacked
  Packaging packaging = Packaging::Intact;
  Pose3 top;  // top-center of the stack in the robot base frame

  bool operator==(const Stack&) const = default;
};

struct QRAnchor {
  int zone_id = 1;
  Pose3 pose;
  double true_depth = 0.0;  // meters from the camera
  bool operator==(const QRAnchor&) const = default;
};

struct Tote {
  std::array<std::vector<int>, kZoneCount> zones;  // stack ids, left to right
  double incline_deg = 12.0;
  double stack_top_size_m = 0.09;  // side of the square stack top
  std::array<QRAnchor, kZoneCount> qr_anchors;
  bool operator==(const Tote&) const = default;
};

struct Enclosure {
  int index = 0;
  std::optional<int> occupant;
  double back_wall_distance_cm = 30.0;
  Pose3 drop_pose;
  bool operator==(const Enclosure&) const = default;
};

struct World {
  double clock = 0.0;
  Tote tote;
  std::vector<Stack> stacks;  // indexed by id - 1
  std::array<Enclosure, kEnclosureCount> enclosures;
  DeviceBank devices;
  std::uint64_t rng_seed = kDefaultSeed;
  Pose3 robot_pose;
  std::optional<int> held_stack;

  Stack& stack(int id);
  const Stack& stack(int id) const;
  bool door_open() const { return devices.door_open(); }
  bool pusher_extended(int i) const;
  int count(StackState s) const;
  /// Stacks of a zone still in the tote, left to right.
  std::vector<int> remaining_in_zone(int zone) const;
  /// Lowest-numbered zone that still holds stacks, or nullopt when empty.
  std::optional<int> active_zone() const;
};

World build_world(const CellConfig& config);

/// Structural equality (devices excluded: compared via their observable state).
bool same_structure(const World& a, const World& b);

bool lifecycle_allows(StackState from, StackState to);

/// Moves a stack along its lifecycle and keeps enclosure occupancy and the
/// held-stack slot in sync. Throws LifecycleViolation on an illegal step.
void transition_stack(World& world, int id, StackState to, int enclosure = -1);
void set_packaging(World& world, int id, Packaging p);

struct Violation {
  std::string entity;
  std::string rule;
  std::string detail;
};

std::vector<Violation> check_invariants(const World& world);

}  // namespace bagcell
