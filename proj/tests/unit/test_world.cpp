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

#include <algorithm>

#include "bagcell/errors.hpp"
#include "bagcell/world.hpp"

namespace bagcell {
namespace {

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.rule == rule; });
}

TEST(BuildWorld, DefaultLayout) {
  const World w = build_world(CellConfig{});
  EXPECT_EQ(w.stacks.size(), 24u);
  ASSERT_EQ(w.tote.zones.size(), 4u);
  EXPECT_EQ(w.tote.zones[0].size(), 4u);
  EXPECT_EQ(w.tote.zones[1].size(), 6u);
  EXPECT_EQ(w.tote.zones[2].size(), 6u);
  EXPECT_EQ(w.tote.zones[3].size(), 8u);
  EXPECT_DOUBLE_EQ(w.tote.incline_deg, 12.0);
  EXPECT_DOUBLE_EQ(w.clock, 0.0);
  EXPECT_FALSE(w.door_open());
  for (const auto& e : w.enclosures) EXPECT_FALSE(e.occupant.has_value());
  for (const auto& s : w.stacks) {
    EXPECT_EQ(s.state, StackState::InTote);
    EXPECT_EQ(s.packaging, Packaging::Intact);
  }
  for (int z = 0; z < kZoneCount; ++z) {
    EXPECT_EQ(w.tote.qr_anchors[z].zone_id, z + 1);
    EXPECT_GT(w.tote.qr_anchors[z].true_depth, 0.0);
  }
}

TEST(BuildWorld, ZoneSumMustBe24) {
  CellConfig c;
  c.layout.zone_sizes = {4, 6, 6, 7};
  try {
    build_world(c);
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_EQ(e.field(), "layout.zone_sizes");
  }
}

TEST(BuildWorld, AnyTotalWhenAllowed) {
  CellConfig c;
  c.layout.zone_sizes = {1, 0, 0, 2};
  c.layout.allow_any_total = true;
  const World w = build_world(c);
  EXPECT_EQ(w.stacks.size(), 3u);
  EXPECT_EQ(w.active_zone(), 1);
}

TEST(BuildWorld, Deterministic) {
  EXPECT_TRUE(same_structure(build_world(CellConfig{}), build_world(CellConfig{})));
}

TEST(World, RemainingInZoneIsLeftToRight) {
  World w = build_world(CellConfig{});
  const auto zone1 = w.remaining_in_zone(1);
  ASSERT_EQ(zone1.size(), 4u);
  transition_stack(w, zone1[0], StackState::HeldByRobot);
  EXPECT_EQ(w.remaining_in_zone(1), (std::vector<int>{zone1[1], zone1[2], zone1[3]}));
}

TEST(World, ActiveZoneAdvancesWhenZoneEmpties) {
  World w = build_world(CellConfig{});
  for (int id : w.remaining_in_zone(1)) transition_stack(w, id, StackState::FailedUnhandled);
  EXPECT_EQ(w.active_zone(), 2);
}

TEST(Invariants, FreshWorldIsClean) {
  EXPECT_TRUE(check_invariants(build_world(CellConfig{})).empty());
}

TEST(Invariants, SharedOccupant) {
  World w = build_world(CellConfig{});
  transition_stack(w, 1, StackState::HeldByRobot);
  transition_stack(w, 1, StackState::InEnclosure, 0);
  w.enclosures[3].occupant = 1;
  EXPECT_TRUE(has_rule(check_invariants(w), "occupant unique"));
}

TEST(Invariants, TwoHeldStacks) {
  World w = build_world(CellConfig{});
  transition_stack(w, 1, StackState::HeldByRobot);
  w.stacks[1].state = StackState::HeldByRobot;
  EXPECT_TRUE(has_rule(check_invariants(w), "single held stack"));
}

TEST(Lifecycle, ForwardStepsOnly) {
  EXPECT_TRUE(lifecycle_allows(StackState::InTote, StackState::HeldByRobot));
  EXPECT_TRUE(lifecycle_allows(StackState::Unpacked, StackState::Delivered));
  EXPECT_FALSE(lifecycle_allows(StackState::InTote, StackState::InEnclosure));
  EXPECT_FALSE(lifecycle_allows(StackState::InEnclosure, StackState::HeldByRobot));
  EXPECT_TRUE(lifecycle_allows(StackState::CutInEnclosure, StackState::FailedUnhandled));
  EXPECT_FALSE(lifecycle_allows(StackState::Delivered, StackState::FailedUnhandled));
  EXPECT_FALSE(lifecycle_allows(StackState::FailedUnhandled, StackState::InTote));
}

TEST(Lifecycle, SecondHeldStackRejected) {
  World w = build_world(CellConfig{});
  transition_stack(w, 1, StackState::HeldByRobot);
  EXPECT_THROW(transition_stack(w, 2, StackState::HeldByRobot), LifecycleViolation);
}

TEST(Lifecycle, OccupiedEnclosureRejected) {
  World w = build_world(CellConfig{});
  transition_stack(w, 1, StackState::HeldByRobot);
  transition_stack(w, 1, StackState::InEnclosure, 2);
  transition_stack(w, 2, StackState::HeldByRobot);
  EXPECT_THROW(transition_stack(w, 2, StackState::InEnclosure, 2), LifecycleViolation);
}

TEST(Lifecycle, FullPathKeepsConservation) {
  World w = build_world(CellConfig{});
  transition_stack(w, 5, StackState::HeldByRobot);
  transition_stack(w, 5, StackState::InEnclosure, 4);
  EXPECT_EQ(w.enclosures[4].occupant, 5);
  EXPECT_EQ(w.devices.contents(4), 5);
  transition_stack(w, 5, StackState::CutInEnclosure, 4);
  set_packaging(w, 5, Packaging::Tensioned);
  set_packaging(w, 5, Packaging::Cut);
  transition_stack(w, 5, StackState::Unpacked, 4);
  set_packaging(w, 5, Packaging::Removed);
  EXPECT_TRUE(check_invariants(w).empty());
  transition_stack(w, 5, StackState::Delivered);
  EXPECT_FALSE(w.enclosures[4].occupant.has_value());
  EXPECT_FALSE(w.devices.contents(4).has_value());
  EXPECT_EQ(w.count(StackState::Delivered) + w.count(StackState::InTote), 24);
  EXPECT_TRUE(check_invariants(w).empty());
}

TEST(Lifecycle, CutPackagingNeedsCutState) {
  World w = build_world(CellConfig{});
  w.stacks[0].packaging = Packaging::Cut;
  EXPECT_TRUE(has_rule(check_invariants(w), "cut packaging requires cut state"));
}

TEST(Lifecycle, PackagingNeverGoesBack) {
  World w = build_world(CellConfig{});
  set_packaging(w, 1, Packaging::Tensioned);
  EXPECT_THROW(set_packaging(w, 1, Packaging::Intact), LifecycleViolation);
}

}  // namespace
}  // namespace bagcell
