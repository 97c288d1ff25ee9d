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
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "bagcell/config.hpp"
#include "bagcell/faults.hpp"
#include "bagcell/geometry.hpp"

namespace bagcell {

/// Cartesian speed limits of the linear planner. The effective limits are
/// the robot maxima scaled by the configured factors.
struct MotionParams {
  double robot_max_speed = 2.0;
  double velocity_scaling = 0.28;
  double acceleration_scaling = 0.03;
  double base_acceleration = 13.0;
  double planning_time_budget_s = 5.0;
  int max_planning_attempts = 10;

  double effective_max_speed() const { return robot_max_speed * velocity_scaling; }
  double acceleration() const { return base_acceleration * acceleration_scaling; }

  static MotionParams from_config(const MotionConfig& c);
};

enum class ProfileShape { Zero, Triangle, Trapezoid };

std::string_view to_string(ProfileShape s);

/// Rest-to-rest speed profile along a straight line. Satisfies
/// a * t_accel^2 + v_peak * t_cruise == distance.
struct SpeedProfile {
  ProfileShape shape = ProfileShape::Zero;
  double v_peak = 0.0;
  double a = 0.0;
  double t_accel = 0.0;
  double t_cruise = 0.0;
  double t_total = 0.0;
  double distance = 0.0;
};

SpeedProfile trapezoid_profile(double distance, double v_max, double a);

/// Speed at time t in [0, t_total]; throws OutOfDomain outside.
double sample_velocity(const SpeedProfile& profile, double t);

struct TrajectorySegment {
  Pose3 from;
  Pose3 to;
  SpeedProfile profile;
};

struct Trajectory {
  std::vector<TrajectorySegment> segments;
  double total_duration = 0.0;

  Pose3 end() const { return segments.empty() ? Pose3{} : segments.back().to; }
};

Trajectory plan_linear(const Pose3& from, const Pose3& to, const MotionParams& params);

/// Chained linear segments that stop at every waypoint.
Trajectory plan_via_waypoints(std::span<const Pose3> points, const MotionParams& params);

struct PlanSuccess {
  Trajectory trajectory;
  int attempts = 1;
  double planning_time_s = 0.0;
};

struct PlanFailure {
  int attempts = 0;
  double planning_time_s = 0.0;
};

using PlanResult = std::variant<PlanSuccess, PlanFailure>;

/// Decides the outcome of planning attempt n (1-based).
using AttemptOracle = std::function<Outcome(int attempt)>;

/// Each failed attempt costs the full planning budget. Gives up after
/// max_planning_attempts.
PlanResult plan_with_retries(std::span<const Pose3> waypoints, const MotionParams& params,
                             const AttemptOracle& attempt_outcome);

PlanResult plan_with_retries(std::span<const Pose3> waypoints, const MotionParams& params,
                             Rng& rng, double failure_prob);

}  // namespace bagcell
