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

#include "bagcell/motion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bagcell/errors.hpp"

namespace bagcell {

MotionParams MotionParams::from_config(const MotionConfig& c) {
  return {c.robot_max_speed,   c.velocity_scaling,       c.acceleration_scaling,
          c.base_acceleration, c.planning_time_budget_s, c.max_planning_attempts};
}

std::string_view to_string(ProfileShape s) {
  switch (s) {
    case ProfileShape::Zero: return "zero";
    case ProfileShape::Triangle: return "triangle";
    case ProfileShape::Trapezoid: return "trapezoid";
  }
  return "unknown";
}

SpeedProfile trapezoid_profile(double distance, double v_max, double a) {
  if (!(v_max > 0.0) || !std::isfinite(v_max) || !(a > 0.0) || !std::isfinite(a)) {
    throw InvalidKinematics("v_max and a must be positive and finite (v_max=" +
                            std::to_string(v_max) + ", a=" + std::to_string(a) + ")");
  }
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw InvalidKinematics("distance must be finite and >= 0");
  }

  SpeedProfile p;
  p.a = a;
  p.distance = distance;
  if (distance == 0.0) return p;

  if (v_max * v_max / a >= distance) {
    // Never reaches v_max: accelerate for half the distance, then brake.
    p.shape = ProfileShape::Triangle;
    p.t_accel = std::sqrt(distance / a);
    p.v_peak = std::min(v_max, a * p.t_accel);
    p.t_cruise = 0.0;
    p.t_total = 2.0 * p.t_accel;
    return p;
  }
  p.shape = ProfileShape::Trapezoid;
  p.v_peak = v_max;
  p.t_accel = v_max / a;
  p.t_cruise = (distance - v_max * v_max / a) / v_max;
  p.t_total = 2.0 * p.t_accel + p.t_cruise;
  return p;
}

double sample_velocity(const SpeedProfile& p, double t) {
  if (!(t >= 0.0) || t > p.t_total) {
    throw OutOfDomain("t=" + std::to_string(t) + " outside [0, " + std::to_string(p.t_total) +
                      "]");
  }
  if (p.shape == ProfileShape::Zero) return 0.0;
  // Ramp-up, plateau and ramp-down in one expression; symmetric in t.
  return std::max(0.0, std::min({p.v_peak, p.a * t, p.a * (p.t_total - t)}));
}

Trajectory plan_linear(const Pose3& from, const Pose3& to, const MotionParams& params) {
  Trajectory traj;
  traj.segments.push_back(
      {from, to,
       trapezoid_profile(distance(from, to), params.effective_max_speed(), params.acceleration())});
  traj.total_duration = traj.segments.front().profile.t_total;
  return traj;
}

Trajectory plan_via_waypoints(std::span<const Pose3> points, const MotionParams& params) {
  if (points.size() < 2) throw TooFewWaypoints(points.size());
  Trajectory traj;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    Trajectory leg = plan_linear(points[i], points[i + 1], params);
    traj.total_duration += leg.total_duration;
    traj.segments.push_back(leg.segments.front());
  }
  return traj;
}

PlanResult plan_with_retries(std::span<const Pose3> waypoints, const MotionParams& params,
                             const AttemptOracle& attempt_outcome) {
  double spent = 0.0;
  for (int attempt = 1; attempt <= params.max_planning_attempts; ++attempt) {
    if (attempt_outcome(attempt) == Outcome::Succeed) {
      return PlanSuccess{plan_via_waypoints(waypoints, params), attempt, spent};
    }
    spent += params.planning_time_budget_s;
  }
  return PlanFailure{params.max_planning_attempts, spent};
}

PlanResult plan_with_retries(std::span<const Pose3> waypoints, const MotionParams& params,
                             Rng& rng, double failure_prob) {
  return plan_with_retries(waypoints, params, [&](int) {
    return bernoulli(rng, failure_prob) ? Outcome::Fail : Outcome::Succeed;
  });
}

}  // namespace bagcell
