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

#include <cmath>
#include <numbers>

namespace bagcell {

/// Position in the robot base frame (meters) plus top-down yaw (radians).
/// Suction picking is always vertical, so roll and pitch are not modeled.
struct Pose3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;

  bool operator==(const Pose3&) const = default;
};

inline bool is_valid(const Pose3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) &&
         std::isfinite(p.yaw) && p.yaw >= -std::numbers::pi &&
         p.yaw <= std::numbers::pi;
}

inline double distance(const Pose3& a, const Pose3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

inline Pose3 offset_z(Pose3 p, double dz) {
  p.z += dz;
  return p;
}

}  // namespace bagcell
