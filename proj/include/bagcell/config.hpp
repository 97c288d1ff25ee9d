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
#include <string>
#include <vector>

#include "json.hpp"

#include "bagcell/faults.hpp"
#include "bagcell/geometry.hpp"

namespace bagcell {

inline constexpr int kEnclosureCount = 8;
inline constexpr int kZoneCount = 4;
inline constexpr int kToteStackCount = 24;
inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct LayoutConfig {
  std::vector<int> zone_sizes{4, 6, 6, 8};
  // Lets tests build totes that do not hold exactly 24 stacks.
  bool allow_any_total = false;
  double incline_deg = 12.0;
  // Top-center of the zone 1 row; rows climb the incline away from the robot.
  Pose3 tote_origin{0.40, 0.0, 0.40, 0.0};
  double row_pitch_m = 0.12;
  double column_pitch_m = 0.10;
  double stack_top_size_m = 0.09;
  // Lateral position of the QR code column (left edge of the tote).
  double qr_lateral_m = 0.45;
  // Added to the measured QR depth to get the stack-top depth, per zone.
  std::vector<double> stack_depth_offset_m{0.0, 0.0, 0.0, 0.0};

  Pose3 home_pose{0.55, 0.0, 0.75, 0.0};
  Pose3 transfer_via{0.45, -0.30, 0.65, 0.0};
  Pose3 bin_pose{0.30, 0.55, 0.45, 0.0};
  // Drop position above enclosure 0; enclosures repeat along +x.
  Pose3 enclosure_origin{0.20, -0.60, 0.45, 0.0};
  double enclosure_pitch_m = 0.10;
  double approach_clearance_m = 0.10;
  double insert_depth_m = 0.10;
};

/// Pinhole intrinsics plus the camera->robot-base extrinsic seen from the
/// home pose. Exposure fields are recorded acquisition metadata only.
struct CameraConfig {
  int width = 1920;
  int height = 1080;
  double fx = 1380.0;
  double fy = 1380.0;
  double cx = 960.0;
  double cy = 540.0;
  // Row-major 4x4. Camera looks straight down; image +x is robot -y.
  std::array<double, 16> extrinsic{0.0, -1.0, 0.0, 0.55,   //
                                   -1.0, 0.0, 0.0, 0.0,    //
                                   0.0, 0.0, -1.0, 1.30,   //
                                   0.0, 0.0, 0.0, 1.0};
  double brightness = 0.0;
  double contrast = 50.0;
  double saturation = 64.0;
  double white_balance_k = 4600.0;
};

struct MotionConfig {
  double robot_max_speed = 2.0;
  double velocity_scaling = 0.28;
  double acceleration_scaling = 0.03;
  double base_acceleration = 13.0;
  double planning_time_budget_s = 5.0;
  int max_planning_attempts = 10;
};

struct DeviceConfig {
  double vacuum_level_kpa = -60.0;
  double leak_level_kpa = -15.0;
  double secure_threshold_kpa = -30.0;
  // Time for a sealed cup to go from ambient to the secure threshold.
  double pressure_ramp_s = 0.5;
  double presence_threshold_cm = 10.0;
  double stack_distance_cm = 5.0;
  double back_wall_distance_cm = 30.0;
  double pusher_travel_s = 4.6;
  double door_travel_s = 4.6;
  double swing_travel_s = 1.0;
  double swing_contact_position = 0.8;
  double cutter_traversal_s = 14.9;
};

struct TimingConfig {
  double detect_service_s = 6.0;
  double grip_timeout_s = 2.0;
  double grip_dwell_s = 1.0;
  double release_dwell_s = 1.0;
  // Per-slot handshake and settling pause in the feeding loop.
  double slot_overhead_s = 39.58;
  double placement_window_s = 3.0;
  double suction_window_s = 3.0;
  double secure_hold_s = 0.6;
  double removal_approach_s = 1.2;
  double removal_lift_s = 0.8;
  double removal_to_bin_s = 1.86;
  double removal_release_s = 0.5;
  double max_cycle_time_s = 3600.0;
};

struct RetryConfig {
  int detect = 3;
  int pick = 3;
  int place = 3;
  int remove = 3;
  int cut = 3;
  int home = 3;
};

struct CellConfig {
  LayoutConfig layout;
  CameraConfig camera;
  MotionConfig motion;
  DeviceConfig devices;
  TimingConfig timing;
  RetryConfig retries;
  FaultProfile faults;
  std::vector<std::string> extra_topics;
  std::uint64_t seed = kDefaultSeed;
};

/// Throws ConfigInvalid naming the first offending field.
void validate(const CellConfig& config);

nlohmann::json to_json(const CellConfig& config);

/// Keys absent from `j` keep their defaults; unknown keys are rejected.
CellConfig config_from_json(const nlohmann::json& j);

CellConfig load_config(const std::string& path);

}  // namespace bagcell
