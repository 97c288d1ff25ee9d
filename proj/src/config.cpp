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

#include "bagcell/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "bagcell/errors.hpp"

namespace bagcell {

void to_json(nlohmann::json& j, const Pose3& p) {
  j = nlohmann::json{{"x", p.x}, {"y", p.y}, {"z", p.z}, {"yaw", p.yaw}};
}

void from_json(const nlohmann::json& j, Pose3& p) {
  j.at("x").get_to(p.x);
  j.at("y").get_to(p.y);
  j.at("z").get_to(p.z);
  p.yaw = j.value("yaw", 0.0);
}

namespace {

// Single table of every config key, shared by serialization and parsing.
template <class F>
void for_each_field(CellConfig& c, F&& f) {
  auto& l = c.layout;
  f("/layout/zone_sizes", l.zone_sizes);
  f("/layout/allow_any_total", l.allow_any_total);
  f("/layout/incline_deg", l.incline_deg);
  f("/layout/tote_origin", l.tote_origin);
  f("/layout/row_pitch_m", l.row_pitch_m);
  f("/layout/column_pitch_m", l.column_pitch_m);
  f("/layout/stack_top_size_m", l.stack_top_size_m);
  f("/layout/qr_lateral_m", l.qr_lateral_m);
  f("/layout/stack_depth_offset_m", l.stack_depth_offset_m);
  f("/layout/home_pose", l.home_pose);
  f("/layout/transfer_via", l.transfer_via);
  f("/layout/bin_pose", l.bin_pose);
  f("/layout/enclosure_origin", l.enclosure_origin);
  f("/layout/enclosure_pitch_m", l.enclosure_pitch_m);
  f("/layout/approach_clearance_m", l.approach_clearance_m);
  f("/layout/insert_depth_m", l.insert_depth_m);

  auto& cam = c.camera;
  f("/camera/width", cam.width);
  f("/camera/height", cam.height);
  f("/camera/fx", cam.fx);
  f("/camera/fy", cam.fy);
  f("/camera/cx", cam.cx);
  f("/camera/cy", cam.cy);
  f("/camera/extrinsic", cam.extrinsic);
  f("/camera/brightness", cam.brightness);
  f("/camera/contrast", cam.contrast);
  f("/camera/saturation", cam.saturation);
  f("/camera/white_balance_k", cam.white_balance_k);

  auto& m = c.motion;
  f("/motion/robot_max_speed", m.robot_max_speed);
  f("/motion/velocity_scaling", m.velocity_scaling);
  f("/motion/acceleration_scaling", m.acceleration_scaling);
  f("/motion/base_acceleration", m.base_acceleration);
  f("/motion/planning_time_budget_s", m.planning_time_budget_s);
  f("/motion/max_planning_attempts", m.max_planning_attempts);

  auto& d = c.devices;
  f("/devices/vacuum_level_kpa", d.vacuum_level_kpa);
  f("/devices/leak_level_kpa", d.leak_level_kpa);
  f("/devices/secure_threshold_kpa", d.secure_threshold_kpa);
  f("/devices/pressure_ramp_s", d.pressure_ramp_s);
  f("/devices/presence_threshold_cm", d.presence_threshold_cm);
  f("/devices/stack_distance_cm", d.stack_distance_cm);
  f("/devices/back_wall_distance_cm", d.back_wall_distance_cm);
  f("/devices/pusher_travel_s", d.pusher_travel_s);
  f("/devices/door_travel_s", d.door_travel_s);
  f("/devices/swing_travel_s", d.swing_travel_s);
  f("/devices/swing_contact_position", d.swing_contact_position);
  f("/devices/cutter_traversal_s", d.cutter_traversal_s);

  auto& t = c.timing;
  f("/timing/detect_service_s", t.detect_service_s);
  f("/timing/grip_timeout_s", t.grip_timeout_s);
  f("/timing/grip_dwell_s", t.grip_dwell_s);
  f("/timing/release_dwell_s", t.release_dwell_s);
  f("/timing/slot_overhead_s", t.slot_overhead_s);
  f("/timing/placement_window_s", t.placement_window_s);
  f("/timing/suction_window_s", t.suction_window_s);
  f("/timing/secure_hold_s", t.secure_hold_s);
  f("/timing/removal_approach_s", t.removal_approach_s);
  f("/timing/removal_lift_s", t.removal_lift_s);
  f("/timing/removal_to_bin_s", t.removal_to_bin_s);
  f("/timing/removal_release_s", t.removal_release_s);
  f("/timing/max_cycle_time_s", t.max_cycle_time_s);

  auto& r = c.retries;
  f("/retries/detect", r.detect);
  f("/retries/pick", r.pick);
  f("/retries/place", r.place);
  f("/retries/remove", r.remove);
  f("/retries/cut", r.cut);
  f("/retries/home", r.home);

  auto& p = c.faults;
  f("/faults/pick_grip_fail_prob", p.pick_grip_fail_prob);
  f("/faults/place_drop_fail_prob", p.place_drop_fail_prob);
  f("/faults/detection_miss_prob", p.detection_miss_prob);
  f("/faults/detection_jitter_sigma_px", p.detection_jitter_sigma_px);
  f("/faults/spurious_box_prob", p.spurious_box_prob);
  f("/faults/bottom_suction_fail_prob", p.bottom_suction_fail_prob);
  f("/faults/pressure_noise_sigma_kpa", p.pressure_noise_sigma_kpa);
  f("/faults/ultrasonic_noise_sigma_cm", p.ultrasonic_noise_sigma_cm);
  f("/faults/plan_failure_prob", p.plan_failure_prob);
  f("/faults/stack_detect_fail_prob", p.stack_detect_fail_prob);
  f("/faults/stack_pick_fail_prob", p.stack_pick_fail_prob);
  f("/faults/stack_place_fail_prob", p.stack_place_fail_prob);
  f("/faults/confidence_min", p.confidence_min);
  f("/faults/confidence_max", p.confidence_max);

  f("/extra_topics", c.extra_topics);
  f("/seed", c.seed);
}

void reject_unknown_keys(const nlohmann::json& user, const nlohmann::json& known,
                         const std::string& path) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    std::string child = path.empty() ? key : path + "." + key;
    if (!known.is_object() || !known.contains(key)) {
      throw ConfigInvalid(child, "unknown key");
    }
    // Poses are leaf objects; their members are checked by from_json.
    if (known.at(key).is_object() && !known.at(key).contains("yaw")) {
      reject_unknown_keys(value, known.at(key), child);
    }
  }
}

std::string dotted(const char* pointer) {
  std::string s(pointer + 1);
  for (auto& ch : s) {
    if (ch == '/') ch = '.';
  }
  return s;
}

void require(bool ok, const char* field, const std::string& reason) {
  if (!ok) throw ConfigInvalid(field, reason);
}

void require_positive(double v, const char* field) {
  require(std::isfinite(v) && v > 0.0, field, "must be > 0");
}

void require_probability(double v, const char* field) {
  require(std::isfinite(v) && v >= 0.0 && v <= 1.0, field, "must be in [0, 1]");
}

void require_pose(const Pose3& p, const char* field) {
  require(is_valid(p), field, "pose must be finite with yaw in [-pi, pi]");
}

}  // namespace

void validate(const CellConfig& c) {
  const auto& l = c.layout;
  require(static_cast<int>(l.zone_sizes.size()) == kZoneCount, "layout.zone_sizes",
          "must list exactly 4 zones");
  for (int n : l.zone_sizes) require(n >= 0, "layout.zone_sizes", "zone sizes must be >= 0");
  int total = std::accumulate(l.zone_sizes.begin(), l.zone_sizes.end(), 0);
  if (!l.allow_any_total) {
    require(total == kToteStackCount, "layout.zone_sizes",
            "zone sizes sum to " + std::to_string(total) + ", expected 24");
  }
  require(std::isfinite(l.incline_deg) && l.incline_deg >= 0.0 && l.incline_deg < 90.0,
          "layout.incline_deg", "must be in [0, 90)");
  require_pose(l.tote_origin, "layout.tote_origin");
  require_positive(l.row_pitch_m, "layout.row_pitch_m");
  require_positive(l.column_pitch_m, "layout.column_pitch_m");
  require_positive(l.stack_top_size_m, "layout.stack_top_size_m");
  require(l.stack_top_size_m < l.column_pitch_m, "layout.stack_top_size_m",
          "must be smaller than the column pitch");
  require(static_cast<int>(l.stack_depth_offset_m.size()) == kZoneCount,
          "layout.stack_depth_offset_m", "must list exactly 4 offsets");
  require_pose(l.home_pose, "layout.home_pose");
  require_pose(l.transfer_via, "layout.transfer_via");
  require_pose(l.bin_pose, "layout.bin_pose");
  require_pose(l.enclosure_origin, "layout.enclosure_origin");
  require_positive(l.enclosure_pitch_m, "layout.enclosure_pitch_m");
  require_positive(l.approach_clearance_m, "layout.approach_clearance_m");
  require_positive(l.insert_depth_m, "layout.insert_depth_m");

  const auto& cam = c.camera;
  require(cam.width > 0 && cam.height > 0, "camera.width", "frame size must be positive");
  require_positive(cam.fx, "camera.fx");
  require_positive(cam.fy, "camera.fy");

  const auto& m = c.motion;
  require_positive(m.robot_max_speed, "motion.robot_max_speed");
  require(m.velocity_scaling > 0.0 && m.velocity_scaling <= 1.0, "motion.velocity_scaling",
          "must be in (0, 1]");
  require(m.acceleration_scaling > 0.0 && m.acceleration_scaling <= 1.0,
          "motion.acceleration_scaling", "must be in (0, 1]");
  require_positive(m.base_acceleration, "motion.base_acceleration");
  require_positive(m.planning_time_budget_s, "motion.planning_time_budget_s");
  require(m.max_planning_attempts >= 1, "motion.max_planning_attempts", "must be >= 1");

  const auto& d = c.devices;
  require(d.vacuum_level_kpa >= -101.3 && d.vacuum_level_kpa < 0.0, "devices.vacuum_level_kpa",
          "must be in [-101.3, 0)");
  require(d.secure_threshold_kpa < 0.0 && d.secure_threshold_kpa >= d.vacuum_level_kpa,
          "devices.secure_threshold_kpa", "must lie between the vacuum level and ambient");
  require(d.leak_level_kpa <= 0.0 && d.leak_level_kpa > d.secure_threshold_kpa,
          "devices.leak_level_kpa", "must be weaker than the secure threshold");
  require_positive(d.pressure_ramp_s, "devices.pressure_ramp_s");
  require_positive(d.presence_threshold_cm, "devices.presence_threshold_cm");
  require(d.stack_distance_cm >= 0.0 && d.stack_distance_cm < d.presence_threshold_cm,
          "devices.stack_distance_cm", "must read below the presence threshold");
  require(d.back_wall_distance_cm > d.presence_threshold_cm, "devices.back_wall_distance_cm",
          "must read above the presence threshold");
  require_positive(d.pusher_travel_s, "devices.pusher_travel_s");
  require_positive(d.door_travel_s, "devices.door_travel_s");
  require_positive(d.swing_travel_s, "devices.swing_travel_s");
  require(d.swing_contact_position > 0.0 && d.swing_contact_position < 1.0,
          "devices.swing_contact_position", "must be in (0, 1)");
  require_positive(d.cutter_traversal_s, "devices.cutter_traversal_s");

  const auto& t = c.timing;
  require_positive(t.detect_service_s, "timing.detect_service_s");
  require_positive(t.grip_timeout_s, "timing.grip_timeout_s");
  require_positive(t.grip_dwell_s, "timing.grip_dwell_s");
  require_positive(t.release_dwell_s, "timing.release_dwell_s");
  require(std::isfinite(t.slot_overhead_s) && t.slot_overhead_s >= 0.0,
          "timing.slot_overhead_s", "must be >= 0");
  require_positive(t.placement_window_s, "timing.placement_window_s");
  require_positive(t.suction_window_s, "timing.suction_window_s");
  require_positive(t.secure_hold_s, "timing.secure_hold_s");
  require_positive(t.removal_approach_s, "timing.removal_approach_s");
  require_positive(t.removal_lift_s, "timing.removal_lift_s");
  require_positive(t.removal_to_bin_s, "timing.removal_to_bin_s");
  require_positive(t.removal_release_s, "timing.removal_release_s");
  require_positive(t.max_cycle_time_s, "timing.max_cycle_time_s");

  const auto& r = c.retries;
  require(r.detect >= 1, "retries.detect", "must be >= 1");
  require(r.pick >= 1, "retries.pick", "must be >= 1");
  require(r.place >= 1, "retries.place", "must be >= 1");
  require(r.remove >= 1, "retries.remove", "must be >= 1");
  require(r.cut >= 1, "retries.cut", "must be >= 1");
  require(r.home >= 1, "retries.home", "must be >= 1");

  const auto& p = c.faults;
  require_probability(p.pick_grip_fail_prob, "faults.pick_grip_fail_prob");
  require_probability(p.place_drop_fail_prob, "faults.place_drop_fail_prob");
  require_probability(p.detection_miss_prob, "faults.detection_miss_prob");
  require_probability(p.spurious_box_prob, "faults.spurious_box_prob");
  require_probability(p.bottom_suction_fail_prob, "faults.bottom_suction_fail_prob");
  require_probability(p.plan_failure_prob, "faults.plan_failure_prob");
  require_probability(p.stack_detect_fail_prob, "faults.stack_detect_fail_prob");
  require_probability(p.stack_pick_fail_prob, "faults.stack_pick_fail_prob");
  require_probability(p.stack_place_fail_prob, "faults.stack_place_fail_prob");
  require(p.detection_jitter_sigma_px >= 0.0, "faults.detection_jitter_sigma_px", "must be >= 0");
  require(p.pressure_noise_sigma_kpa >= 0.0, "faults.pressure_noise_sigma_kpa", "must be >= 0");
  require(p.ultrasonic_noise_sigma_cm >= 0.0, "faults.ultrasonic_noise_sigma_cm", "must be >= 0");
  require(p.confidence_min >= 0.0 && p.confidence_min <= p.confidence_max &&
              p.confidence_max <= 1.0,
          "faults.confidence_min", "need 0 <= confidence_min <= confidence_max <= 1");

  for (const auto& topic : c.extra_topics) {
    require(!topic.empty(), "extra_topics", "topic names must be non-empty");
  }
}

nlohmann::json to_json(const CellConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  CellConfig copy = config;
  for_each_field(copy, [&j](const char* pointer, const auto& value) {
    j[nlohmann::json::json_pointer(pointer)] = value;
  });
  return j;
}

CellConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigInvalid("<root>", "config must be a JSON object");
  CellConfig config;
  const nlohmann::json known = to_json(config);
  reject_unknown_keys(j, known, "");
  for_each_field(config, [&j](const char* pointer, auto& value) {
    nlohmann::json::json_pointer ptr(pointer);
    if (!j.contains(ptr)) return;
    try {
      j.at(ptr).get_to(value);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigInvalid(dotted(pointer), e.what());
    }
  });
  validate(config);
  return config;
}

CellConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("<file>", "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigInvalid("<file>", "'" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace bagcell
