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

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bagcell/config.hpp"
#include "bagcell/faults.hpp"
#include "bagcell/geometry.hpp"
#include "bagcell/world.hpp"

namespace bagcell {

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double confidence = 1.0;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  double area() const { return (x_max - x_min) * (y_max - y_min); }

  bool operator==(const BoundingBox&) const = default;
};

/// Throws InvalidBox unless the box is non-degenerate, inside a
/// width x height frame and has confidence in [0, 1].
void validate_box(const BoundingBox& box, int width = 1920, int height = 1080);

struct GroundTruthBox {
  int stack_id = 0;
  BoundingBox box;
};

struct QRObservation {
  int zone_id = 0;
  double measured_depth = 0.0;
};

struct Frame {
  double timestamp = 0.0;
  int zone_in_view = 1;
  std::vector<GroundTruthBox> ground_truth;
  std::vector<BoundingBox> detections;
  std::vector<QRObservation> qr_observations;
};

/// Pinhole camera with a camera->robot-base extrinsic.
class CameraModel {
 public:
  CameraModel(double fx, double fy, double cx, double cy,
              const Eigen::Matrix4d& extrinsic = Eigen::Matrix4d::Identity(), int width = 1920,
              int height = 1080);

  static CameraModel from_config(const CameraConfig& config);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const Eigen::Matrix4d& extrinsic() const { return extrinsic_; }

  /// Base-frame point to camera-frame point.
  Eigen::Vector3d to_camera(const Eigen::Vector3d& base_point) const;

 private:
  double fx_, fy_, cx_, cy_;
  Eigen::Matrix4d extrinsic_;
  Eigen::Matrix4d inverse_;
  int width_, height_;
};

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  bool operator==(const ConfusionCounts&) const = default;
};

struct DetectionMatch {
  int pred = -1;  // index into preds
  int gt = -1;    // index into gts
  double iou = 0.0;
};

struct MatchResult {
  ConfusionCounts counts;
  std::vector<DetectionMatch> matches;  // in matching order
};

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap50 = 0.0;
};

/// Synthetic camera observation of `zone`: ground truth projected from the
/// stacks still in the tote, detections derived from it through the fault
/// profile's noise model. The draw count depends only on the number of
/// ground-truth boxes, not on the probabilities.
Frame observe(const World& world, int zone, const CameraModel& camera, const FaultProfile& fault,
              Rng& rng);

/// Observes the active zone (lowest zone with stacks left, or zone 4 when
/// the tote is empty).
Frame observe(const World& world, const CameraModel& camera, const FaultProfile& fault, Rng& rng);

double iou(const BoundingBox& a, const BoundingBox& b);

MatchResult match_detections(const std::vector<BoundingBox>& preds,
                             const std::vector<BoundingBox>& gts, double iou_threshold = 0.5);

/// Precision and recall are 0 when their denominators are 0. Empty
/// predictions and empty ground truth scores 1 across the board.
DetectionMetrics evaluate(const std::vector<BoundingBox>& preds,
                          const std::vector<BoundingBox>& gts, double iou_threshold = 0.5);

/// One image worth of predictions and ground truth.
struct EvalImage {
  std::vector<BoundingBox> preds;
  std::vector<BoundingBox> gts;
};

/// Matching per image, counts summed, AP from the pooled ranking.
DetectionMetrics evaluate(const std::vector<EvalImage>& images, double iou_threshold = 0.5);

/// All-point interpolated area under the precision-recall curve of a ranked
/// list of hit flags (highest confidence first).
double average_precision(const std::vector<bool>& ranked_hits, int total_gt);

double f1_score(double precision, double recall);

double estimate_zone_depth(const Frame& frame, int zone_id, double stack_depth_offset);

const BoundingBox& select_pick_target(const std::vector<BoundingBox>& detections);

Pose3 pixel_to_robot(double px, double py, double depth, const CameraModel& camera);

/// Inverse of pixel_to_robot. Throws NonPositiveDepth for points behind the
/// camera.
Eigen::Vector2d project(const Pose3& point, const CameraModel& camera);

/// Box file line: `<frame_id> <class> <confidence> <x_min> <y_min> <x_max> <y_max>`.
struct LabeledBox {
  std::string frame_id;
  int class_id = 0;
  BoundingBox box;
};

std::vector<LabeledBox> parse_box_file(std::istream& in);
std::vector<LabeledBox> load_box_file(const std::string& path);

/// Groups predictions and ground truth by frame id.
std::vector<EvalImage> pair_by_frame(const std::vector<LabeledBox>& preds,
                                     const std::vector<LabeledBox>& gts);

}  // namespace bagcell
