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

#include "bagcell/vision.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "bagcell/errors.hpp"

namespace bagcell {

namespace {

constexpr double kSpuriousBoxPx = 140.0;

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

BoundingBox clamp_to_frame(BoundingBox b, int width, int height) {
  b.x_min = std::clamp(b.x_min, 0.0, static_cast<double>(width));
  b.x_max = std::clamp(b.x_max, 0.0, static_cast<double>(width));
  b.y_min = std::clamp(b.y_min, 0.0, static_cast<double>(height));
  b.y_max = std::clamp(b.y_max, 0.0, static_cast<double>(height));
  return b;
}

bool degenerate(const BoundingBox& b) { return !(b.x_min < b.x_max && b.y_min < b.y_max); }

std::vector<int> by_confidence(const std::vector<BoundingBox>& boxes) {
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return boxes[a].confidence > boxes[b].confidence;
  });
  return order;
}

}  // namespace

void validate_box(const BoundingBox& b, int width, int height) {
  auto fail = [&](const std::string& why) { throw InvalidBox(why); };
  if (!std::isfinite(b.x_min) || !std::isfinite(b.y_min) || !std::isfinite(b.x_max) ||
      !std::isfinite(b.y_max)) {
    fail("non-finite coordinate");
  }
  if (degenerate(b)) fail("box must satisfy x_min < x_max and y_min < y_max");
  if (b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > width || b.y_max > height) {
    fail("box outside the " + std::to_string(width) + "x" + std::to_string(height) + " frame");
  }
  if (!(b.confidence >= 0.0 && b.confidence <= 1.0)) fail("confidence outside [0, 1]");
}

CameraModel::CameraModel(double fx, double fy, double cx, double cy,
                         const Eigen::Matrix4d& extrinsic, int width, int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), extrinsic_(extrinsic), width_(width), height_(height) {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidCamera("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidCamera("image size must be positive");
  if (!extrinsic.allFinite()) throw InvalidCamera("extrinsic has non-finite entries");
  const Eigen::Matrix3d r = extrinsic.topLeftCorner<3, 3>();
  const double ortho = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9) {
    throw InvalidCamera("extrinsic rotation is not orthonormal (error " + std::to_string(ortho) +
                        ")");
  }
  if (extrinsic.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) {
    throw InvalidCamera("extrinsic bottom row must be 0 0 0 1");
  }
  inverse_.setIdentity();
  inverse_.topLeftCorner<3, 3>() = r.transpose();
  inverse_.topRightCorner<3, 1>() = -r.transpose() * extrinsic.topRightCorner<3, 1>();
}

CameraModel CameraModel::from_config(const CameraConfig& c) {
  Eigen::Matrix4d ext;
  for (int i = 0; i < 16; ++i) ext(i / 4, i % 4) = c.extrinsic[i];
  return CameraModel(c.fx, c.fy, c.cx, c.cy, ext, c.width, c.height);
}

Eigen::Vector3d CameraModel::to_camera(const Eigen::Vector3d& p) const {
  return (inverse_ * p.homogeneous()).head<3>();
}

Frame observe(const World& world, int zone, const CameraModel& camera, const FaultProfile& fault,
              Rng& rng) {
  Frame frame;
  frame.timestamp = world.clock;
  frame.zone_in_view = zone;

  const double half = 0.5 * world.tote.stack_top_size_m;
  for (int id : world.remaining_in_zone(zone)) {
    const Pose3& top = world.stack(id).top;
    BoundingBox box{1e18, 1e18, -1e18, -1e18, 1.0};
    for (double dx : {-half, half}) {
      for (double dy : {-half, half}) {
        Eigen::Vector2d px = project({top.x + dx, top.y + dy, top.z, 0.0}, camera);
        box.x_min = std::min(box.x_min, px.x());
        box.x_max = std::max(box.x_max, px.x());
        box.y_min = std::min(box.y_min, px.y());
        box.y_max = std::max(box.y_max, px.y());
      }
    }
    box = clamp_to_frame(box, camera.width(), camera.height());
    if (!degenerate(box)) frame.ground_truth.push_back({id, box});
  }

  for (const auto& gt : frame.ground_truth) {
    const bool missed = bernoulli(rng, fault.detection_miss_prob);
    const double jx = gaussian(rng, fault.detection_jitter_sigma_px);
    const double jy = gaussian(rng, fault.detection_jitter_sigma_px);
    const double conf = uniform(rng, fault.confidence_min, fault.confidence_max);
    if (missed) continue;
    BoundingBox det = gt.box;
    det.x_min += jx;
    det.x_max += jx;
    det.y_min += jy;
    det.y_max += jy;
    det.confidence = conf;
    det = clamp_to_frame(det, camera.width(), camera.height());
    if (!degenerate(det)) frame.detections.push_back(det);
  }

  const bool spurious = bernoulli(rng, fault.spurious_box_prob);
  const double sx = uniform(rng, 0.0, camera.width() - kSpuriousBoxPx);
  const double sy = uniform(rng, 0.0, camera.height() - kSpuriousBoxPx);
  const double sconf = uniform(rng, fault.confidence_min, fault.confidence_max);
  if (spurious) {
    frame.detections.push_back({sx, sy, sx + kSpuriousBoxPx, sy + kSpuriousBoxPx, sconf});
  }

  for (const QRAnchor& qr : world.tote.qr_anchors) {
    const Eigen::Vector3d c = camera.to_camera({qr.pose.x, qr.pose.y, qr.pose.z});
    if (c.z() > 0.0) frame.qr_observations.push_back({qr.zone_id, c.z()});
  }
  return frame;
}

Frame observe(const World& world, const CameraModel& camera, const FaultProfile& fault, Rng& rng) {
  return observe(world, world.active_zone().value_or(kZoneCount), camera, fault, rng);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

MatchResult match_detections(const std::vector<BoundingBox>& preds,
                             const std::vector<BoundingBox>& gts, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw OutOfDomain("IoU threshold must be in (0, 1]");
  }
  MatchResult result;
  std::vector<bool> taken(gts.size(), false);
  for (int p : by_confidence(preds)) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(preds[p], gts[g]);
      if (v >= iou_threshold && v > best_iou) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      result.matches.push_back({p, best, best_iou});
    }
  }
  result.counts.tp = static_cast<int>(result.matches.size());
  result.counts.fp = static_cast<int>(preds.size()) - result.counts.tp;
  result.counts.fn = static_cast<int>(gts.size()) - result.counts.tp;
  return result;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

double average_precision(const std::vector<bool>& ranked_hits, int total_gt) {
  if (total_gt <= 0) return 0.0;
  const std::size_t n = ranked_hits.size();
  // Sentinel points at recall 0 and 1.
  std::vector<double> rec(n + 2, 0.0), prec(n + 2, 0.0);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (ranked_hits[k]) ++tp;
    rec[k + 1] = static_cast<double>(tp) / total_gt;
    prec[k + 1] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  rec[n + 1] = 1.0;
  for (std::size_t k = n + 1; k-- > 0;) prec[k] = std::max(prec[k], prec[k + 1]);
  double ap = 0.0;
  for (std::size_t k = 1; k < n + 2; ++k) ap += (rec[k] - rec[k - 1]) * prec[k];
  return ap;
}

DetectionMetrics evaluate(const std::vector<EvalImage>& images, double iou_threshold) {
  ConfusionCounts total;
  int total_gt = 0;
  std::size_t total_pred = 0;
  struct Ranked {
    double confidence;
    bool hit;
  };
  std::vector<Ranked> ranked;
  for (const auto& img : images) {
    MatchResult m = match_detections(img.preds, img.gts, iou_threshold);
    total.tp += m.counts.tp;
    total.fp += m.counts.fp;
    total.fn += m.counts.fn;
    total_gt += static_cast<int>(img.gts.size());
    total_pred += img.preds.size();
    std::vector<bool> hit(img.preds.size(), false);
    for (const auto& mm : m.matches) hit[mm.pred] = true;
    for (int p : by_confidence(img.preds)) ranked.push_back({img.preds[p].confidence, hit[p]});
  }
  if (total_gt == 0) {
    if (total_pred > 0) throw EmptyGroundTruth();
    return {1.0, 1.0, 1.0, 1.0};
  }

  DetectionMetrics m;
  m.precision = total.tp + total.fp > 0 ? static_cast<double>(total.tp) / (total.tp + total.fp)
                                        : 0.0;
  m.recall = static_cast<double>(total.tp) / (total.tp + total.fn);
  m.f1 = f1_score(m.precision, m.recall);

  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.confidence > b.confidence; });
  std::vector<bool> hits;
  hits.reserve(ranked.size());
  for (const auto& r : ranked) hits.push_back(r.hit);
  m.ap50 = average_precision(hits, total_gt);
  return m;
}

DetectionMetrics evaluate(const std::vector<BoundingBox>& preds,
                          const std::vector<BoundingBox>& gts, double iou_threshold) {
  return evaluate(std::vector<EvalImage>{{preds, gts}}, iou_threshold);
}

double estimate_zone_depth(const Frame& frame, int zone_id, double stack_depth_offset) {
  for (const auto& qr : frame.qr_observations) {
    if (qr.zone_id == zone_id) return qr.measured_depth + stack_depth_offset;
  }
  throw QRNotVisible(zone_id);
}

const BoundingBox& select_pick_target(const std::vector<BoundingBox>& detections) {
  if (detections.empty()) throw NoDetections();
  const BoundingBox* best = &detections.front();
  for (const auto& d : detections) {
    if (d.center_x() < best->center_x() ||
        (d.center_x() == best->center_x() && d.center_y() < best->center_y())) {
      best = &d;
    }
  }
  return *best;
}

Pose3 pixel_to_robot(double px, double py, double depth, const CameraModel& camera) {
  if (!(depth > 0.0)) throw NonPositiveDepth(depth);
  const Eigen::Vector4d cam((px - camera.cx()) * depth / camera.fx(),
                            (py - camera.cy()) * depth / camera.fy(), depth, 1.0);
  const Eigen::Vector4d base = camera.extrinsic() * cam;
  return {base.x(), base.y(), base.z(), 0.0};
}

Eigen::Vector2d project(const Pose3& point, const CameraModel& camera) {
  const Eigen::Vector3d c = camera.to_camera({point.x, point.y, point.z});
  if (!(c.z() > 0.0)) throw NonPositiveDepth(c.z());
  return {camera.fx() * c.x() / c.z() + camera.cx(), camera.fy() * c.y() / c.z() + camera.cy()};
}

std::vector<LabeledBox> parse_box_file(std::istream& in) {
  std::vector<LabeledBox> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    LabeledBox lb;
    if (!(ls >> lb.frame_id)) continue;
    auto& b = lb.box;
    if (!(ls >> lb.class_id >> b.confidence >> b.x_min >> b.y_min >> b.x_max >> b.y_max)) {
      throw MalformedBoxFile(line_no, "expected: frame_id class confidence x_min y_min x_max y_max");
    }
    std::string extra;
    if (ls >> extra) throw MalformedBoxFile(line_no, "trailing field '" + extra + "'");
    if (degenerate(b)) throw MalformedBoxFile(line_no, "degenerate box");
    if (!(b.confidence >= 0.0 && b.confidence <= 1.0)) {
      throw MalformedBoxFile(line_no, "confidence outside [0, 1]");
    }
    out.push_back(std::move(lb));
  }
  return out;
}

std::vector<LabeledBox> load_box_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("box_file", "cannot open '" + path + "'");
  return parse_box_file(in);
}

std::vector<EvalImage> pair_by_frame(const std::vector<LabeledBox>& preds,
                                     const std::vector<LabeledBox>& gts) {
  std::map<std::string, EvalImage> by_frame;
  for (const auto& p : preds) by_frame[p.frame_id].preds.push_back(p.box);
  for (const auto& g : gts) by_frame[g.frame_id].gts.push_back(g.box);
  std::vector<EvalImage> out;
  out.reserve(by_frame.size());
  for (auto& [id, img] : by_frame) out.push_back(std::move(img));
  return out;
}

}  // namespace bagcell
