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
#include <cmath>
#include <numeric>
#include <sstream>

#include "bagcell/errors.hpp"
#include "bagcell/vision.hpp"

namespace bagcell {
namespace {

BoundingBox box(double x0, double y0, double x1, double y1, double c = 1.0) {
  return {x0, y0, x1, y1, c};
}

// Grid of non-overlapping 40x40 boxes, `n` of them.
std::vector<BoundingBox> grid_boxes(int first, int n) {
  std::vector<BoundingBox> out;
  for (int i = first; i < first + n; ++i) {
    const double x = (i % 48) * 40.0;
    const double y = (i / 48) * 40.0;
    out.push_back(box(x + 2, y + 2, x + 38, y + 38, 0.9));
  }
  return out;
}

// Counts integer pixels covered by both / either box.
double pixel_iou(const BoundingBox& a, const BoundingBox& b) {
  int inter = 0;
  int uni = 0;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      const bool ia = px > a.x_min && px < a.x_max && py > a.y_min && py < a.y_max;
      const bool ib = px > b.x_min && px < b.x_max && py > b.y_min && py < b.y_max;
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

TEST(Iou, HalfOverlap) {
  EXPECT_NEAR(iou(box(0, 0, 10, 10), box(5, 0, 15, 10)), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(iou(box(0, 0, 10, 10), box(20, 20, 30, 30)), 0.0);
  EXPECT_EQ(iou(box(0, 0, 10, 10), box(0, 0, 10, 10)), 1.0);
}

TEST(Iou, MatchesPixelCount) {
  Rng rng(7);
  std::uniform_int_distribution<int> coord(0, 39);
  for (int i = 0; i < 200; ++i) {
    auto make = [&] {
      int a = coord(rng), b = coord(rng), c = coord(rng), d = coord(rng);
      if (a == b) b = a + 1;
      if (c == d) d = c + 1;
      return box(std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d));
    };
    const auto p = make();
    const auto q = make();
    EXPECT_NEAR(iou(p, q), pixel_iou(p, q), 1e-12);
  }
}

TEST(Match, PrefersHigherIou) {
  const std::vector<BoundingBox> preds{box(0, 0, 100, 100, 0.9)};
  const std::vector<BoundingBox> gts{box(0, 0, 100, 60), box(0, 0, 100, 90)};
  const auto m = match_detections(preds, gts);
  ASSERT_EQ(m.matches.size(), 1u);
  EXPECT_EQ(m.matches[0].gt, 1);
  EXPECT_NEAR(m.matches[0].iou, 0.9, 1e-12);
  EXPECT_EQ(m.counts, (ConfusionCounts{1, 0, 1}));
}

TEST(Match, BelowThresholdIsNotAMatch) {
  const auto m = match_detections({box(0, 0, 10, 10)}, {box(5, 0, 15, 10)});
  EXPECT_EQ(m.counts, (ConfusionCounts{0, 1, 1}));
}

// Maximum number of pairs with IoU >= threshold, by trying every assignment.
int best_matching(const std::vector<BoundingBox>& preds, const std::vector<BoundingBox>& gts,
                  std::size_t p, std::vector<bool>& used) {
  if (p == preds.size()) return 0;
  int best = best_matching(preds, gts, p + 1, used);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (used[g] || iou(preds[p], gts[g]) < 0.5) continue;
    used[g] = true;
    best = std::max(best, 1 + best_matching(preds, gts, p + 1, used));
    used[g] = false;
  }
  return best;
}

TEST(Match, AgreesWithExhaustiveSearch) {
  Rng rng(11);
  std::uniform_real_distribution<double> pos(0.0, 60.0);
  std::uniform_real_distribution<double> size(10.0, 30.0);
  std::uniform_int_distribution<int> count(0, 5);
  int agree = 0;
  int differ = 0;
  for (int i = 0; i < 500; ++i) {
    auto make = [&](int n) {
      std::vector<BoundingBox> v;
      for (int k = 0; k < n; ++k) {
        const double x = pos(rng), y = pos(rng);
        v.push_back(box(x, y, x + size(rng), y + size(rng), pos(rng) / 60.0));
      }
      return v;
    };
    const auto preds = make(count(rng));
    const auto gts = make(count(rng));
    const auto m = match_detections(preds, gts);
    EXPECT_EQ(m.counts.tp + m.counts.fp, static_cast<int>(preds.size()));
    EXPECT_EQ(m.counts.tp + m.counts.fn, static_cast<int>(gts.size()));
    std::vector<bool> used(gts.size(), false);
    const int best = best_matching(preds, gts, 0, used);
    EXPECT_LE(m.counts.tp, best);
    if (m.counts.tp == best) {
      ++agree;
    } else {
      ++differ;
    }
  }
  if (differ > 0) std::cout << "greedy below optimum on " << differ << " of 500 instances\n";
  EXPECT_GT(agree, 0);
}

TEST(Evaluate, SevenOfEight) {
  const auto gts = grid_boxes(0, 8);
  const std::vector<BoundingBox> preds(gts.begin(), gts.begin() + 7);
  const auto m = evaluate(preds, gts);
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.875);
  EXPECT_NEAR(m.f1, 0.9333, 1e-4);
  EXPECT_DOUBLE_EQ(m.ap50, 0.875);
}

TEST(Evaluate, IdenticalSetsScoreOne) {
  const auto gts = grid_boxes(0, 20);
  const auto m = evaluate(gts, gts);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.ap50, 1.0);
}

TEST(Evaluate, EmptyGroundTruth) {
  EXPECT_THROW(evaluate(grid_boxes(0, 1), {}), EmptyGroundTruth);
  const auto m = evaluate(std::vector<BoundingBox>{}, std::vector<BoundingBox>{});
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Evaluate, MissesOnlyGiveZero) {
  const auto m = evaluate({}, grid_boxes(0, 3));
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
}

TEST(Evaluate, PooledImages) {
  std::vector<EvalImage> images{{grid_boxes(0, 2), grid_boxes(0, 2)}, {{}, grid_boxes(0, 2)}};
  const auto m = evaluate(images);
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.5);
}

TEST(Metrics, AveragePrecision) {
  EXPECT_DOUBLE_EQ(average_precision({true, true, true}, 3), 1.0);
  EXPECT_NEAR(average_precision({true, false, true}, 2), 0.5 + 0.5 * 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(average_precision({false, false}, 2), 0.0);
}

TEST(Metrics, F1) {
  EXPECT_NEAR(f1_score(0.995, 0.987), 0.991, 5e-4);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Depth, FromQrMarker) {
  Frame f;
  f.qr_observations = {{1, 0.85}, {2, 0.90}};
  EXPECT_DOUBLE_EQ(estimate_zone_depth(f, 2, 0.0), 0.90);
  EXPECT_DOUBLE_EQ(estimate_zone_depth(f, 1, 0.05), 0.90);
  EXPECT_THROW(estimate_zone_depth(f, 3, 0.0), QRNotVisible);
}

TEST(PickTarget, LeftmostThenTopmost) {
  const std::vector<BoundingBox> d{box(100, 50, 120, 70), box(10, 80, 30, 100), box(10, 5, 30, 25)};
  EXPECT_EQ(select_pick_target(d), d[2]);
  EXPECT_THROW(select_pick_target({}), NoDetections);
}

TEST(Camera, PixelToRobot) {
  const CameraModel cam(1000, 1000, 960, 540);
  const Pose3 p = pixel_to_robot(1160, 540, 1.0, cam);
  EXPECT_NEAR(p.x, 0.2, 1e-12);
  EXPECT_NEAR(p.y, 0.0, 1e-12);
  EXPECT_NEAR(p.z, 1.0, 1e-12);
  EXPECT_THROW(pixel_to_robot(960, 540, 0.0, cam), NonPositiveDepth);
  EXPECT_THROW(pixel_to_robot(960, 540, -1.0, cam), NonPositiveDepth);
}

TEST(Camera, RoundTripThroughExtrinsic) {
  const CameraModel cam = CameraModel::from_config(CameraConfig{});
  for (double px : {100.0, 960.0, 1800.0}) {
    for (double py : {50.0, 540.0, 1000.0}) {
      const Pose3 p = pixel_to_robot(px, py, 1.1, cam);
      const auto back = project(p, cam);
      EXPECT_NEAR(back.x(), px, 1e-9);
      EXPECT_NEAR(back.y(), py, 1e-9);
    }
  }
  EXPECT_THROW(project({0.55, 0.0, 2.0, 0.0}, cam), NonPositiveDepth);
}

TEST(Camera, RejectsBadIntrinsics) {
  EXPECT_THROW(CameraModel(0.0, 1000, 960, 540), InvalidCamera);
  Eigen::Matrix4d skew = Eigen::Matrix4d::Identity();
  skew(0, 1) = 0.5;
  EXPECT_THROW(CameraModel(1000, 1000, 960, 540, skew), InvalidCamera);
}

TEST(Observe, FaultFreeMatchesGroundTruth) {
  const World w = build_world(CellConfig{});
  const CameraModel cam = CameraModel::from_config(CameraConfig{});
  Rng rng(3);
  const Frame f = observe(w, 1, cam, FaultProfile{}, rng);
  EXPECT_EQ(f.zone_in_view, 1);
  ASSERT_EQ(f.ground_truth.size(), 4u);
  ASSERT_EQ(f.detections.size(), 4u);
  std::vector<BoundingBox> gts;
  for (const auto& g : f.ground_truth) {
    validate_box(g.box);
    gts.push_back(g.box);
  }
  const auto m = evaluate(f.detections, gts);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_FALSE(f.qr_observations.empty());
}

TEST(Observe, CertainMissDetectsNothing) {
  const World w = build_world(CellConfig{});
  const CameraModel cam = CameraModel::from_config(CameraConfig{});
  FaultProfile fp;
  fp.detection_miss_prob = 1.0;
  Rng rng(3);
  EXPECT_TRUE(observe(w, 4, cam, fp, rng).detections.empty());
}

TEST(Observe, MissRateConverges) {
  const World w = build_world(CellConfig{});
  const CameraModel cam = CameraModel::from_config(CameraConfig{});
  FaultProfile fp;
  fp.detection_miss_prob = 0.125;
  Rng rng(5);
  int shown = 0;
  int found = 0;
  for (int i = 0; i < 2000; ++i) {
    const Frame f = observe(w, 4, cam, fp, rng);
    shown += static_cast<int>(f.ground_truth.size());
    found += static_cast<int>(f.detections.size());
  }
  EXPECT_NEAR(1.0 - static_cast<double>(found) / shown, 0.125, 0.01);
}

TEST(Observe, SameSeedSameFrame) {
  const World w = build_world(CellConfig{});
  const CameraModel cam = CameraModel::from_config(CameraConfig{});
  FaultProfile fp;
  fp.detection_jitter_sigma_px = 2.0;
  fp.detection_miss_prob = 0.2;
  Rng a(9), b(9);
  EXPECT_EQ(observe(w, 2, cam, fp, a).detections, observe(w, 2, cam, fp, b).detections);
}

TEST(BoxFile, ParsesAndPairs) {
  std::istringstream in(
      "# frame class conf x0 y0 x1 y1\n"
      "f1 0 0.9 0 0 10 10\n"
      "\n"
      "f2 0 0.8 5 5 20 20  # trailing comment\n");
  const auto boxes = parse_box_file(in);
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[1].frame_id, "f2");
  EXPECT_EQ(boxes[1].box, box(5, 5, 20, 20, 0.8));
  const auto images = pair_by_frame(boxes, boxes);
  ASSERT_EQ(images.size(), 2u);
  EXPECT_EQ(evaluate(images).f1, 1.0);
}

TEST(BoxFile, Malformed) {
  for (const char* text : {"f1 0 0.9 0 0 10\n", "f1 0 0.9 0 0 10 10 extra\n", "f1 0 1.5 0 0 10 10\n",
                           "f1 0 0.9 10 0 10 10\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_box_file(in), MalformedBoxFile) << text;
  }
  EXPECT_THROW(load_box_file("/nonexistent/boxes.txt"), Error);
}

}  // namespace
}  // namespace bagcell
