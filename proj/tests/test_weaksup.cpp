// Copyright 2026 The bevbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "bevbench/error.hpp"
#include "bevbench/synth.hpp"
#include "bevbench/weaksup.hpp"

namespace bevbench {
namespace {

PosedCloud posed(std::vector<std::pair<Eigen::Vector3d, PointClass>> pts, Pose pose = {}) {
  PosedCloud p;
  p.world_from_frame = pose;
  p.painted.cloud.frame = CloudFrame::kCamera;
  for (const auto& [x, cls] : pts) {
    p.painted.cloud.points.push_back({x, 0.2});
    p.painted.labels.push_back(cls);
    p.painted.source_frame.push_back(0);
  }
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIoError;
}

TEST(Paint, ProjectionRules) {
  CameraIntrinsics k{100.0, 100.0, 2.0, 1.0, 5, 3};
  SegmentationImage seg{5, 3, std::vector<PointClass>(15, PointClass::kSidewalk)};
  seg.classes[1 * 5 + 2] = PointClass::kRoad;
  PointCloud c;
  c.points.push_back({{0, 0, 5}, 0.1});    // principal ray
  c.points.push_back({{0, 0, -5}, 0.1});   // behind
  c.points.push_back({{50, 0, 5}, 0.1});   // out of frame
  const PaintedCloud p = paint_cloud(c, seg, k, Pose{});
  ASSERT_EQ(p.labels.size(), 3u);
  EXPECT_EQ(p.labels[0], PointClass::kRoad);
  EXPECT_EQ(p.labels[1], PointClass::kUnlabeled);
  EXPECT_EQ(p.labels[2], PointClass::kUnlabeled);
  EXPECT_TRUE(paint_cloud(PointCloud{}, seg, k, Pose{}).labels.empty());
  SegmentationImage small{2, 2, std::vector<PointClass>(4, PointClass::kRoad)};
  EXPECT_EQ(code_of([&] { paint_cloud(c, small, k, Pose{}); }), ErrorCode::kShapeMismatch);
}

TEST(Accumulate, SinglePointAndMajority) {
  const GridSpec s;
  const std::vector<PosedCloud> one{posed({{{0, 0, 5}, PointClass::kRoad}})};
  const LabelGrid g = accumulate_static(one, Pose{}, s);
  EXPECT_EQ(binary_mask(g, SemanticClass::kRoad).count(), 1u);
  EXPECT_EQ(g.class_at(*cell_of({0, 5}, s)), SemanticClass::kRoad);

  // Two frames voting Road vs Sidewalk 3:1 in one cell.
  const std::vector<PosedCloud> two{
      posed({{{0.01, 0, 5.01}, PointClass::kRoad}, {{0.02, 0, 5.02}, PointClass::kSidewalk}}),
      posed({{{0.03, 0, 5.03}, PointClass::kRoad}, {{0.04, 0, 5.04}, PointClass::kRoad}})};
  EXPECT_EQ(accumulate_static(two, Pose{}, s).class_at(*cell_of({0, 5}, s)), SemanticClass::kRoad);

  const std::vector<PosedCloud> none{posed({{{0, 0, 5}, PointClass::kUnlabeled}})};
  EXPECT_EQ(binary_mask(accumulate_static(none, Pose{}, s), SemanticClass::kFree).count(), s.size());
  EXPECT_EQ(code_of([&] { accumulate_static({}, Pose{}, s); }), ErrorCode::kEmptyInput);
}

TEST(Accumulate, TieBreakAndFrameOrderInvariance) {
  const GridSpec s{32, 32, 0.5};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(-8, 8), z(0, 16);
  const PointClass pool[] = {PointClass::kRoad, PointClass::kSidewalk, PointClass::kCrosswalk,
                             PointClass::kLaneMarker, PointClass::kVehicle};
  std::vector<PosedCloud> frames;
  for (int f = 0; f < 4; ++f) {
    std::vector<std::pair<Eigen::Vector3d, PointClass>> pts;
    for (int i = 0; i < 400; ++i) pts.push_back({{x(rng), 0.0, z(rng)}, pool[rng() % 5]});
    frames.push_back(posed(pts, Pose::from_translation({0.1 * f, 0, 0.2 * f})));
  }
  const LabelGrid a = accumulate_static(frames, Pose{}, s);
  std::reverse(frames.begin(), frames.end());
  EXPECT_EQ(a, accumulate_static(frames, Pose{}, s));

  // One Road and one Sidewalk point: Road outranks Sidewalk on a tie.
  const std::vector<PosedCloud> tie{
      posed({{{0.01, 0, 3.01}, PointClass::kSidewalk}, {{0.02, 0, 3.02}, PointClass::kRoad}})};
  EXPECT_EQ(accumulate_static(tie, Pose{}, s).class_at(*cell_of({0, 3}, s)), SemanticClass::kRoad);
}

// Oracle for the fill rule: repeat simultaneous sweeps, relabeling a pending
// cell when Road holds a strict majority of its decided 4-neighbours.
LabelGrid fill_oracle(LabelGrid g, const Mask& obstacles) {
  const GridSpec& s = g.spec();
  std::vector<bool> pending(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    pending[i] = obstacles.bits[i] != 0 && g.classes()[i] == SemanticClass::kFree;
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::size_t> flip;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!pending[i]) continue;
      const Cell c = s.cell(i);
      int road = 0, decided = 0;
      const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const Cell n{c.row + dr[k], c.col + dc[k]};
        if (n.row < 0 || n.col < 0 || n.row >= s.rows || n.col >= s.cols) continue;
        if (pending[s.index(n)]) continue;
        ++decided;
        const auto cls = g.class_at(n);
        if (cls == SemanticClass::kRoad || cls == SemanticClass::kLane ||
            cls == SemanticClass::kCrosswalk) {
          ++road;
        }
      }
      if (road > 0 && 2 * road > decided) flip.push_back(i);
    }
    for (std::size_t i : flip) {
      g.set(s.cell(i), SemanticClass::kRoad);
      pending[i] = false;
      changed = true;
    }
  }
  return g;
}

TEST(ObstacleFill, HandCasesAndOracle) {
  const GridSpec s{20, 20, 1.0};
  LabelGrid g(s);
  for (int r = 5; r < 15; ++r) {
    for (int c = 5; c < 15; ++c) g.set({r, c}, SemanticClass::kRoad);
  }
  Mask none(s);
  EXPECT_EQ(fill_obstacle_cells(g, none), g);

  LabelGrid hole = g;
  hole.set({9, 9}, SemanticClass::kFree);
  Mask single(s);
  single.set(9, 9, true);
  EXPECT_EQ(fill_obstacle_cells(hole, single).class_at({9, 9}), SemanticClass::kRoad);

  LabelGrid blob = g;
  Mask three(s);
  for (Cell c : {Cell{8, 8}, Cell{8, 9}, Cell{9, 9}}) {
    blob.set(c, SemanticClass::kFree);
    three.set(c.row, c.col, true);
  }
  const LabelGrid filled = fill_obstacle_cells(blob, three);
  for (Cell c : {Cell{8, 8}, Cell{8, 9}, Cell{9, 9}}) {
    EXPECT_EQ(filled.class_at(c), SemanticClass::kRoad);
  }
  EXPECT_EQ(filled, fill_oracle(blob, three));

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    LabelGrid r(s);
    Mask obs(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto u = rng() % 10;
      if (u < 5) r.set(s.cell(i), SemanticClass::kRoad);
      else if (u < 6) r.set(s.cell(i), SemanticClass::kSidewalk);
      if (rng() % 4 == 0) obs.bits[i] = 1;
    }
    EXPECT_EQ(fill_obstacle_cells(r, obs), fill_oracle(r, obs)) << trial;
  }
}

TEST(ObstacleFill, StationaryPointsFromFrames) {
  const GridSpec s{20, 20, 1.0};
  LabelGrid g(s);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) g.set({r, c}, SemanticClass::kRoad);
  }
  const Cell hole = *cell_of({0.5, 10.5}, s);
  g.set(hole, SemanticClass::kFree);
  const Eigen::Vector3d car{0.5, 0.5, 10.5};
  const std::vector<PosedCloud> seen_once{posed({{car, PointClass::kVehicle}}),
                                          posed({{car, PointClass::kRoad}})};
  EXPECT_EQ(fill_stationary_obstacles(g, seen_once, Pose{}).class_at(hole), SemanticClass::kFree);
  const std::vector<PosedCloud> seen_twice{posed({{car, PointClass::kVehicle}}),
                                           posed({{car, PointClass::kVehicle}})};
  EXPECT_EQ(fill_stationary_obstacles(g, seen_twice, Pose{}).class_at(hole), SemanticClass::kRoad);
}

// Brute-force DBSCAN core-point components used as the reachability oracle.
std::vector<int> core_components(const std::vector<Vec2>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  auto near = [&](std::size_t i, std::size_t j) {
    const double dx = pts[i].lateral - pts[j].lateral, dz = pts[i].forward - pts[j].forward;
    return dx * dx + dz * dz <= eps * eps;
  };
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    int cnt = 0;
    for (std::size_t j = 0; j < n; ++j) cnt += near(i, j) ? 1 : 0;
    core[i] = cnt >= min_pts;
  }
  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || comp[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    comp[i] = next;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        if (core[b] && comp[b] < 0 && near(a, b)) {
          comp[b] = next;
          stack.push_back(b);
        }
      }
    }
    ++next;
  }
  return comp;
}

TEST(Dbscan, ParallelStripsAndTrivialCases) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 100; ++i) {
    pts.push_back({-1.75, 0.2 * i});
    pts.push_back({1.75, 0.2 * i});
  }
  const auto clusters = cluster_boundaries(pts, 0.5, 3);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].size(), 100u);
  EXPECT_EQ(clusters[1].size(), 100u);
  EXPECT_TRUE(cluster_boundaries(std::vector<Vec2>{{0, 0}}, 0.5, 8).empty());
  EXPECT_TRUE(cluster_boundaries({}, 0.5, 8).empty());
  EXPECT_EQ(code_of([&] { cluster_boundaries(pts, 0.0, 3); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(code_of([&] { cluster_boundaries(pts, 0.5, 0); }), ErrorCode::kInvalidParams);
}

TEST(Dbscan, CorePointsMatchOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng)});
    const double eps = 0.6;
    const int min_pts = 5;
    const auto comp = core_components(pts, eps, min_pts);
    const auto clusters = cluster_boundaries(pts, eps, min_pts);
    const int n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    ASSERT_EQ(static_cast<int>(clusters.size()), n_comp);
    // Every oracle component lies inside exactly one returned cluster.
    for (int k = 0; k < n_comp; ++k) {
      int owner = -1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (comp[i] != k) continue;
        int found = -1;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
          for (const auto& q : clusters[c]) {
            if (q.lateral == pts[i].lateral && q.forward == pts[i].forward) found = static_cast<int>(c);
          }
        }
        ASSERT_GE(found, 0);
        if (owner < 0) owner = found;
        EXPECT_EQ(owner, found);
      }
    }
  }
}

TEST(Fit, ExactPolynomials) {
  std::vector<Vec2> flat;
  for (int i = 0; i <= 40; ++i) flat.push_back({2.0, 0.5 * i});
  const LaneBoundary b = fit_boundary(flat);
  EXPECT_NEAR(b.coeffs[0], 2.0, 1e-9);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(b.coeffs[k], 0.0, 1e-9);
  EXPECT_NEAR(b.rms_residual, 0.0, 1e-9);

  std::vector<Vec2> bend;
  for (int i = 0; i <= 80; ++i) {
    const double z = 0.5 * i;
    bend.push_back({1.0 + 0.01 * z * z, z});
  }
  const LaneBoundary c = fit_boundary(bend);
  EXPECT_NEAR(c.coeffs[0], 1.0, 1e-6);
  EXPECT_NEAR(c.coeffs[1], 0.0, 1e-6);
  EXPECT_NEAR(c.coeffs[2], 0.01, 1e-6);
  EXPECT_NEAR(c.coeffs[3], 0.0, 1e-6);
  EXPECT_DOUBLE_EQ(c.z_lo, 0.0);
  EXPECT_DOUBLE_EQ(c.z_hi, 40.0);
}

TEST(Fit, ResidualZeroForRandomCubics) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> a(-2, 2), z(0, 40);
  for (int trial = 0; trial < 25; ++trial) {
    const double c0 = a(rng), c1 = a(rng) * 0.1, c2 = a(rng) * 0.01, c3 = a(rng) * 1e-4;
    std::vector<Vec2> pts;
    for (int i = 0; i < 60; ++i) {
      const double zz = z(rng);
      pts.push_back({c0 + zz * (c1 + zz * (c2 + zz * c3)), zz});
    }
    EXPECT_LT(fit_boundary(pts).rms_residual, 1e-9);
  }
}

TEST(Fit, Preconditions) {
  std::vector<Vec2> short_span;
  for (int i = 0; i <= 20; ++i) short_span.push_back({0.0, 0.1 * i});
  EXPECT_EQ(code_of([&] { fit_boundary(short_span); }), ErrorCode::kSpanTooShort);
  const std::vector<Vec2> three{{0, 0}, {0, 5}, {0, 10}};
  EXPECT_EQ(code_of([&] { fit_boundary(three); }), ErrorCode::kRankDeficient);
  // Only two distinct forward positions: the regularized path.
  std::vector<Vec2> two_z{{0, 0}, {0.1, 0}, {1, 10}, {1.1, 10}};
  const LaneBoundary r = fit_boundary(two_z);
  EXPECT_TRUE(r.regularized);
}

TEST(RoadBoundary, FullBandTrapezoidAndEmpty) {
  const GridSpec s{30, 30, 1.0};
  LabelGrid band(s);
  for (int r = 0; r < 30; ++r) {
    for (int c = 0; c < 30; ++c) band.set({r, c}, SemanticClass::kRoad);
  }
  const RoadBounds rb = road_boundary(band);
  for (const auto& p : rb.left.points) EXPECT_DOUBLE_EQ(p.lateral, cell_center({0, 0}, s).lateral);
  for (const auto& p : rb.right.points) EXPECT_DOUBLE_EQ(p.lateral, cell_center({0, 29}, s).lateral);

  // A trapezoid has monotone row extremes, which a centred median leaves
  // untouched, so the raw per-row scan is the exact expectation.
  LabelGrid trap(s);
  for (int r = 0; r < 30; ++r) {
    const int half = 2 + (29 - r) / 3;
    for (int c = 15 - half; c <= 14 + half; ++c) trap.set({r, c}, SemanticClass::kRoad);
  }
  const RoadBounds tb = road_boundary(trap);
  ASSERT_EQ(tb.left.points.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    const int row = 29 - static_cast<int>(i);
    int lo = -1, hi = -1;
    for (int c = 0; c < 30; ++c) {
      if (trap.class_at({row, c}) != SemanticClass::kRoad) continue;
      if (lo < 0) lo = c;
      hi = c;
    }
    EXPECT_DOUBLE_EQ(tb.left.points[i].lateral, cell_center({row, lo}, s).lateral);
    EXPECT_DOUBLE_EQ(tb.right.points[i].lateral, cell_center({row, hi}, s).lateral);
    EXPECT_DOUBLE_EQ(tb.left.points[i].forward, cell_center({row, 0}, s).forward);
  }
  EXPECT_EQ(code_of([&] { road_boundary(LabelGrid(s)); }), ErrorCode::kNoRoad);
}

LaneBoundary straight(double lateral) {
  LaneBoundary b;
  b.coeffs = {lateral, 0, 0, 0};
  b.z_lo = 0;
  b.z_hi = 40;
  return b;
}

TEST(Assemble, HandCases) {
  const GridSpec s;
  const std::vector<LaneBoundary> two{straight(-1.75), straight(1.75)};
  auto lanes = assemble_lanes(two, nullptr, s);
  ASSERT_EQ(lanes.size(), 1u);
  EXPECT_EQ(lanes[0].id, 1);
  EXPECT_EQ(lanes[0].side, 0);

  const std::vector<LaneBoundary> three{straight(-5.25), straight(-1.75), straight(1.75)};
  lanes = assemble_lanes(three, nullptr, s);
  ASSERT_EQ(lanes.size(), 2u);
  std::vector<int> sides{lanes[0].side, lanes[1].side};
  std::sort(sides.begin(), sides.end());
  EXPECT_EQ(sides, (std::vector<int>{-1, 0}));

  const std::vector<LaneBoundary> right_only{straight(1.0), straight(4.0)};
  EXPECT_EQ(code_of([&] { assemble_lanes(right_only, nullptr, s); }), ErrorCode::kNoEgoLane);
}

TEST(Assemble, SidesContiguousAndIdsDense) {
  const GridSpec s;
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 30; ++trial) {
    const int left = static_cast<int>(rng() % 4);
    const int right = static_cast<int>(rng() % 4);
    std::vector<LaneBoundary> bs;
    for (int k = -left; k <= right + 1; ++k) bs.push_back(straight(-1.75 + 3.5 * k));
    std::shuffle(bs.begin(), bs.end(), rng);
    const auto lanes = assemble_lanes(bs, nullptr, s);
    ASSERT_EQ(static_cast<int>(lanes.size()), left + right + 1);
    std::vector<int> sides, ids;
    for (const auto& l : lanes) {
      sides.push_back(l.side);
      ids.push_back(l.id);
    }
    std::sort(sides.begin(), sides.end());
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < sides.size(); ++i) {
      EXPECT_EQ(sides[i], -left + static_cast<int>(i));
      EXPECT_EQ(ids[i], static_cast<int>(i) + 1);
    }
    EXPECT_EQ(std::count(sides.begin(), sides.end(), 0), 1);
  }
}

TEST(LaneIds, RankOrder) {
  EXPECT_EQ(lane_id_for_side(0, -2, 2), 1);
  EXPECT_EQ(lane_id_for_side(-1, -2, 2), 2);
  EXPECT_EQ(lane_id_for_side(1, -2, 2), 3);
  EXPECT_EQ(lane_id_for_side(-2, -2, 2), 4);
  EXPECT_EQ(lane_id_for_side(2, -2, 2), 5);
  // Lopsided: sides 0..2 give ids 1..3.
  EXPECT_EQ(lane_id_for_side(1, 0, 2), 2);
  EXPECT_EQ(lane_id_for_side(2, 0, 2), 3);
  EXPECT_EQ(lane_id_for_side(2, -1, 2), 4);
}

TEST(LinkFragments, JoinsPiecesOfOneLineOnly) {
  std::vector<Vec2> near, far, other;
  auto line = [](double z) { return 1.0 + 0.01 * z * z; };
  for (double z = 0; z < 12; z += 0.25) near.push_back({line(z), z});
  for (double z = 25; z < 40; z += 0.25) far.push_back({line(z), z});
  for (double z = 0; z < 40; z += 0.25) other.push_back({line(z) + 3.5, z});
  const auto linked = link_fragments({near, other, far}, FitParams{}, 1.0);
  ASSERT_EQ(linked.size(), 2u);
  EXPECT_EQ(linked[0].size(), near.size() + far.size());
  EXPECT_EQ(linked[1].size(), other.size());
}

TEST(GenerateLabels, StraightThreeLaneScene) {
  SceneParams p;
  p.sequence_length = 3;
  p.seed = 5;
  const Scene scene = generate_scene(p);
  WeakSupConfig cfg;
  const auto labels = generate_labels(scene.as_sequence_input(), cfg, 2);
  ASSERT_EQ(labels.size(), 3u);
  for (std::size_t f = 0; f < labels.size(); ++f) {
    const auto& fl = labels[f];
    ASSERT_TRUE(fl.ok) << fl.error;
    EXPECT_NO_THROW(fl.grid->validate());
    ASSERT_EQ(fl.lanes.size(), 3u);
    const LabelGrid& gt = scene.frames[f].ground_truth;
    for (const auto& lane : fl.lanes) {
      // The weak lane mask agrees with the ground-truth lane of the same id
      // up to one cell of boundary placement per row.
      const Mask truth = gt.lane_id_mask(lane.id);
      int mismatched_rows = 0;
      for (int r = 0; r < gt.spec().rows; ++r) {
        int diff = 0;
        for (int c = 0; c < gt.spec().cols; ++c) diff += truth.at(r, c) != fl.grid->lane_id_mask(lane.id).at(r, c);
        if (diff > 2) ++mismatched_rows;
      }
      EXPECT_LE(mismatched_rows, 3) << "lane " << lane.id;
    }
    const std::vector<int> expected_side_of_id{0, 0, -1, 1};
    for (const auto& lane : fl.lanes) EXPECT_EQ(lane.side, expected_side_of_id[lane.id]);
  }
}

TEST(GenerateLabels, NoMarkersGivesRoadOnly) {
  SequenceInput seq;
  FrameInput fi;
  for (int i = 0; i < 400; ++i) {
    fi.cloud.points.push_back({{-2.0 + 0.01 * i, 1.65, 2.0 + 0.05 * i}, 0.2});
  }
  fi.point_labels = std::vector<PointClass>(fi.cloud.size(), PointClass::kRoad);
  seq.frames.push_back(fi);
  seq.world_from_camera.push_back(Pose{});
  const auto labels = generate_labels(seq, WeakSupConfig{});
  ASSERT_TRUE(labels[0].ok) << labels[0].error;
  EXPECT_TRUE(labels[0].lanes.empty());
  EXPECT_GT(binary_mask(*labels[0].grid, SemanticClass::kRoad).count(), 0u);
  EXPECT_EQ(binary_mask(*labels[0].grid, SemanticClass::kLane).count(), 0u);
}

TEST(GenerateLabels, EmptySequence) {
  EXPECT_EQ(code_of([] { generate_labels(SequenceInput{}, WeakSupConfig{}); }), ErrorCode::kEmptyInput);
}

}  // namespace
}  // namespace bevbench
