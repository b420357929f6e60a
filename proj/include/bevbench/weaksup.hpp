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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevbench/geom.hpp"
#include "bevbench/grid.hpp"
#include "bevbench/lanes.hpp"

namespace bevbench {

// Per-point semantic class coming from image segmentation. The numeric values
// double as pixel values in semantic label images.
enum class PointClass : std::uint8_t {
  kBackground = 0,
  kRoad = 1,
  kSidewalk = 2,
  kCrosswalk = 3,
  kOtherRoad = 4,
  kVehicle = 5,
  kLaneMarker = 6,
  kUnlabeled = 255,
};

struct SegmentationImage {
  int width = 0;
  int height = 0;
  std::vector<PointClass> classes;

  PointClass at(int u, int v) const {
    return classes[static_cast<std::size_t>(v) * width + u];
  }
};

struct PaintedCloud {
  PointCloud cloud;
  std::vector<PointClass> labels;
  std::vector<std::uint32_t> source_frame;

  std::size_t size() const { return cloud.size(); }
};

// A painted cloud together with the pose taking its frame into the world.
struct PosedCloud {
  PaintedCloud painted;
  Pose world_from_frame;
};

// Labels each point with the segmentation class of the pixel it projects to;
// points behind the camera or out of frame get kUnlabeled. The returned cloud
// is in the camera frame.
PaintedCloud paint_cloud(const PointCloud& cloud, const SegmentationImage& seg,
                         const CameraIntrinsics& k, const Pose& cam_from_lidar,
                         std::uint32_t frame_index = 0);

// Road points at or above the remission threshold become lane markers.
void mark_lane_paint(PaintedCloud& painted, double min_remission);

// Registers all frames into `world_from_target`, drops height, and takes the
// per-cell majority of {Road, Sidewalk, Crosswalk, LaneMarker} points with
// ties broken LaneMarker > Crosswalk > Road > Sidewalk. LaneMarker cells are
// emitted as Road; lanes are painted later from the fitted boundaries.
LabelGrid accumulate_static(std::span<const PosedCloud> frames,
                            const Pose& world_from_target, const GridSpec& spec);

struct ObstacleFillParams {
  PointClass obstacle_class = PointClass::kVehicle;
  // A cell counts as a stationary obstacle when its obstacle points come from
  // at least this many distinct frames (clamped to the number of frames).
  int min_frames = 2;
};

// Free cells covered by stationary obstacle points are relabeled Road when
// Road holds the majority of their decided 4-neighbors. Applied as repeated
// simultaneous sweeps until nothing changes, so blobs fill from the outside in.
LabelGrid fill_stationary_obstacles(const LabelGrid& grid, std::span<const PosedCloud> frames,
                                    const Pose& world_from_target,
                                    const ObstacleFillParams& params = {});

// Same rule, with the obstacle cells given directly.
LabelGrid fill_obstacle_cells(const LabelGrid& grid, const Mask& obstacle_cells);

// DBSCAN over BEV positions. Clusters are returned in discovery order; noise
// is dropped.
std::vector<std::vector<Vec2>> cluster_boundaries(std::span<const Vec2> points, double eps,
                                                  int min_pts);

struct FitParams {
  double min_span = 4.0;
  std::size_t min_points = 4;
  double ridge = 1e-8;
};

LaneBoundary fit_boundary(std::span<const Vec2> cluster, const FitParams& params = {});

// Joins clusters that are pieces of one line cut by an occlusion gap. Two
// clusters are joined when they do not overlap in forward range, one fit
// continued into the other's near end lands within `tolerance` of it, and
// the joint fit stays below `tolerance / 2` RMS. Clusters that cannot be
// fitted are passed through. Output order follows the first member.
std::vector<std::vector<Vec2>> link_fragments(std::vector<std::vector<Vec2>> clusters,
                                              const FitParams& params, double tolerance);

struct RoadBounds {
  Polyline left;
  Polyline right;
};

// Per-row extreme drivable cells (Road, Crosswalk, Lane), smoothed by a
// moving median over `window` rows. Throws kNoRoad on an empty road.
RoadBounds road_boundary(const LabelGrid& grid, int window = 5);

struct AssemblyParams {
  double z_ref = 5.0;
  // Road edges closer than this to the outermost marker curve are dropped,
  // and curves closer than half of it to each other are merged.
  double min_lane_width = 2.5;
};

// Orders curves (and road edges) by lateral offset at z_ref and turns each
// adjacent pair into a lane. The pair straddling lateral 0 is the ego lane
// (id 1, side 0); the rest get ids 2.. by |side| then left before right.
std::vector<LaneInstance> assemble_lanes(std::span<const LaneBoundary> boundaries,
                                         const RoadBounds* road, const GridSpec& spec,
                                         const AssemblyParams& params = {});

// Lane id of `side` among the lanes min_side..max_side (an interval holding
// 0). The ego lane is 1; the others are numbered 2.. by |side|, left first,
// so ids stay contiguous when the lanes are lopsided around the ego lane.
std::uint16_t lane_id_for_side(int side, int min_side, int max_side);

struct WeakSupConfig {
  GridSpec grid;
  double eps = 0.5;
  int min_pts = 8;
  FitParams fit;
  AssemblyParams assembly;
  double marker_remission = 0.7;
  double link_tolerance = 1.0;
  ObstacleFillParams obstacles;
  // Frames whose worst fit residual exceeds this are flagged for review.
  double review_residual = 0.5;
};

struct FrameInput {
  PointCloud cloud;
  std::optional<SegmentationImage> segmentation;
  // Alternative to segmentation: one class per point, already painted.
  std::optional<std::vector<PointClass>> point_labels;
};

struct SequenceInput {
  std::vector<FrameInput> frames;
  // Camera frame at time i into the world frame.
  std::vector<Pose> world_from_camera;
  std::optional<CameraIntrinsics> intrinsics;
  Pose cam_from_lidar;
};

struct FrameLabels {
  bool ok = false;
  std::string error;
  std::optional<LabelGrid> grid;
  std::vector<LaneBoundary> boundaries;
  std::vector<LaneInstance> lanes;
  // Clusters rejected by fit_boundary (span too short and the like).
  int rejected_clusters = 0;
  bool needs_review = false;
};

// Painted point set for one frame, in its camera frame.
PaintedCloud paint_frame(const SequenceInput& seq, std::size_t frame, const WeakSupConfig& cfg);

// Full pipeline per frame. A failing frame is reported in its FrameLabels and
// does not stop the others. Output is independent of `jobs`.
std::vector<FrameLabels> generate_labels(const SequenceInput& seq, const WeakSupConfig& cfg,
                                         int jobs = 1);

// The same pipeline for one target frame given already painted frames.
FrameLabels label_frame(std::span<const PosedCloud> frames, std::size_t target,
                        const WeakSupConfig& cfg);

}  // namespace bevbench
