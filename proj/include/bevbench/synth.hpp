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

#include <array>
#include <cstdint>
#include <vector>

#include "bevbench/geom.hpp"
#include "bevbench/grid.hpp"
#include "bevbench/lanes.hpp"
#include "bevbench/weaksup.hpp"

namespace bevbench {

// Oriented rectangle on the ground plane. yaw rotates the heading from the
// forward axis toward the lateral axis.
struct VehicleBox {
  double lateral = 0.0;
  double forward = 0.0;
  double length = 4.5;
  double width = 1.8;
  double yaw = 0.0;

  std::array<Vec2, 4> corners() const;
};

// World axes match the camera axes. The ego-lane centerline follows
// lateral = shape(z) and every lane line is that curve shifted sideways.
// The camera of frame f sits on the centerline at (shape(z_f), 0, z_f), and
// vehicle boxes are given in world coordinates.
struct SceneParams {
  int lane_count = 3;
  std::vector<double> lane_widths{3.5, 3.5, 3.5};
  // Index of the ego lane counted from the left, 0 based.
  int ego_lane = 1;
  std::array<double, 4> shape{0.0, 0.0, 0.0, 0.0};
  double road_margin = 0.5;
  double sidewalk_width = 2.0;
  double marker_width = 0.15;
  std::vector<VehicleBox> vehicles;
  int sequence_length = 5;
  double ego_speed = 1.0;
  std::uint64_t seed = 0;

  double point_density = 50.0;
  double sensor_range = 45.0;
  double point_noise = 0.0;
  double camera_height = 1.65;
  double road_remission = 0.2;
  double marker_remission = 0.9;
  double sidewalk_remission = 0.35;

  GridSpec grid;

  void validate() const;
};

struct SceneFrame {
  LabelGrid ground_truth;
  PointCloud cloud;  // camera frame
  std::vector<PointClass> point_labels;
  Pose world_from_camera;
};

struct Scene {
  SceneParams params;
  std::vector<SceneFrame> frames;

  // Lane-line offsets from the ego centerline, left to right.
  std::vector<double> line_offsets;

  // Exact lane line k in frame f, as lateral = cubic(z) in that frame.
  LaneBoundary true_line(std::size_t frame, std::size_t line) const;
  SequenceInput as_sequence_input() const;
};

double shape_at(const std::array<double, 4>& c, double z);

// Lane-line offsets (lane_count + 1 values) relative to the ego centerline.
std::vector<double> lane_line_offsets(const SceneParams& params);

Scene generate_scene(const SceneParams& params);

// True when the segment from the sensor (origin) to p passes through the box
// before reaching p.
bool ray_blocked(Vec2 p, const VehicleBox& box);

Mask occlusion_mask(const GridSpec& spec, const std::vector<VehicleBox>& boxes_in_frame);

struct SimulatedPrediction {
  ConfidenceGrid confidence;
  std::vector<std::uint16_t> lane_ids;
};

// One-hot ground truth blended with random class noise, plus label flips with
// probability noise_level / 2. The class-argmax of the result carries no
// information about the input at noise_level 1.
SimulatedPrediction simulate_prediction(const LabelGrid& gt, double noise_level,
                                        std::uint64_t seed);

}  // namespace bevbench
