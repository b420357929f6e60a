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

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

namespace bevbench {

// Rigid transform taking points from a source frame into a target frame:
// p' = rotation * p + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }
  static Pose from_translation(const Eigen::Vector3d& t) {
    Pose p;
    p.translation = t;
    return p;
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  Pose inverse() const;

  // (a * b).apply(p) == a.apply(b.apply(p))
  friend Pose operator*(const Pose& a, const Pose& b);

  bool is_rigid(double tol = 1e-6) const;
  // Throws kInvalidPose unless rotation is orthonormal with det +1 (within tol).
  void validate(double tol = 1e-6) const;
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

enum class CloudFrame : std::uint8_t { kSensor, kCamera, kWorld };

// Camera convention: x right, y down, z forward (meters).
struct CloudPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double remission = 0.0;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  CloudFrame frame = CloudFrame::kSensor;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  // Throws kNonFiniteValue / kInvalidSpec on bad coordinates or remission.
  void validate() const;
};

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose,
                           CloudFrame result_frame = CloudFrame::kWorld);

// Pixel coordinates of a camera-frame point, or nothing when it is behind the
// camera or falls outside [0,width) x [0,height).
std::optional<Eigen::Vector2d> project_pinhole(const Eigen::Vector3d& point,
                                               const CameraIntrinsics& k);

// Per-pixel metric depth; values <= 0 (or non-finite) mark invalid pixels.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  float at(int u, int v) const {
    return depth[static_cast<std::size_t>(v) * width + u];
  }
};

// Interleaved RGB, channel values in [0, max_value].
struct ColorImage {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<std::uint16_t> rgb;
};

// One point per valid pixel, in the camera frame. Remission is the mean RGB
// intensity normalized by the format maximum, or 1.0 without color.
PointCloud backproject_depth(const DepthMap& depth, const CameraIntrinsics& k,
                             const ColorImage* rgb = nullptr);

}  // namespace bevbench
