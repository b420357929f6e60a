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

#include "bevbench/geom.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

#include "bevbench/error.hpp"

namespace bevbench {

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

bool Pose::is_rigid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

void Pose::validate(double tol) const {
  if (!is_rigid(tol)) {
    throw Error(ErrorCode::kInvalidPose, "rotation is not orthonormal with det +1");
  }
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0 || !(cx >= 0.0) ||
      !(cx < width) || !(cy >= 0.0) || !(cy < height)) {
    throw Error(ErrorCode::kInvalidSpec, "invalid camera intrinsics");
  }
}

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!p.position.allFinite() || !std::isfinite(p.remission)) {
      throw Error(ErrorCode::kNonFiniteValue, "point " + std::to_string(i) + " is not finite");
    }
    if (p.remission < 0.0 || p.remission > 1.0) {
      throw Error(ErrorCode::kInvalidSpec,
                  "point " + std::to_string(i) + " remission outside [0,1]");
    }
  }
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose,
                           CloudFrame result_frame) {
  pose.validate();
  PointCloud out;
  out.frame = result_frame;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    out.points.push_back({pose.apply(p.position), p.remission});
  }
  return out;
}

std::optional<Eigen::Vector2d> project_pinhole(const Eigen::Vector3d& point,
                                               const CameraIntrinsics& k) {
  if (!(point.z() > 0.0)) return std::nullopt;
  const double u = k.fx * point.x() / point.z() + k.cx;
  const double v = k.fy * point.y() / point.z() + k.cy;
  if (!(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height)) return std::nullopt;
  return Eigen::Vector2d(u, v);
}

PointCloud backproject_depth(const DepthMap& depth, const CameraIntrinsics& k,
                             const ColorImage* rgb) {
  k.validate();
  if (depth.depth.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw Error(ErrorCode::kShapeMismatch, "depth buffer does not match its dimensions");
  }
  if (depth.width != k.width || depth.height != k.height) {
    throw Error(ErrorCode::kShapeMismatch, "depth map size differs from the camera image size");
  }
  if (rgb != nullptr &&
      (rgb->width != depth.width || rgb->height != depth.height ||
       rgb->rgb.size() != static_cast<std::size_t>(depth.width) * depth.height * 3)) {
    throw Error(ErrorCode::kShapeMismatch, "color image and depth map differ in size");
  }
  if (rgb != nullptr && rgb->max_value <= 0) {
    throw Error(ErrorCode::kInvalidSpec, "color image max_value must be positive");
  }
  PointCloud out;
  out.frame = CloudFrame::kCamera;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      CloudPoint p;
      p.position = {(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d};
      if (rgb != nullptr) {
        const std::size_t i = (static_cast<std::size_t>(v) * depth.width + u) * 3;
        const double mean = (rgb->rgb[i] + rgb->rgb[i + 1] + rgb->rgb[i + 2]) / 3.0;
        p.remission = mean / rgb->max_value;
      } else {
        p.remission = 1.0;
      }
      out.points.push_back(p);
    }
  }
  return out;
}

}  // namespace bevbench
