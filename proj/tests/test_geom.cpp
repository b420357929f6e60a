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

#include <Eigen/Geometry>
#include <random>

#include "bevbench/error.hpp"
#include "bevbench/geom.hpp"

namespace bevbench {
namespace {

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  Pose p;
  p.rotation = q.toRotationMatrix();
  p.translation = {5 * n(rng), 5 * n(rng), 5 * n(rng)};
  return p;
}

PointCloud random_cloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  PointCloud c;
  for (int i = 0; i < n; ++i) c.points.push_back({{u(rng), u(rng), u(rng)}, 0.5});
  return c;
}

CameraIntrinsics kitti_like() { return {720.0, 720.0, 320.0, 96.0, 640, 192}; }

TEST(Pose, IdentityAndTranslation) {
  PointCloud c;
  c.points.push_back({{1.0, 2.0, 3.0}, 0.1});
  const PointCloud same = transform_cloud(c, Pose::identity());
  EXPECT_EQ(same.points[0].position, c.points[0].position);
  const Pose t = Pose::from_translation({1, 0, 0});
  EXPECT_EQ(t.apply(Eigen::Vector3d::Zero()), Eigen::Vector3d(1, 0, 0));
}

TEST(Pose, InverseRoundTrip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose p = random_pose(rng);
    const PointCloud c = random_cloud(rng, 20);
    const PointCloud back = transform_cloud(transform_cloud(c, p), p.inverse());
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_LT((back.points[i].position - c.points[i].position).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Pose, CompositionIsAssociativeAndMatchesSequentialTransform) {
  std::mt19937_64 rng(2);
  const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
  const Pose l = (a * b) * c, r = a * (b * c);
  EXPECT_LT((l.rotation - r.rotation).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((l.translation - r.translation).cwiseAbs().maxCoeff(), 1e-9);
  const PointCloud cloud = random_cloud(rng, 10);
  const PointCloud two = transform_cloud(transform_cloud(cloud, a), b);
  const PointCloud one = transform_cloud(cloud, b * a);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_LT((two.points[i].position - one.points[i].position).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pose, PreservesPairwiseDistances) {
  std::mt19937_64 rng(3);
  const Pose p = random_pose(rng);
  const PointCloud c = random_cloud(rng, 15);
  const PointCloud t = transform_cloud(c, p);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double d0 = (c.points[i].position - c.points[j].position).norm();
      const double d1 = (t.points[i].position - t.points[j].position).norm();
      EXPECT_NEAR(d0, d1, 1e-9);
    }
  }
}

TEST(Pose, ValidateRejectsReflection) {
  Pose p;
  p.rotation(0, 0) = -1.0;
  EXPECT_FALSE(p.is_rigid());
  EXPECT_THROW(p.validate(), Error);
}

TEST(Pinhole, HandExamples) {
  const auto k = kitti_like();
  const auto uv = project_pinhole({0, 0, 5}, k);
  ASSERT_TRUE(uv.has_value());
  EXPECT_DOUBLE_EQ(uv->x(), 320.0);
  EXPECT_DOUBLE_EQ(uv->y(), 96.0);
  EXPECT_FALSE(project_pinhole({0, 0, -1}, k).has_value());
  // u = 720 * x / 10 + 320 = 650 = width + 10.
  const double x = (650.0 - 320.0) * 10.0 / 720.0;
  EXPECT_FALSE(project_pinhole({x, 0, 10}, k).has_value());
  // Hand computation: u = 720 * 1 / 4 + 320 = 500, v = 720 * 0.5 / 4 + 96 = 186.
  const auto h = project_pinhole({1.0, 0.5, 4.0}, k);
  ASSERT_TRUE(h.has_value());
  EXPECT_DOUBLE_EQ(h->x(), 500.0);
  EXPECT_DOUBLE_EQ(h->y(), 186.0);
}

TEST(Backproject, PrincipalRayAndInvalidPixels) {
  CameraIntrinsics k{100.0, 100.0, 2.0, 1.0, 4, 3};
  DepthMap d{4, 3, std::vector<float>(12, 0.0f)};
  d.depth[1 * 4 + 2] = 4.0f;
  d.depth[0] = -1.0f;
  const PointCloud c = backproject_depth(d, k);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0].position, Eigen::Vector3d(0, 0, 4));
  EXPECT_DOUBLE_EQ(c.points[0].remission, 1.0);
}

TEST(Backproject, RemissionFromColor) {
  CameraIntrinsics k{100.0, 100.0, 0.0, 0.0, 1, 1};
  DepthMap d{1, 1, {2.0f}};
  ColorImage rgb{1, 1, 255, {255, 0, 51}};
  const PointCloud c = backproject_depth(d, k, &rgb);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c.points[0].remission, (255.0 + 0.0 + 51.0) / 3.0 / 255.0, 1e-12);
}

TEST(Backproject, ProjectionRoundTrip) {
  const auto k = kitti_like();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> depth(1.0f, 80.0f);
  DepthMap d{k.width, k.height, std::vector<float>(static_cast<std::size_t>(k.width) * k.height)};
  for (auto& v : d.depth) v = depth(rng);
  const PointCloud c = backproject_depth(d, k);
  ASSERT_EQ(c.size(), d.depth.size());
  for (std::size_t i = 0; i < c.size(); i += 97) {
    // Pixels on the left/top border can land a rounding step outside.
    if (i % k.width == 0 || i / k.width == 0) continue;
    const auto uv = project_pinhole(c.points[i].position, k);
    ASSERT_TRUE(uv.has_value());
    EXPECT_NEAR(uv->x(), static_cast<double>(i % k.width), 1e-6);
    EXPECT_NEAR(uv->y(), static_cast<double>(i / k.width), 1e-6);
  }
}

TEST(Backproject, SizeMismatch) {
  CameraIntrinsics k{100.0, 100.0, 0.0, 0.0, 4, 4};
  DepthMap d{2, 2, std::vector<float>(4, 1.0f)};
  EXPECT_THROW(backproject_depth(d, k), Error);
}

}  // namespace
}  // namespace bevbench
