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
#include <optional>
#include <vector>

#include "bevbench/grid.hpp"

namespace bevbench {

// Cubic lateral = a0 + a1 z + a2 z^2 + a3 z^3 over forward z in [z_lo, z_hi].
struct LaneBoundary {
  std::array<double, 4> coeffs{};
  double z_lo = 0.0;
  double z_hi = 0.0;
  int cluster_id = -1;
  double rms_residual = 0.0;
  // Set when the fit fell back to ridge-regularized normal equations.
  bool regularized = false;

  double lateral_at(double z) const {
    return coeffs[0] + z * (coeffs[1] + z * (coeffs[2] + z * coeffs[3]));
  }
};

// Road edge as a polyline ordered by increasing forward distance.
struct Polyline {
  std::vector<Vec2> points;

  bool empty() const { return points.empty(); }
  double z_lo() const { return points.front().forward; }
  double z_hi() const { return points.back().forward; }
  // Linear interpolation, clamped to the end points.
  double lateral_at(double z) const;
};

// One side of a lane: either a fitted marker curve or a road edge.
struct LaneBound {
  std::optional<LaneBoundary> curve;
  std::optional<Polyline> edge;

  static LaneBound of(const LaneBoundary& b) { return {b, std::nullopt}; }
  static LaneBound of(const Polyline& p) { return {std::nullopt, p}; }

  bool is_curve() const { return curve.has_value(); }
  double z_lo() const { return curve ? curve->z_lo : edge->z_lo(); }
  double z_hi() const { return curve ? curve->z_hi : edge->z_hi(); }
  // Evaluated at z clamped into the bound's own domain.
  double lateral_at(double z) const;
};

struct LaneInstance {
  std::uint16_t id = 0;
  // 0 ego lane, -1 first lane to the left, +1 first to the right.
  int side = 0;
  std::optional<LaneBound> left;
  std::optional<LaneBound> right;
  Mask mask;
  double confidence = 1.0;
};

}  // namespace bevbench
