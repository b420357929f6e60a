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
#include <vector>

#include "bevbench/geom.hpp"
#include "bevbench/grid.hpp"

namespace bevbench {

// Vertical slicing of camera-frame points into BEV channels. Camera y points
// down, so y_min = -0.4 is 0.4 m above the camera and y_max = 2.0 is 2 m below.
struct VoxelSpec {
  GridSpec bev;
  int channels = 10;
  double y_min = -0.4;
  double y_max = 2.0;

  double channel_height() const { return (y_max - y_min) / channels; }
  void validate() const;

  friend bool operator==(const VoxelSpec&, const VoxelSpec&) = default;
};

// Per-voxel point count and mean remission, channel-major
// ([channel][row][col]).
struct VoxelVolume {
  VoxelSpec spec;
  std::vector<std::uint32_t> counts;
  std::vector<float> mean_remission;

  VoxelVolume() = default;
  explicit VoxelVolume(const VoxelSpec& spec_);

  std::size_t index(int channel, Cell cell) const {
    return static_cast<std::size_t>(channel) * spec.bev.size() + spec.bev.index(cell);
  }
  std::uint64_t total_count() const;

  friend bool operator==(const VoxelVolume&, const VoxelVolume&) = default;
};

// Channel index of a camera-frame height, or -1 outside [y_min, y_max).
int channel_of(double y, const VoxelSpec& spec);

// Bins every point with y in [y_min, y_max) and (x, z) inside the BEV extent.
// Remission is accumulated in 2^-32 fixed point so the mean does not depend
// on point order or on how the work is partitioned across `jobs` threads.
VoxelVolume voxelize(const PointCloud& cloud, const VoxelSpec& spec, int jobs = 1);

// Number of points voxelize() keeps.
std::uint64_t count_in_range(const PointCloud& cloud, const VoxelSpec& spec);

// Single-channel occupancy: min(1, column count / saturation).
ConfidenceGrid flatten_occupancy(const VoxelVolume& vol, double saturation = 4.0);

}  // namespace bevbench
