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

#include "bevbench/pseudolidar.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

#include "bevbench/error.hpp"

namespace bevbench {
namespace {

constexpr double kFixedScale = 4294967296.0;  // 2^32

struct Accumulator {
  std::vector<std::uint32_t> counts;
  std::vector<std::uint64_t> remission_fixed;

  explicit Accumulator(std::size_t n) : counts(n, 0), remission_fixed(n, 0) {}
};

std::optional<std::size_t> voxel_index(const CloudPoint& p, const VoxelSpec& spec) {
  const int ch = channel_of(p.position.y(), spec);
  if (ch < 0) return std::nullopt;
  const auto cell = cell_of({p.position.x(), p.position.z()}, spec.bev);
  if (!cell) return std::nullopt;
  return static_cast<std::size_t>(ch) * spec.bev.size() + spec.bev.index(*cell);
}

void accumulate(std::span<const CloudPoint> points, const VoxelSpec& spec, Accumulator& acc) {
  for (const auto& p : points) {
    const auto idx = voxel_index(p, spec);
    if (!idx) continue;
    const double r = std::clamp(p.remission, 0.0, 1.0);
    acc.counts[*idx] += 1;
    acc.remission_fixed[*idx] += static_cast<std::uint64_t>(std::llround(r * kFixedScale));
  }
}

}  // namespace

void VoxelSpec::validate() const {
  bev.validate();
  if (channels < 1 || !(y_max > y_min) || !(channel_height() > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "voxel spec needs channels >= 1 and y_max > y_min");
  }
}

VoxelVolume::VoxelVolume(const VoxelSpec& spec_) : spec(spec_) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.channels) * spec.bev.size();
  counts.assign(n, 0);
  mean_remission.assign(n, 0.0f);
}

std::uint64_t VoxelVolume::total_count() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

int channel_of(double y, const VoxelSpec& spec) {
  if (!(y >= spec.y_min) || !(y < spec.y_max)) return -1;
  const int ch = static_cast<int>(std::floor((y - spec.y_min) / spec.channel_height()));
  // y just below y_max can round up to `channels`.
  return std::min(ch, spec.channels - 1);
}

VoxelVolume voxelize(const PointCloud& cloud, const VoxelSpec& spec, int jobs) {
  VoxelVolume vol(spec);
  const std::size_t n = vol.counts.size();
  const std::size_t parts =
      std::clamp<std::size_t>(jobs < 1 ? 1 : static_cast<std::size_t>(jobs), 1,
                              std::max<std::size_t>(1, cloud.points.size() / 4096));
  std::vector<Accumulator> accs(parts, Accumulator(n));
  const std::span<const CloudPoint> all(cloud.points);
  const std::size_t chunk = (all.size() + parts - 1) / parts;
  if (parts == 1) {
    accumulate(all, spec, accs[0]);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t p = 0; p < parts; ++p) {
      const std::size_t lo = std::min(all.size(), p * chunk);
      const std::size_t hi = std::min(all.size(), lo + chunk);
      workers.emplace_back([&, p, lo, hi] { accumulate(all.subspan(lo, hi - lo), spec, accs[p]); });
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t count = 0;
    std::uint64_t fixed = 0;
    for (const auto& a : accs) {
      count += a.counts[i];
      fixed += a.remission_fixed[i];
    }
    vol.counts[i] = static_cast<std::uint32_t>(count);
    if (count > 0) {
      vol.mean_remission[i] =
          static_cast<float>(static_cast<double>(fixed) / kFixedScale / static_cast<double>(count));
    }
  }
  return vol;
}

std::uint64_t count_in_range(const PointCloud& cloud, const VoxelSpec& spec) {
  std::uint64_t n = 0;
  for (const auto& p : cloud.points) n += voxel_index(p, spec).has_value();
  return n;
}

ConfidenceGrid flatten_occupancy(const VoxelVolume& vol, double saturation) {
  if (!(saturation > 0.0)) throw Error(ErrorCode::kInvalidSpec, "saturation must be positive");
  ConfidenceGrid out(vol.spec.bev, 1);
  const std::size_t cells = vol.spec.bev.size();
  for (std::size_t i = 0; i < cells; ++i) {
    std::uint64_t total = 0;
    for (int ch = 0; ch < vol.spec.channels; ++ch) total += vol.counts[ch * cells + i];
    out.probs[i] = static_cast<float>(std::min(1.0, static_cast<double>(total) / saturation));
  }
  return out;
}

}  // namespace bevbench
