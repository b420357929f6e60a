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

#include "bevbench/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bevbench/error.hpp"
#include "bevbench/simd/kernels.hpp"

namespace bevbench {

void GridSpec::validate() const {
  if (rows <= 0 || cols <= 0 || !(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kInvalidSpec,
                "grid needs rows > 0, cols > 0, resolution > 0 (got " +
                    std::to_string(rows) + "x" + std::to_string(cols) + " @ " +
                    std::to_string(resolution) + ")");
  }
}

std::optional<Cell> cell_of(Vec2 point, const GridSpec& spec) {
  if (!std::isfinite(point.lateral) || !std::isfinite(point.forward)) return std::nullopt;
  const double fwd = std::floor(point.forward / spec.resolution);
  const double lat = std::floor(spec.cols / 2.0 + point.lateral / spec.resolution);
  if (fwd < 0.0 || fwd >= spec.rows || lat < 0.0 || lat >= spec.cols) return std::nullopt;
  return Cell{spec.rows - 1 - static_cast<int>(fwd), static_cast<int>(lat)};
}

Vec2 cell_center(Cell cell, const GridSpec& spec) {
  return {(cell.col + 0.5 - spec.cols / 2.0) * spec.resolution,
          (spec.rows - 1 - cell.row + 0.5) * spec.resolution};
}

const char* class_name(SemanticClass c) {
  switch (c) {
    case SemanticClass::kFree: return "free";
    case SemanticClass::kRoad: return "road";
    case SemanticClass::kSidewalk: return "sidewalk";
    case SemanticClass::kCrosswalk: return "crosswalk";
    case SemanticClass::kOtherRoad: return "other_road";
    case SemanticClass::kVehicle: return "vehicle";
    case SemanticClass::kLane: return "lane";
  }
  return "unknown";
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(simd::active().count_nonzero(bits.data(), bits.size()));
}

LabelGrid::LabelGrid(const GridSpec& spec)
    : spec_(spec),
      classes_(spec.size(), SemanticClass::kFree),
      lane_ids_(spec.size(), 0),
      occluded_(spec.size(), 0) {
  spec.validate();
}

void LabelGrid::set(Cell c, SemanticClass cls, std::uint16_t lane_id) {
  const std::size_t i = spec_.index(c);
  if (cls == SemanticClass::kLane && lane_id == 0) {
    throw Error(ErrorCode::kInvalidSpec, "lane cells need a nonzero lane id");
  }
  classes_[i] = cls;
  lane_ids_[i] = cls == SemanticClass::kLane ? lane_id : 0;
}

Mask LabelGrid::occlusion_mask() const {
  Mask m(spec_);
  m.bits = occluded_;
  return m;
}

Mask LabelGrid::lane_id_mask(std::uint16_t id) const {
  Mask m(spec_);
  for (std::size_t i = 0; i < lane_ids_.size(); ++i) m.bits[i] = lane_ids_[i] == id ? 1 : 0;
  return m;
}

void LabelGrid::validate() const {
  std::uint16_t max_id = 0;
  std::vector<bool> seen(1, false);
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const bool is_lane = classes_[i] == SemanticClass::kLane;
    if (is_lane != (lane_ids_[i] != 0)) {
      throw Error(ErrorCode::kInvalidSpec,
                  "lane id / class mismatch at cell " + std::to_string(i));
    }
    if (static_cast<int>(classes_[i]) >= kNumSemanticClasses) {
      throw Error(ErrorCode::kInvalidSpec, "unknown class at cell " + std::to_string(i));
    }
    if (lane_ids_[i] != 0) {
      if (lane_ids_[i] >= seen.size()) seen.resize(lane_ids_[i] + 1u, false);
      seen[lane_ids_[i]] = true;
      max_id = std::max(max_id, lane_ids_[i]);
    }
  }
  for (std::uint16_t id = 1; id <= max_id; ++id) {
    if (!seen[id]) {
      throw Error(ErrorCode::kInvalidSpec,
                  "lane ids not contiguous: id " + std::to_string(id) + " missing");
    }
  }
}

LabelGrid LabelGrid::from_layers(const GridSpec& spec, std::vector<SemanticClass> classes,
                                 std::vector<std::uint16_t> lane_ids,
                                 std::vector<std::uint8_t> occluded) {
  spec.validate();
  if (classes.size() != spec.size() || lane_ids.size() != spec.size() ||
      occluded.size() != spec.size()) {
    throw Error(ErrorCode::kShapeMismatch, "label layers do not match grid size");
  }
  LabelGrid g;
  g.spec_ = spec;
  g.classes_ = std::move(classes);
  g.lane_ids_ = std::move(lane_ids);
  g.occluded_ = std::move(occluded);
  for (std::size_t i = 0; i < g.classes_.size(); ++i) {
    if ((g.classes_[i] == SemanticClass::kLane) != (g.lane_ids_[i] != 0)) {
      throw Error(ErrorCode::kInvalidSpec,
                  "lane id / class mismatch at cell " + std::to_string(i));
    }
  }
  g.validate();
  return g;
}

ConfidenceGrid::ConfidenceGrid(const GridSpec& spec_, int num_classes_)
    : spec(spec_), num_classes(num_classes_) {
  spec.validate();
  if (num_classes <= 0) throw Error(ErrorCode::kInvalidSpec, "confidence grid needs >= 1 class");
  probs.assign(static_cast<std::size_t>(num_classes) * spec.size(), 0.0f);
}

void ConfidenceGrid::validate() const {
  if (probs.size() != static_cast<std::size_t>(num_classes) * spec.size()) {
    throw Error(ErrorCode::kShapeMismatch, "confidence payload does not match grid size");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0f && probs[i] <= 1.0f)) {
      throw Error(ErrorCode::kInvalidSpec,
                  "confidence outside [0,1] at element " + std::to_string(i));
    }
  }
  if (lane_ids && lane_ids->size() != spec.size()) {
    throw Error(ErrorCode::kShapeMismatch, "lane-id layer does not match grid size");
  }
}

bool ConfidenceGrid::is_normalized(double tol) const {
  if (num_classes < 2) return true;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < num_classes; ++k) s += probs[k * spec.size() + i];
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

Mask polygon_mask(std::span<const std::vector<Vec2>> rings, const GridSpec& spec) {
  spec.validate();
  Mask out(spec);
  std::vector<double> xs;
  for (int row = 0; row < spec.rows; ++row) {
    const double y = cell_center({row, 0}, spec).forward;
    xs.clear();
    for (const auto& ring : rings) {
      const std::size_t n = ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        if ((a.forward > y) != (b.forward > y)) {
          xs.push_back(a.lateral + (y - a.forward) * (b.lateral - a.lateral) /
                                       (b.forward - a.forward));
        }
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double lo = xs[k];
      const double hi = xs[k + 1];
      // Center of col c is (c + 0.5 - cols/2) * res; filled when lo <= x < hi.
      int c0 = static_cast<int>(std::floor(lo / spec.resolution + spec.cols / 2.0 - 0.5)) - 1;
      int c1 = static_cast<int>(std::ceil(hi / spec.resolution + spec.cols / 2.0 - 0.5)) + 1;
      c0 = std::max(c0, 0);
      c1 = std::min(c1, spec.cols - 1);
      for (int col = c0; col <= c1; ++col) {
        const double x = cell_center({row, col}, spec).lateral;
        if (x >= lo && x < hi) out.bits[spec.index({row, col})] ^= 1;
      }
    }
  }
  return out;
}

namespace {

double signed_area(std::span<const Vec2> v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += p.lateral * q.forward - q.lateral * p.forward;
  }
  return 0.5 * a;
}

}  // namespace

void rasterize_polygon(std::span<const Vec2> vertices, SemanticClass cls,
                       std::uint16_t lane_id, LabelGrid& grid) {
  if (vertices.size() < 3) {
    throw Error(ErrorCode::kDegeneratePolygon,
                "polygon has " + std::to_string(vertices.size()) + " vertices");
  }
  if (std::abs(signed_area(vertices)) <= 1e-12) {
    throw Error(ErrorCode::kDegeneratePolygon, "polygon has zero area");
  }
  const std::vector<Vec2> ring(vertices.begin(), vertices.end());
  paint_mask(polygon_mask(std::span(&ring, 1), grid.spec()), cls, lane_id, grid);
}

void paint_mask(const Mask& mask, SemanticClass cls, std::uint16_t lane_id,
                LabelGrid& grid) {
  const GridSpec& spec = grid.spec();
  if (mask.rows != spec.rows || mask.cols != spec.cols) {
    throw Error(ErrorCode::kShapeMismatch, "mask does not match grid");
  }
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i] != 0) grid.set(spec.cell(i), cls, lane_id);
  }
}

Mask binary_mask(const LabelGrid& grid, SemanticClass cls) {
  Mask out(grid.spec());
  const auto classes = grid.classes();
  simd::active().equal_mask(reinterpret_cast<const std::uint8_t*>(classes.data()),
                            static_cast<std::uint8_t>(cls), out.bits.data(),
                            classes.size());
  return out;
}

}  // namespace bevbench
