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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bevbench {

// Metric position on the ground plane, in the ego camera frame: lateral is
// camera x (right positive), forward is camera z.
struct Vec2 {
  double lateral = 0.0;
  double forward = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Cell {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// BEV lattice anchored at the ego camera. The camera sits at the midpoint of
// the bottom edge; row 0 is the far edge, col 0 the left edge.
struct GridSpec {
  int rows = 256;
  int cols = 256;
  double resolution = 0.15625;

  void validate() const;

  std::size_t size() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell(std::size_t index) const {
    return {static_cast<int>(index / static_cast<std::size_t>(cols)),
            static_cast<int>(index % static_cast<std::size_t>(cols))};
  }
  double forward_extent() const { return rows * resolution; }
  double lateral_extent() const { return cols * resolution; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Containing cell of a metric point, or nothing outside the half-open extent
// forward in [0, rows*res), lateral in [-cols*res/2, cols*res/2).
std::optional<Cell> cell_of(Vec2 point, const GridSpec& spec);

Vec2 cell_center(Cell cell, const GridSpec& spec);

enum class SemanticClass : std::uint8_t {
  kFree = 0,
  kRoad = 1,
  kSidewalk = 2,
  kCrosswalk = 3,
  kOtherRoad = 4,
  kVehicle = 5,
  kLane = 6,
};

inline constexpr int kNumSemanticClasses = 7;

const char* class_name(SemanticClass c);

// Row-major boolean raster. Stored as one byte per cell (0 or 1) so the
// counting kernels can stream it.
struct Mask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int rows_, int cols_, bool value = false)
      : rows(rows_),
        cols(cols_),
        bits(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_),
             value ? 1 : 0) {}
  explicit Mask(const GridSpec& spec, bool value = false)
      : Mask(spec.rows, spec.cols, value) {}

  std::size_t size() const { return bits.size(); }
  bool at(int row, int col) const {
    return bits[static_cast<std::size_t>(row) * cols + col] != 0;
  }
  void set(int row, int col, bool v) {
    bits[static_cast<std::size_t>(row) * cols + col] = v ? 1 : 0;
  }
  std::size_t count() const;
  bool same_shape(const Mask& other) const {
    return rows == other.rows && cols == other.cols;
  }

  friend bool operator==(const Mask&, const Mask&) = default;
};

// Ground-truth or weak label raster. Invariant: lane_ids[i] != 0 exactly when
// classes[i] == kLane.
class LabelGrid {
 public:
  LabelGrid() = default;
  explicit LabelGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }

  SemanticClass class_at(Cell c) const { return classes_[spec_.index(c)]; }
  std::uint16_t lane_id_at(Cell c) const { return lane_ids_[spec_.index(c)]; }
  bool occluded_at(Cell c) const { return occluded_[spec_.index(c)] != 0; }

  // Sets a cell's class; the lane id is stored only for kLane and cleared
  // otherwise, which keeps the class/lane-id invariant intact.
  void set(Cell c, SemanticClass cls, std::uint16_t lane_id = 0);
  void set_occluded(Cell c, bool occluded) {
    occluded_[spec_.index(c)] = occluded ? 1 : 0;
  }

  std::span<const SemanticClass> classes() const { return classes_; }
  std::span<const std::uint16_t> lane_ids() const { return lane_ids_; }
  std::span<const std::uint8_t> occlusion() const { return occluded_; }

  Mask occlusion_mask() const;
  Mask lane_id_mask(std::uint16_t id) const;

  // Throws kInvalidSpec if the class/lane-id invariant is broken or lane ids
  // are not the contiguous set {1..K}.
  void validate() const;

  // Raw constructors for deserialization; they validate the layer sizes and
  // the class/lane-id coupling.
  static LabelGrid from_layers(const GridSpec& spec,
                               std::vector<SemanticClass> classes,
                               std::vector<std::uint16_t> lane_ids,
                               std::vector<std::uint8_t> occluded);

  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;

 private:
  GridSpec spec_;
  std::vector<SemanticClass> classes_;
  std::vector<std::uint16_t> lane_ids_;
  std::vector<std::uint8_t> occluded_;
};

// Per-cell class probabilities, stored class-major: channel k is a contiguous
// rows*cols block. A single-channel grid is a binary occupancy probability.
struct ConfidenceGrid {
  GridSpec spec;
  int num_classes = 0;
  std::vector<float> probs;
  std::optional<std::vector<std::uint16_t>> lane_ids;

  ConfidenceGrid() = default;
  ConfidenceGrid(const GridSpec& spec_, int num_classes_);

  std::span<float> channel(int k) {
    return {probs.data() + static_cast<std::size_t>(k) * spec.size(),
            spec.size()};
  }
  std::span<const float> channel(int k) const {
    return {probs.data() + static_cast<std::size_t>(k) * spec.size(),
            spec.size()};
  }
  float at(int k, Cell c) const {
    return probs[static_cast<std::size_t>(k) * spec.size() + spec.index(c)];
  }
  float& at(int k, Cell c) {
    return probs[static_cast<std::size_t>(k) * spec.size() + spec.index(c)];
  }

  // Every value in [0,1]; throws kInvalidSpec otherwise.
  void validate() const;
  bool is_normalized(double tol = 1e-6) const;

  friend bool operator==(const ConfidenceGrid&, const ConfidenceGrid&) = default;
};

// Cells whose centers lie inside the even-odd union of the rings.
Mask polygon_mask(std::span<const std::vector<Vec2>> rings, const GridSpec& spec);

// Paints every cell whose center lies inside the polygon. Later calls
// overwrite earlier ones. Throws kDegeneratePolygon for <3 vertices or zero
// area.
void rasterize_polygon(std::span<const Vec2> vertices, SemanticClass cls,
                       std::uint16_t lane_id, LabelGrid& grid);

// Paints the cells set in `mask`.
void paint_mask(const Mask& mask, SemanticClass cls, std::uint16_t lane_id,
                LabelGrid& grid);

Mask binary_mask(const LabelGrid& grid, SemanticClass cls);

}  // namespace bevbench
