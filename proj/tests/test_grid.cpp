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

#include <cmath>
#include <random>

#include "bevbench/error.hpp"
#include "bevbench/grid.hpp"

namespace bevbench {
namespace {

// Cell-boundary scan used as the oracle for cell_of: walk the lattice and
// return the cell whose half-open box contains the point.
std::optional<Cell> scan_cell(Vec2 p, const GridSpec& s) {
  for (int row = 0; row < s.rows; ++row) {
    const double f_lo = (s.rows - 1 - row) * s.resolution;
    if (!(p.forward >= f_lo && p.forward < f_lo + s.resolution)) continue;
    for (int col = 0; col < s.cols; ++col) {
      const double l_lo = (col - s.cols / 2.0) * s.resolution;
      if (p.lateral >= l_lo && p.lateral < l_lo + s.resolution) return Cell{row, col};
    }
  }
  return std::nullopt;
}

bool inside_even_odd(const std::vector<Vec2>& poly, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.forward > p.forward) != (b.forward > p.forward)) {
      const double x = (b.lateral - a.lateral) * (p.forward - a.forward) / (b.forward - a.forward) +
                       a.lateral;
      if (p.lateral < x) in = !in;
    }
  }
  return in;
}

TEST(GridSpec, DefaultsAndValidation) {
  GridSpec s;
  EXPECT_EQ(s.rows, 256);
  EXPECT_EQ(s.cols, 256);
  EXPECT_DOUBLE_EQ(s.resolution, 0.15625);
  EXPECT_DOUBLE_EQ(s.forward_extent(), 40.0);
  GridSpec bad{0, 10, 0.1};
  EXPECT_THROW(bad.validate(), Error);
  GridSpec bad_res{10, 10, -1.0};
  EXPECT_THROW(bad_res.validate(), Error);
}

TEST(CellOf, HandExamples) {
  const GridSpec s;
  EXPECT_EQ(cell_of({0.0, 0.0}, s), (Cell{255, 128}));
  EXPECT_FALSE(cell_of({0.0, 41.0}, s).has_value());
  EXPECT_EQ(cell_of({-3.2, 20.0}, s), (Cell{127, 107}));
  EXPECT_EQ(scan_cell({-3.2, 20.0}, s), (Cell{127, 107}));
}

TEST(CellOf, MatchesBoundaryScan) {
  const GridSpec s{24, 20, 0.5};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-6.0, 6.0), fwd(-1.0, 13.0);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p{lat(rng), fwd(rng)};
    EXPECT_EQ(cell_of(p, s), scan_cell(p, s)) << p.lateral << "," << p.forward;
  }
}

TEST(CellOf, LeftInverseOfCenter) {
  const GridSpec s;
  for (int row = 0; row < s.rows; ++row) {
    for (int col = 0; col < s.cols; ++col) {
      const Cell c{row, col};
      ASSERT_EQ(cell_of(cell_center(c, s), s), c);
    }
  }
}

TEST(LabelGrid, SetKeepsLaneInvariant) {
  LabelGrid g(GridSpec{4, 4, 1.0});
  g.set({1, 1}, SemanticClass::kLane, 1);
  EXPECT_EQ(g.lane_id_at({1, 1}), 1);
  g.set({1, 1}, SemanticClass::kRoad, 7);
  EXPECT_EQ(g.lane_id_at({1, 1}), 0);
  EXPECT_NO_THROW(g.validate());
}

TEST(LabelGrid, ValidateRejectsBrokenLayers) {
  const GridSpec s{2, 2, 1.0};
  EXPECT_THROW(LabelGrid::from_layers(s, {SemanticClass::kRoad, SemanticClass::kFree,
                                          SemanticClass::kFree, SemanticClass::kFree},
                                      {3, 0, 0, 0}, {0, 0, 0, 0}),
               Error);
  // Ids {1, 3} skip 2.
  EXPECT_THROW(LabelGrid::from_layers(s, {SemanticClass::kLane, SemanticClass::kLane,
                                          SemanticClass::kFree, SemanticClass::kFree},
                                      {1, 3, 0, 0}, {0, 0, 0, 0}),
               Error);
  EXPECT_THROW(LabelGrid::from_layers(s, {SemanticClass::kFree}, {0}, {0}), Error);
}

TEST(Rasterize, RectangleCoveringFourCells) {
  const GridSpec s{8, 8, 1.0};
  LabelGrid g(s);
  // Cells (rows 6..7, cols 4..5) span lateral [0, 2), forward [0, 2).
  const std::vector<Vec2> rect{{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}, {0.0, 2.0}};
  rasterize_polygon(rect, SemanticClass::kRoad, 0, g);
  EXPECT_EQ(binary_mask(g, SemanticClass::kRoad).count(), 4u);
  EXPECT_EQ(g.class_at({6, 4}), SemanticClass::kRoad);
  EXPECT_EQ(g.class_at({7, 5}), SemanticClass::kRoad);
}

TEST(Rasterize, OutsideExtentLeavesGridUnchanged) {
  const GridSpec s{8, 8, 1.0};
  LabelGrid g(s);
  const LabelGrid before = g;
  rasterize_polygon(std::vector<Vec2>{{20, 20}, {25, 20}, {25, 30}}, SemanticClass::kRoad, 0, g);
  EXPECT_EQ(g, before);
}

TEST(Rasterize, DegenerateInputs) {
  LabelGrid g(GridSpec{8, 8, 1.0});
  try {
    rasterize_polygon(std::vector<Vec2>{{0, 0}, {1, 1}}, SemanticClass::kRoad, 0, g);
    FAIL() << "expected DegeneratePolygon";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegeneratePolygon);
  }
  EXPECT_THROW(rasterize_polygon(std::vector<Vec2>{{0, 0}, {1, 1}, {2, 2}}, SemanticClass::kRoad,
                                 0, g),
               Error);
}

TEST(Rasterize, MatchesPointInPolygonOracle) {
  const GridSpec s{40, 40, 0.25};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(-6.0, 6.0), fwd(-1.0, 11.0);
  for (int trial = 0; trial < 30; ++trial) {
    // Star-shaped polygons around a random centre are simple.
    const Vec2 c{lat(rng) * 0.5, 5.0 + fwd(rng) * 0.2};
    std::uniform_real_distribution<double> radius(0.5, 4.0);
    std::vector<Vec2> poly;
    const int n = 3 + trial % 7;
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * M_PI * k / n;
      const double r = radius(rng);
      poly.push_back({c.lateral + r * std::cos(a), c.forward + r * std::sin(a)});
    }
    const Mask m = polygon_mask(std::span(&poly, 1), s);
    for (int row = 0; row < s.rows; ++row) {
      for (int col = 0; col < s.cols; ++col) {
        ASSERT_EQ(m.at(row, col), inside_even_odd(poly, cell_center({row, col}, s)))
            << "trial " << trial << " cell " << row << "," << col;
      }
    }
  }
}

TEST(Rasterize, PolygonAndComplementPartitionTheGrid) {
  const GridSpec s{16, 16, 0.5};
  const double half = s.lateral_extent() / 2.0;
  const double top = s.forward_extent();
  // Split the extent at lateral = 1.3 with two axis-aligned rectangles.
  const std::vector<Vec2> left{{-half, 0}, {1.3, 0}, {1.3, top}, {-half, top}};
  const std::vector<Vec2> right{{1.3, 0}, {half, 0}, {half, top}, {1.3, top}};
  const Mask a = polygon_mask(std::span(&left, 1), s);
  const Mask b = polygon_mask(std::span(&right, 1), s);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.bits[i] + b.bits[i], 1) << i;
}

TEST(BinaryMask, PartitionAndCounts) {
  const GridSpec s{10, 10, 1.0};
  LabelGrid g(s);
  EXPECT_EQ(binary_mask(g, SemanticClass::kRoad).count(), 0u);
  std::mt19937_64 rng(2);
  std::size_t road_cells = 0;
  for (int row = 0; row < s.rows; ++row) {
    for (int col = 0; col < s.cols; ++col) {
      const auto cls = static_cast<SemanticClass>(rng() % kNumSemanticClasses);
      g.set({row, col}, cls, cls == SemanticClass::kLane ? 1 : 0);
      if (cls == SemanticClass::kRoad) ++road_cells;
    }
  }
  EXPECT_EQ(binary_mask(g, SemanticClass::kRoad).count(), road_cells);
  std::vector<int> cover(s.size(), 0);
  for (int k = 0; k < kNumSemanticClasses; ++k) {
    const Mask m = binary_mask(g, static_cast<SemanticClass>(k));
    for (std::size_t i = 0; i < m.size(); ++i) cover[i] += m.bits[i];
  }
  for (int c : cover) EXPECT_EQ(c, 1);
}

TEST(BinaryMask, SevenRoadCells) {
  LabelGrid g(GridSpec{5, 5, 1.0});
  for (int i = 0; i < 7; ++i) g.set({i / 5, i % 5}, SemanticClass::kRoad);
  EXPECT_EQ(binary_mask(g, SemanticClass::kRoad).count(), 7u);
}

TEST(ConfidenceGrid, ValidateAndNormalization) {
  ConfidenceGrid c(GridSpec{2, 2, 1.0}, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    c.channel(0)[i] = 0.25f;
    c.channel(1)[i] = 0.75f;
  }
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(c.is_normalized());
  c.channel(1)[0] = 1.5f;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace bevbench
