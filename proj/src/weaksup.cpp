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

#include "bevbench/weaksup.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <unordered_map>

#include "bevbench/error.hpp"
#include "bevbench/parallel.hpp"

namespace bevbench {

// ---------------------------------------------------------------------------
// Painting

PaintedCloud paint_cloud(const PointCloud& cloud, const SegmentationImage& seg,
                         const CameraIntrinsics& k, const Pose& cam_from_lidar,
                         std::uint32_t frame_index) {
  k.validate();
  if (seg.width != k.width || seg.height != k.height ||
      seg.classes.size() != static_cast<std::size_t>(seg.width) * seg.height) {
    throw Error(ErrorCode::kShapeMismatch, "segmentation image does not match intrinsics");
  }
  PaintedCloud out;
  out.cloud = transform_cloud(cloud, cam_from_lidar, CloudFrame::kCamera);
  out.labels.reserve(out.cloud.size());
  out.source_frame.assign(out.cloud.size(), frame_index);
  for (const auto& p : out.cloud.points) {
    const auto px = project_pinhole(p.position, k);
    if (!px) {
      out.labels.push_back(PointClass::kUnlabeled);
      continue;
    }
    const int u = std::min(static_cast<int>(std::floor(px->x())), k.width - 1);
    const int v = std::min(static_cast<int>(std::floor(px->y())), k.height - 1);
    out.labels.push_back(seg.at(u, v));
  }
  return out;
}

void mark_lane_paint(PaintedCloud& painted, double min_remission) {
  for (std::size_t i = 0; i < painted.labels.size(); ++i) {
    if (painted.labels[i] == PointClass::kRoad &&
        painted.cloud.points[i].remission >= min_remission) {
      painted.labels[i] = PointClass::kLaneMarker;
    }
  }
}

// ---------------------------------------------------------------------------
// Static accumulation

namespace {

// Vote slots, listed from lowest to highest tie priority.
enum StaticSlot { kSlotSidewalk = 0, kSlotRoad, kSlotCrosswalk, kSlotMarker, kNumSlots };

int static_slot(PointClass c) {
  switch (c) {
    case PointClass::kSidewalk: return kSlotSidewalk;
    case PointClass::kRoad: return kSlotRoad;
    case PointClass::kCrosswalk: return kSlotCrosswalk;
    case PointClass::kLaneMarker: return kSlotMarker;
    default: return -1;
  }
}

SemanticClass slot_class(int slot) {
  switch (slot) {
    case kSlotSidewalk: return SemanticClass::kSidewalk;
    case kSlotCrosswalk: return SemanticClass::kCrosswalk;
    default: return SemanticClass::kRoad;
  }
}

std::optional<Cell> target_cell(const Pose& target_from_frame, const Eigen::Vector3d& p,
                                const GridSpec& spec) {
  const Eigen::Vector3d q = target_from_frame.apply(p);
  return cell_of({q.x(), q.z()}, spec);
}

bool is_drivable(SemanticClass c) {
  return c == SemanticClass::kRoad || c == SemanticClass::kLane ||
         c == SemanticClass::kCrosswalk;
}

}  // namespace

LabelGrid accumulate_static(std::span<const PosedCloud> frames, const Pose& world_from_target,
                            const GridSpec& spec) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "no frames to accumulate");
  spec.validate();
  std::vector<std::array<std::uint32_t, kNumSlots>> votes(spec.size());
  for (auto& v : votes) v.fill(0);
  const Pose target_from_world = world_from_target.inverse();
  for (const auto& frame : frames) {
    const Pose target_from_frame = target_from_world * frame.world_from_frame;
    const auto& pts = frame.painted.cloud.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int slot = static_slot(frame.painted.labels[i]);
      if (slot < 0) continue;
      const auto cell = target_cell(target_from_frame, pts[i].position, spec);
      if (cell) ++votes[spec.index(*cell)][slot];
    }
  }
  LabelGrid grid(spec);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    int best = -1;
    std::uint32_t best_count = 0;
    for (int s = 0; s < kNumSlots; ++s) {
      // >= lets later (higher priority) slots win ties.
      if (votes[i][s] > 0 && votes[i][s] >= best_count) {
        best = s;
        best_count = votes[i][s];
      }
    }
    if (best >= 0) grid.set(spec.cell(i), slot_class(best));
  }
  return grid;
}

LabelGrid fill_obstacle_cells(const LabelGrid& grid, const Mask& obstacle_cells) {
  const GridSpec& spec = grid.spec();
  if (obstacle_cells.rows != spec.rows || obstacle_cells.cols != spec.cols) {
    throw Error(ErrorCode::kShapeMismatch, "obstacle mask does not match grid");
  }
  LabelGrid out = grid;
  std::vector<std::uint8_t> pending(spec.size(), 0);
  std::size_t n_pending = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (obstacle_cells.bits[i] != 0 && grid.classes()[i] == SemanticClass::kFree) {
      pending[i] = 1;
      ++n_pending;
    }
  }
  static constexpr std::array<std::array<int, 2>, 4> kNeighbors{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  std::vector<std::size_t> flips;
  while (n_pending > 0) {
    flips.clear();
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (pending[i] == 0) continue;
      const Cell c = spec.cell(i);
      int decided = 0;
      int road = 0;
      for (const auto& d : kNeighbors) {
        const Cell n{c.row + d[0], c.col + d[1]};
        if (n.row < 0 || n.row >= spec.rows || n.col < 0 || n.col >= spec.cols) continue;
        const std::size_t j = spec.index(n);
        if (pending[j] != 0) continue;
        ++decided;
        road += is_drivable(out.classes()[j]) ? 1 : 0;
      }
      if (road > 0 && 2 * road > decided) flips.push_back(i);
    }
    if (flips.empty()) break;
    for (std::size_t i : flips) {
      out.set(spec.cell(i), SemanticClass::kRoad);
      pending[i] = 0;
      --n_pending;
    }
  }
  return out;
}

LabelGrid fill_stationary_obstacles(const LabelGrid& grid, std::span<const PosedCloud> frames,
                                    const Pose& world_from_target,
                                    const ObstacleFillParams& params) {
  const GridSpec& spec = grid.spec();
  if (frames.empty()) return grid;
  const int needed =
      std::clamp(params.min_frames, 1, static_cast<int>(std::max<std::size_t>(frames.size(), 1)));
  std::vector<std::uint32_t> frame_hits(spec.size(), 0);
  std::vector<std::int64_t> last_frame(spec.size(), -1);
  const Pose target_from_world = world_from_target.inverse();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Pose target_from_frame = target_from_world * frames[f].world_from_frame;
    const auto& pts = frames[f].painted.cloud.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (frames[f].painted.labels[i] != params.obstacle_class) continue;
      const auto cell = target_cell(target_from_frame, pts[i].position, spec);
      if (!cell) continue;
      const std::size_t idx = spec.index(*cell);
      if (last_frame[idx] != static_cast<std::int64_t>(f)) {
        last_frame[idx] = static_cast<std::int64_t>(f);
        ++frame_hits[idx];
      }
    }
  }
  Mask obstacles(spec);
  bool any = false;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (frame_hits[i] >= static_cast<std::uint32_t>(needed)) {
      obstacles.bits[i] = 1;
      any = true;
    }
  }
  return any ? fill_obstacle_cells(grid, obstacles) : grid;
}

// ---------------------------------------------------------------------------
// DBSCAN

std::vector<std::vector<Vec2>> cluster_boundaries(std::span<const Vec2> points, double eps,
                                                  int min_pts) {
  if (!(eps > 0.0) || min_pts < 1) {
    throw Error(ErrorCode::kInvalidParams, "DBSCAN needs eps > 0 and min_pts >= 1");
  }
  const std::size_t n = points.size();
  if (n == 0) return {};

  auto key_of = [eps](double lat, double fwd) {
    const auto a = static_cast<std::int64_t>(std::floor(lat / eps));
    const auto b = static_cast<std::int64_t>(std::floor(fwd / eps));
    return std::pair{a, b};
  };
  auto pack = [](std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) << 32) ^ static_cast<std::uint64_t>(b & 0xffffffff);
  };
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = key_of(points[i].lateral, points[i].forward);
    buckets[pack(a, b)].push_back(i);
  }
  const double eps2 = eps * eps;
  std::vector<std::size_t> scratch;
  auto neighbors = [&](std::size_t i, std::vector<std::size_t>& out) {
    out.clear();
    const auto [a, b] = key_of(points[i].lateral, points[i].forward);
    for (std::int64_t da = -1; da <= 1; ++da) {
      for (std::int64_t db = -1; db <= 1; ++db) {
        const auto it = buckets.find(pack(a + da, b + db));
        if (it == buckets.end()) continue;
        for (std::size_t j : it->second) {
          const double dl = points[j].lateral - points[i].lateral;
          const double df = points[j].forward - points[i].forward;
          if (dl * dl + df * df <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int cluster = 0;
  std::vector<std::size_t> nbrs;
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    neighbors(i, nbrs);
    if (nbrs.size() < static_cast<std::size_t>(min_pts)) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    queue.assign(nbrs.begin(), nbrs.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (label[j] == kNoise) label[j] = cluster;
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      neighbors(j, scratch);
      if (scratch.size() >= static_cast<std::size_t>(min_pts)) {
        queue.insert(queue.end(), scratch.begin(), scratch.end());
      }
    }
    ++cluster;
  }
  std::vector<std::vector<Vec2>> clusters(static_cast<std::size_t>(cluster));
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) clusters[static_cast<std::size_t>(label[i])].push_back(points[i]);
  }
  return clusters;
}

// ---------------------------------------------------------------------------
// Cubic fit

LaneBoundary fit_boundary(std::span<const Vec2> cluster, const FitParams& params) {
  if (cluster.size() < std::max<std::size_t>(params.min_points, 1)) {
    throw Error(ErrorCode::kRankDeficient,
                "cluster has " + std::to_string(cluster.size()) + " points, need " +
                    std::to_string(params.min_points));
  }
  double z_lo = cluster.front().forward;
  double z_hi = z_lo;
  for (const auto& p : cluster) {
    z_lo = std::min(z_lo, p.forward);
    z_hi = std::max(z_hi, p.forward);
  }
  if (z_hi - z_lo < params.min_span) {
    throw Error(ErrorCode::kSpanTooShort, "cluster spans " + std::to_string(z_hi - z_lo) +
                                              " m, need " + std::to_string(params.min_span));
  }
  // Fit in t = (z - mid) / half for conditioning, then expand back to z.
  const double mid = 0.5 * (z_lo + z_hi);
  const double half = z_hi > z_lo ? 0.5 * (z_hi - z_lo) : 1.0;
  const auto n = static_cast<Eigen::Index>(cluster.size());
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (cluster[static_cast<std::size_t>(i)].forward - mid) / half;
    design(i, 0) = 1.0;
    design(i, 1) = t;
    design(i, 2) = t * t;
    design(i, 3) = t * t * t;
    rhs(i) = cluster[static_cast<std::size_t>(i)].lateral;
  }
  LaneBoundary out;
  Eigen::Vector4d b;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() == 4) {
    b = qr.solve(rhs);
  } else {
    const Eigen::Matrix4d normal =
        design.transpose() * design + params.ridge * Eigen::Matrix4d::Identity();
    b = normal.ldlt().solve(design.transpose() * rhs);
    out.regularized = true;
  }
  if (!b.allFinite()) throw Error(ErrorCode::kRankDeficient, "cubic fit did not converge");

  // a_j = sum_{k>=j} b_k C(k,j) (-mid)^(k-j) / half^k
  static constexpr std::array<std::array<double, 4>, 4> kBinom{
      {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}}};
  for (int j = 0; j < 4; ++j) {
    double a = 0.0;
    for (int k = j; k < 4; ++k) {
      a += b(k) * kBinom[k][j] * std::pow(-mid, k - j) / std::pow(half, k);
    }
    out.coeffs[static_cast<std::size_t>(j)] = a;
  }
  out.z_lo = z_lo;
  out.z_hi = z_hi;
  double ss = 0.0;
  for (const auto& p : cluster) {
    const double r = p.lateral - out.lateral_at(p.forward);
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(cluster.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Road edges and lane assembly

double Polyline::lateral_at(double z) const {
  if (points.empty()) throw Error(ErrorCode::kInvalidParams, "empty polyline");
  if (z <= points.front().forward) return points.front().lateral;
  if (z >= points.back().forward) return points.back().lateral;
  const auto it = std::lower_bound(points.begin(), points.end(), z,
                                   [](const Vec2& p, double v) { return p.forward < v; });
  const Vec2& b = *it;
  const Vec2& a = *(it - 1);
  if (b.forward == a.forward) return b.lateral;
  const double w = (z - a.forward) / (b.forward - a.forward);
  return a.lateral + w * (b.lateral - a.lateral);
}

double LaneBound::lateral_at(double z) const {
  if (curve) return curve->lateral_at(std::clamp(z, curve->z_lo, curve->z_hi));
  return edge->lateral_at(z);
}

RoadBounds road_boundary(const LabelGrid& grid, int window) {
  const GridSpec& spec = grid.spec();
  std::vector<double> fwd;
  std::vector<double> left;
  std::vector<double> right;
  for (int row = spec.rows - 1; row >= 0; --row) {
    int lo = -1;
    int hi = -1;
    for (int col = 0; col < spec.cols; ++col) {
      if (!is_drivable(grid.class_at({row, col}))) continue;
      if (lo < 0) lo = col;
      hi = col;
    }
    if (lo < 0) continue;
    fwd.push_back(cell_center({row, 0}, spec).forward);
    left.push_back(cell_center({row, lo}, spec).lateral);
    right.push_back(cell_center({row, hi}, spec).lateral);
  }
  if (fwd.empty()) throw Error(ErrorCode::kNoRoad, "grid has no drivable cells");

  const int half = std::max(0, window / 2);
  auto smooth = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::vector<double> buf;
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) {
      const int h = std::min({half, i, n - 1 - i});
      buf.assign(v.begin() + (i - h), v.begin() + (i + h + 1));
      std::nth_element(buf.begin(), buf.begin() + h, buf.end());
      out[static_cast<std::size_t>(i)] = buf[static_cast<std::size_t>(h)];
    }
    return out;
  };
  const auto sl = smooth(left);
  const auto sr = smooth(right);
  RoadBounds out;
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    out.left.points.push_back({sl[i], fwd[i]});
    out.right.points.push_back({sr[i], fwd[i]});
  }
  return out;
}

std::vector<std::vector<Vec2>> link_fragments(std::vector<std::vector<Vec2>> clusters,
                                              const FitParams& params, double tolerance) {
  std::vector<std::optional<LaneBoundary>> fits(clusters.size());
  auto refit = [&](std::size_t i) {
    try {
      fits[i] = fit_boundary(clusters[i], params);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSpanTooShort && e.code() != ErrorCode::kRankDeficient) throw;
      fits[i].reset();
    }
  };
  for (std::size_t i = 0; i < clusters.size(); ++i) refit(i);
  std::set<std::pair<std::size_t, std::size_t>> refused;
  while (true) {
    double best = tolerance;
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = 0; j < clusters.size(); ++j) {
        if (i == j || !fits[i] || !fits[j] || refused.count({i, j}) > 0) continue;
        const LaneBoundary& near = *fits[i];
        const LaneBoundary& far = *fits[j];
        if (near.z_hi > far.z_lo) continue;
        const double d = std::min(std::abs(near.lateral_at(far.z_lo) - far.lateral_at(far.z_lo)),
                                  std::abs(far.lateral_at(near.z_hi) - near.lateral_at(near.z_hi)));
        if (d < best) {
          best = d;
          pick = std::pair{i, j};
        }
      }
    }
    if (!pick) break;
    const auto [i, j] = *pick;
    std::vector<Vec2> joined = clusters[i];
    joined.insert(joined.end(), clusters[j].begin(), clusters[j].end());
    LaneBoundary merged;
    try {
      merged = fit_boundary(joined, params);
    } catch (const Error&) {
      refused.insert(*pick);
      continue;
    }
    if (merged.rms_residual > 0.5 * tolerance) {
      refused.insert(*pick);
      continue;
    }
    const std::size_t keep = std::min(i, j);
    const std::size_t drop = std::max(i, j);
    clusters[keep] = std::move(joined);
    fits[keep] = merged;
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(drop));
    fits.erase(fits.begin() + static_cast<std::ptrdiff_t>(drop));
    // Indices shifted; earlier refusals no longer name the same clusters.
    refused.clear();
  }
  return clusters;
}

std::uint16_t lane_id_for_side(int side, int min_side, int max_side) {
  if (side < min_side || side > max_side || min_side > 0 || max_side < 0) {
    throw Error(ErrorCode::kInvalidParams, "side outside the lane range");
  }
  if (side == 0) return 1;
  const int mag = side < 0 ? -side : side;
  // Lanes closer to the ego lane come first; at equal distance left precedes right.
  int rank = 0;
  for (int s = min_side; s <= max_side; ++s) {
    const int m = s < 0 ? -s : s;
    if (s != 0 && m < mag) ++rank;
  }
  if (side > 0 && -mag >= min_side) ++rank;
  return static_cast<std::uint16_t>(2 + rank);
}

std::vector<LaneInstance> assemble_lanes(std::span<const LaneBoundary> boundaries,
                                         const RoadBounds* road, const GridSpec& spec,
                                         const AssemblyParams& params) {
  const double z_ref = params.z_ref;
  struct Entry {
    LaneBound bound;
    double at_ref;
  };
  std::vector<Entry> curves;
  for (const auto& b : boundaries) {
    curves.push_back({LaneBound::of(b), LaneBound::of(b).lateral_at(z_ref)});
  }
  std::stable_sort(curves.begin(), curves.end(),
                   [](const Entry& a, const Entry& b) { return a.at_ref < b.at_ref; });
  // Merge duplicate detections of one physical line, keeping the longer one.
  std::vector<Entry> merged;
  for (auto& e : curves) {
    if (!merged.empty() && e.at_ref - merged.back().at_ref < 0.5 * params.min_lane_width) {
      const auto& kept = *merged.back().bound.curve;
      const auto& cand = *e.bound.curve;
      if (cand.z_hi - cand.z_lo > kept.z_hi - kept.z_lo) merged.back() = e;
      continue;
    }
    merged.push_back(e);
  }

  std::vector<Entry> bounds;
  if (road != nullptr && !road->left.empty()) {
    const double l = road->left.lateral_at(z_ref);
    if (merged.empty() || l < merged.front().at_ref - params.min_lane_width) {
      bounds.push_back({LaneBound::of(road->left), l});
    }
  }
  bounds.insert(bounds.end(), merged.begin(), merged.end());
  if (road != nullptr && !road->right.empty()) {
    const double r = road->right.lateral_at(z_ref);
    if (merged.empty() || r > merged.back().at_ref + params.min_lane_width) {
      bounds.push_back({LaneBound::of(road->right), r});
    }
  }

  int ego = -1;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    if (bounds[i].at_ref <= 0.0 && bounds[i + 1].at_ref > 0.0) {
      ego = static_cast<int>(i);
      break;
    }
  }
  if (ego < 0) throw Error(ErrorCode::kNoEgoLane, "no boundary pair straddles the ego position");

  auto domain = [&](std::size_t i) {
    const double lo = std::max({bounds[i].bound.z_lo(), bounds[i + 1].bound.z_lo(), 0.0});
    const double hi = std::min({bounds[i].bound.z_hi(), bounds[i + 1].bound.z_hi(),
                                spec.forward_extent()});
    return std::pair{lo, hi};
  };
  auto valid = [&](std::size_t i) {
    const auto [lo, hi] = domain(i);
    return hi > lo;
  };
  if (!valid(static_cast<std::size_t>(ego))) {
    throw Error(ErrorCode::kNoEgoLane, "ego lane bounds do not overlap in forward range");
  }
  // Keep the contiguous run of valid lanes around the ego lane.
  int first = ego;
  while (first > 0 && valid(static_cast<std::size_t>(first - 1))) --first;
  int last = ego;
  while (last + 2 < static_cast<int>(bounds.size()) && valid(static_cast<std::size_t>(last + 1))) {
    ++last;
  }

  const double step = 0.5 * spec.resolution;
  std::vector<LaneInstance> lanes;
  for (int i = first; i <= last; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto [lo, hi] = domain(idx);
    std::vector<Vec2> ring;
    const int samples = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
    for (int s = 0; s <= samples; ++s) {
      const double z = lo + (hi - lo) * s / samples;
      ring.push_back({bounds[idx].bound.lateral_at(z), z});
    }
    for (int s = samples; s >= 0; --s) {
      const double z = lo + (hi - lo) * s / samples;
      ring.push_back({bounds[idx + 1].bound.lateral_at(z), z});
    }
    LaneInstance lane;
    lane.side = i - ego;
    lane.id = lane_id_for_side(lane.side, first - ego, last - ego);
    lane.left = bounds[idx].bound;
    lane.right = bounds[idx + 1].bound;
    lane.mask = polygon_mask(std::span(&ring, 1), spec);
    lanes.push_back(std::move(lane));
  }
  std::stable_sort(lanes.begin(), lanes.end(),
                   [](const LaneInstance& a, const LaneInstance& b) { return a.id < b.id; });
  return lanes;
}

// ---------------------------------------------------------------------------
// Pipeline

PaintedCloud paint_frame(const SequenceInput& seq, std::size_t frame, const WeakSupConfig& cfg) {
  const FrameInput& in = seq.frames.at(frame);
  PaintedCloud painted;
  if (in.point_labels) {
    if (in.point_labels->size() != in.cloud.size()) {
      throw Error(ErrorCode::kShapeMismatch, "point labels do not match cloud size");
    }
    painted.cloud = transform_cloud(in.cloud, seq.cam_from_lidar, CloudFrame::kCamera);
    painted.labels = *in.point_labels;
    painted.source_frame.assign(in.cloud.size(), static_cast<std::uint32_t>(frame));
  } else if (in.segmentation && seq.intrinsics) {
    painted = paint_cloud(in.cloud, *in.segmentation, *seq.intrinsics, seq.cam_from_lidar,
                          static_cast<std::uint32_t>(frame));
  } else {
    throw Error(ErrorCode::kInvalidParams,
                "frame " + std::to_string(frame) +
                    " has neither point labels nor a segmentation image with intrinsics");
  }
  mark_lane_paint(painted, cfg.marker_remission);
  return painted;
}

FrameLabels label_frame(std::span<const PosedCloud> frames, std::size_t target,
                        const WeakSupConfig& cfg) {
  FrameLabels out;
  try {
    const Pose& world_from_target = frames[target].world_from_frame;
    LabelGrid grid = accumulate_static(frames, world_from_target, cfg.grid);
    grid = fill_stationary_obstacles(grid, frames, world_from_target, cfg.obstacles);

    std::vector<Vec2> markers;
    const Pose target_from_world = world_from_target.inverse();
    for (const auto& f : frames) {
      const Pose target_from_frame = target_from_world * f.world_from_frame;
      for (std::size_t i = 0; i < f.painted.cloud.size(); ++i) {
        if (f.painted.labels[i] != PointClass::kLaneMarker) continue;
        const Eigen::Vector3d q = target_from_frame.apply(f.painted.cloud.points[i].position);
        const Vec2 p{q.x(), q.z()};
        if (cell_of(p, cfg.grid)) markers.push_back(p);
      }
    }
    const auto clusters =
        link_fragments(cluster_boundaries(markers, cfg.eps, cfg.min_pts), cfg.fit, cfg.link_tolerance);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      try {
        LaneBoundary b = fit_boundary(clusters[c], cfg.fit);
        b.cluster_id = static_cast<int>(c);
        out.needs_review = out.needs_review || b.rms_residual > cfg.review_residual;
        out.boundaries.push_back(b);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSpanTooShort && e.code() != ErrorCode::kRankDeficient) throw;
        ++out.rejected_clusters;
      }
    }
    if (!out.boundaries.empty()) {
      std::optional<RoadBounds> road;
      try {
        road = road_boundary(grid);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoRoad) throw;
      }
      out.lanes = assemble_lanes(out.boundaries, road ? &*road : nullptr, cfg.grid, cfg.assembly);
      for (const auto& lane : out.lanes) paint_mask(lane.mask, SemanticClass::kLane, lane.id, grid);
    }
    grid.validate();
    out.grid = std::move(grid);
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
    out.grid.reset();
    out.lanes.clear();
  }
  return out;
}

std::vector<FrameLabels> generate_labels(const SequenceInput& seq, const WeakSupConfig& cfg,
                                         int jobs) {
  const std::size_t n = seq.frames.size();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "sequence has no frames");
  if (seq.world_from_camera.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "sequence needs one pose per frame");
  }
  cfg.grid.validate();
  std::vector<std::optional<PaintedCloud>> painted(n);
  std::vector<std::string> paint_errors(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    try {
      seq.world_from_camera[i].validate(1e-6);
      painted[i] = paint_frame(seq, i, cfg);
    } catch (const Error& e) {
      paint_errors[i] = e.what();
    }
  });
  std::vector<PosedCloud> posed;
  std::vector<std::size_t> posed_index(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < n; ++i) {
    if (!painted[i]) continue;
    posed_index[i] = posed.size();
    posed.push_back({std::move(*painted[i]), seq.world_from_camera[i]});
  }
  std::vector<FrameLabels> results(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    if (!paint_errors[i].empty()) {
      results[i].ok = false;
      results[i].error = paint_errors[i];
      return;
    }
    results[i] = label_frame(posed, posed_index[i], cfg);
  });
  return results;
}

}  // namespace bevbench
