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

#include "bevbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "bevbench/error.hpp"

namespace bevbench {

std::array<Vec2, 4> VehicleBox::corners() const {
  const Vec2 h{std::sin(yaw), std::cos(yaw)};
  const Vec2 s{std::cos(yaw), -std::sin(yaw)};
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  auto at = [&](double a, double b) {
    return Vec2{lateral + a * h.lateral + b * s.lateral, forward + a * h.forward + b * s.forward};
  };
  return {at(hl, -hw), at(hl, hw), at(-hl, hw), at(-hl, -hw)};
}

void SceneParams::validate() const {
  grid.validate();
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidParams, m); };
  if (lane_count < 1) bad("lane_count must be >= 1");
  if (static_cast<int>(lane_widths.size()) != lane_count) bad("need one width per lane");
  for (double w : lane_widths) {
    if (!(w > 0.0)) bad("lane widths must be positive");
  }
  if (ego_lane < 0 || ego_lane >= lane_count) bad("ego_lane out of range");
  if (road_margin < 0.0 || sidewalk_width < 0.0) bad("margins must be nonnegative");
  if (!(marker_width > 0.0)) bad("marker_width must be positive");
  if (sequence_length < 1) bad("sequence_length must be >= 1");
  if (!(ego_speed >= 0.0)) bad("ego_speed must be nonnegative");
  if (!(point_density > 0.0) || !(sensor_range > 0.0)) bad("density and range must be positive");
  if (!(point_noise >= 0.0)) bad("point_noise must be nonnegative");
  for (double r : {road_remission, marker_remission, sidewalk_remission}) {
    if (r < 0.0 || r > 1.0) bad("remission values must lie in [0,1]");
  }
  for (const auto& v : vehicles) {
    if (!(v.length > 0.0) || !(v.width > 0.0)) bad("vehicle boxes need positive size");
  }
}

double shape_at(const std::array<double, 4>& c, double z) {
  return c[0] + z * (c[1] + z * (c[2] + z * c[3]));
}

std::vector<double> lane_line_offsets(const SceneParams& p) {
  double left = -0.5 * p.lane_widths[static_cast<std::size_t>(p.ego_lane)];
  for (int i = 0; i < p.ego_lane; ++i) left -= p.lane_widths[static_cast<std::size_t>(i)];
  std::vector<double> out{left};
  for (double w : p.lane_widths) out.push_back(out.back() + w);
  return out;
}

namespace {

bool inside_box(Vec2 p, const VehicleBox& box) {
  const double dl = p.lateral - box.lateral;
  const double df = p.forward - box.forward;
  const double along = dl * std::sin(box.yaw) + df * std::cos(box.yaw);
  const double across = dl * std::cos(box.yaw) - df * std::sin(box.yaw);
  return std::abs(along) <= 0.5 * box.length && std::abs(across) <= 0.5 * box.width;
}

VehicleBox shifted(const VehicleBox& b, double dl, double df) {
  VehicleBox out = b;
  out.lateral -= dl;
  out.forward -= df;
  return out;
}

double ego_z(const SceneParams& p, std::size_t frame) {
  return p.ego_speed * static_cast<double>(frame);
}

}  // namespace

bool ray_blocked(Vec2 p, const VehicleBox& box) {
  // Liang-Barsky clip of the segment origin -> p in box coordinates.
  const double s = std::sin(box.yaw);
  const double c = std::cos(box.yaw);
  auto local = [&](Vec2 q) {
    const double dl = q.lateral - box.lateral;
    const double df = q.forward - box.forward;
    return std::pair{dl * s + df * c, dl * c - df * s};
  };
  const auto [a0, b0] = local({0.0, 0.0});
  const auto [a1, b1] = local(p);
  const double hl = 0.5 * box.length;
  const double hw = 0.5 * box.width;
  if (std::abs(a0) <= hl && std::abs(b0) <= hw) return false;  // sensor inside the box
  double t_in = 0.0;
  double t_out = 1.0;
  auto clip = [&](double start, double delta, double lo, double hi) {
    if (delta == 0.0) return start >= lo && start <= hi;
    double t0 = (lo - start) / delta;
    double t1 = (hi - start) / delta;
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
    return t_in <= t_out;
  };
  if (!clip(a0, a1 - a0, -hl, hl)) return false;
  if (!clip(b0, b1 - b0, -hw, hw)) return false;
  return t_in < 1.0;
}

Mask occlusion_mask(const GridSpec& spec, const std::vector<VehicleBox>& boxes) {
  Mask out(spec);
  if (boxes.empty()) return out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Vec2 c = cell_center(spec.cell(i), spec);
    for (const auto& b : boxes) {
      if (ray_blocked(c, b)) {
        out.bits[i] = 1;
        break;
      }
    }
  }
  return out;
}

LaneBoundary Scene::true_line(std::size_t frame, std::size_t line) const {
  const double z0 = ego_z(params, frame);
  const double x0 = shape_at(params.shape, z0);
  const auto& c = params.shape;
  // shape(z + z0) expanded in powers of z.
  LaneBoundary b;
  b.coeffs[0] = shape_at(c, z0) + line_offsets.at(line) - x0;
  b.coeffs[1] = c[1] + 2.0 * c[2] * z0 + 3.0 * c[3] * z0 * z0;
  b.coeffs[2] = c[2] + 3.0 * c[3] * z0;
  b.coeffs[3] = c[3];
  b.z_lo = 0.0;
  b.z_hi = params.grid.forward_extent();
  return b;
}

SequenceInput Scene::as_sequence_input() const {
  SequenceInput in;
  for (const auto& f : frames) {
    FrameInput fi;
    fi.cloud = f.cloud;
    fi.point_labels = f.point_labels;
    in.frames.push_back(std::move(fi));
    in.world_from_camera.push_back(f.world_from_camera);
  }
  return in;
}

Scene generate_scene(const SceneParams& params) {
  params.validate();
  Scene scene;
  scene.params = params;
  scene.line_offsets = lane_line_offsets(params);
  const auto& offs = scene.line_offsets;
  const double road_lo = offs.front() - params.road_margin;
  const double road_hi = offs.back() + params.road_margin;
  const double side_lo = road_lo - params.sidewalk_width;
  const double side_hi = road_hi + params.sidewalk_width;
  const int ego = params.ego_lane;
  const GridSpec& spec = params.grid;

  for (int f = 0; f < params.sequence_length; ++f) {
    const auto frame = static_cast<std::size_t>(f);
    const double z0 = ego_z(params, frame);
    const double x0 = shape_at(params.shape, z0);
    SceneFrame out;
    out.world_from_camera = Pose::from_translation({x0, 0.0, z0});

    std::vector<VehicleBox> boxes;
    for (const auto& v : params.vehicles) boxes.push_back(shifted(v, x0, z0));

    // Ground truth by cell-center containment in the analytic regions.
    LabelGrid gt(spec);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const Cell cell = spec.cell(i);
      const Vec2 c = cell_center(cell, spec);
      const double d = c.lateral + x0 - shape_at(params.shape, c.forward + z0);
      bool vehicle = false;
      for (const auto& b : boxes) vehicle = vehicle || inside_box(c, b);
      if (vehicle) {
        gt.set(cell, SemanticClass::kVehicle);
      } else if (d >= offs.front() && d < offs.back()) {
        const auto lane = static_cast<int>(std::upper_bound(offs.begin(), offs.end(), d) -
                                           offs.begin()) - 1;
        gt.set(cell, SemanticClass::kLane, lane_id_for_side(lane - ego, -ego, params.lane_count - 1 - ego));
      } else if (d >= road_lo && d < road_hi) {
        gt.set(cell, SemanticClass::kRoad);
      } else if (d >= side_lo && d < side_hi) {
        gt.set(cell, SemanticClass::kSidewalk);
      }
    }
    const Mask occ = occlusion_mask(spec, boxes);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (occ.bits[i] != 0) gt.set_occluded(spec.cell(i), true);
    }
    out.ground_truth = std::move(gt);

    // Lidar: uniform ground samples over the road corridor, vehicles on top.
    std::mt19937_64 rng(params.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(f) + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, params.point_noise);
    auto jitter = [&] { return params.point_noise > 0.0 ? noise(rng) : 0.0; };
    const double corridor = side_hi - side_lo;
    const auto n_ground =
        static_cast<std::size_t>(std::llround(params.point_density * params.sensor_range * corridor));
    out.cloud.frame = CloudFrame::kCamera;
    for (std::size_t k = 0; k < n_ground; ++k) {
      const double z = unit(rng) * params.sensor_range;
      const double d = side_lo + unit(rng) * corridor;
      const Vec2 p{shape_at(params.shape, z + z0) - x0 + d, z};
      bool hidden = false;
      for (const auto& b : boxes) hidden = hidden || inside_box(p, b) || ray_blocked(p, b);
      if (hidden) continue;
      PointClass cls = PointClass::kSidewalk;
      double rem = params.sidewalk_remission;
      if (d >= road_lo && d < road_hi) {
        cls = PointClass::kRoad;
        rem = params.road_remission;
        for (double o : offs) {
          if (std::abs(d - o) <= 0.5 * params.marker_width) rem = params.marker_remission;
        }
      }
      CloudPoint pt;
      pt.position = {p.lateral + jitter(), params.camera_height + jitter(), p.forward + jitter()};
      pt.remission = rem;
      out.cloud.points.push_back(pt);
      out.point_labels.push_back(cls);
    }
    for (const auto& b : boxes) {
      const auto n_box = static_cast<std::size_t>(
          std::llround(params.point_density * b.length * b.width));
      for (std::size_t k = 0; k < n_box; ++k) {
        const double a = (unit(rng) - 0.5) * b.length;
        const double w = (unit(rng) - 0.5) * b.width;
        const Vec2 p{b.lateral + a * std::sin(b.yaw) + w * std::cos(b.yaw),
                     b.forward + a * std::cos(b.yaw) - w * std::sin(b.yaw)};
        const double jx = jitter();
        const double jy = jitter();
        const double jz = jitter();
        if (p.forward < 0.0 || p.forward > params.sensor_range) continue;
        CloudPoint pt;
        pt.position = {p.lateral + jx, params.camera_height - 1.0 + jy, p.forward + jz};
        pt.remission = 0.3;
        out.cloud.points.push_back(pt);
        out.point_labels.push_back(PointClass::kVehicle);
      }
    }
    scene.frames.push_back(std::move(out));
  }
  return scene;
}

SimulatedPrediction simulate_prediction(const LabelGrid& gt, double noise_level,
                                        std::uint64_t seed) {
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "noise level must lie in [0,1]");
  }
  const GridSpec& spec = gt.spec();
  SimulatedPrediction out{ConfidenceGrid(spec, kNumSemanticClasses),
                          std::vector<std::uint16_t>(spec.size(), 0)};
  std::uint16_t max_id = 0;
  for (auto id : gt.lane_ids()) max_id = std::max(max_id, id);

  std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, kNumSemanticClasses - 1);
  std::uniform_int_distribution<int> any_id(1, std::max<int>(1, max_id));
  std::array<double, kNumSemanticClasses> u{};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const int truth = static_cast<int>(gt.classes()[i]);
    int label = truth;
    const bool flip = unit(rng) < 0.5 * noise_level;
    const int shift = other(rng);
    if (flip) label = (truth + shift) % kNumSemanticClasses;
    double total = 0.0;
    for (auto& v : u) {
      v = unit(rng);
      total += v;
    }
    const int random_id = any_id(rng);
    for (int c = 0; c < kNumSemanticClasses; ++c) {
      const double onehot = c == label ? 1.0 : 0.0;
      const double p = (1.0 - noise_level) * onehot + noise_level * u[static_cast<std::size_t>(c)] / total;
      out.confidence.channel(c)[i] = static_cast<float>(std::clamp(p, 0.0, 1.0));
    }
    if (label == static_cast<int>(SemanticClass::kLane)) {
      out.lane_ids[i] = truth == label ? gt.lane_ids()[i] : static_cast<std::uint16_t>(random_id);
    }
  }
  out.confidence.lane_ids = out.lane_ids;
  return out;
}

}  // namespace bevbench
