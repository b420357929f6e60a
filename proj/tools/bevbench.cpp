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

// bevbench command-line front end.
//
//   bevbench synth PARAMS.toml --out DIR
//   bevbench gen-labels MANIFEST --out DIR
//   bevbench eval MANIFEST --out DIR [--name METHOD]
//   bevbench voxelize MANIFEST --out DIR
//   bevbench consistency MANIFEST --out DIR
//   bevbench report REPORT.json... --out DIR [--render]
//
// Exit codes: 0 success, 1 usage or configuration error, 2 partial data
// failure (some frames could not be processed).

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#ifdef BEVBENCH_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "bevbench/config.hpp"
#include "bevbench/consistency.hpp"
#include "bevbench/dataio.hpp"
#include "bevbench/error.hpp"
#include "bevbench/metrics.hpp"
#include "bevbench/parallel.hpp"
#include "bevbench/pseudolidar.hpp"
#include "bevbench/synth.hpp"
#include "bevbench/weaksup.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bevbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;

// Raised for problems that make the whole invocation meaningless.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::string frame_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%06zu", i);
  return buf;
}

std::string number_key(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

config::ToolConfig load_tool_config(const Common& c) {
  if (c.config_path.empty()) {
    config::ToolConfig cfg;
    cfg.finalize();
    return cfg;
  }
  return config::load_config(c.config_path);
}

io::SequenceManifest load_manifest_or_fail(const std::string& path) {
  try {
    return io::load_manifest(path);
  } catch (const Error& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
}

void require_grid_match(const io::SequenceManifest& m, const config::ToolConfig& cfg) {
  if (!(m.grid == cfg.grid)) {
    throw UsageError("manifest grid (" + std::to_string(m.grid.rows) + "x" +
                     std::to_string(m.grid.cols) + " @ " + number_key(m.grid.resolution) +
                     " m) differs from config grid");
  }
}

std::vector<Pose> world_poses(const io::SequenceManifest& m) {
  std::vector<Pose> out(m.frames.size());
  if (!m.poses) {
    if (m.frames.size() > 1) spdlog::warn("manifest has no poses; assuming a static camera");
    return out;
  }
  std::vector<Pose> poses;
  try {
    poses = io::load_poses(m.resolve(*m.poses));
  } catch (const Error& e) {
    throw UsageError(std::string("poses: ") + e.what());
  }
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const int idx = m.frames[i].pose_index.value_or(static_cast<int>(i));
    if (idx < 0 || static_cast<std::size_t>(idx) >= poses.size()) {
      throw UsageError("frame " + std::to_string(i) + " refers to missing pose " +
                       std::to_string(idx));
    }
    out[i] = poses[static_cast<std::size_t>(idx)];
  }
  return out;
}

json frame_error(std::size_t i, const std::string& what) {
  return {{"frame", i}, {"error", what}};
}

// ---------------------------------------------------------------------------
// synth

int run_synth(const Common& c, const std::string& params_path) {
  const auto cfg = load_tool_config(c);
  config::SynthConfig sc = config::load_synth_config(params_path, cfg.grid);
  if (c.seed) sc.scene.seed = *c.seed;
  const fs::path out = c.out;
  spdlog::info("synth: {} frames, {} lanes, seed {}", sc.scene.sequence_length, sc.scene.lane_count,
               sc.scene.seed);
  const Scene scene = generate_scene(sc.scene);

  io::SequenceManifest m;
  m.sequence_id = "synth-" + std::to_string(sc.scene.seed);
  m.grid = cfg.grid;
  m.poses = "poses.txt";
  m.root = out;

  std::vector<Pose> poses;
  const std::size_t n = scene.frames.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = scene.frames[i];
    const std::string name = frame_name(i);
    io::write_cloud(out / "clouds" / (name + ".bin"), f.cloud);
    io::write_point_labels(out / "point_labels" / (name + ".label"), f.point_labels);
    io::write_grid(out / "ground_truth" / (name + ".bevg"), f.ground_truth);
    poses.push_back(f.world_from_camera);
    io::FrameRecord r;
    r.timestamp = 0.1 * static_cast<double>(i);
    r.cloud = "clouds/" + name + ".bin";
    r.point_labels = "point_labels/" + name + ".label";
    r.label = "ground_truth/" + name + ".bevg";
    r.pose_index = static_cast<int>(i);
    m.frames.push_back(r);
  }
  io::write_poses(out / "poses.txt", poses);
  io::write_manifest(out / "manifest.json", m);

  json level_manifests = json::array();
  for (std::size_t l = 0; l < sc.noise_levels.size(); ++l) {
    const double noise = sc.noise_levels[l];
    const std::string tag = "noise_" + number_key(noise);
    io::SequenceManifest pm = m;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t seed = sc.scene.seed * 0x9E3779B97F4A7C15ull + 1000003ull * (l + 1) + i;
      const auto pred = simulate_prediction(scene.frames[i].ground_truth, noise, seed);
      ConfidenceGrid dynamic(cfg.grid, 1);
      const auto vehicle = pred.confidence.channel(static_cast<int>(SemanticClass::kVehicle));
      std::copy(vehicle.begin(), vehicle.end(), dynamic.probs.begin());
      const std::string base = "predictions/" + tag + "/" + frame_name(i);
      io::write_grid(out / (base + ".bevg"), pred.confidence);
      io::write_grid(out / (base + "_dynamic.bevg"), dynamic);
      pm.frames[i].prediction = base + ".bevg";
      pm.frames[i].dynamic_prediction = base + "_dynamic.bevg";
    }
    pm.sequence_id = m.sequence_id + "-" + tag;
    const std::string file = "manifest_" + tag + ".json";
    io::write_manifest(out / file, pm);
    level_manifests.push_back({{"noise", noise}, {"manifest", file}});
  }

  json truth;
  truth["line_offsets"] = scene.line_offsets;
  truth["ego_lane"] = sc.scene.ego_lane;
  json frames = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json lines = json::array();
    for (std::size_t k = 0; k < scene.line_offsets.size(); ++k) {
      lines.push_back(scene.true_line(i, k).coeffs);
    }
    frames.push_back({{"frame", i}, {"lines", lines}});
  }
  truth["frames"] = frames;

  json summary;
  summary["command"] = "synth";
  summary["config"] = cfg.to_json();
  summary["synth"] = sc.to_json();
  summary["prediction_manifests"] = level_manifests;
  summary["truth"] = truth;
  write_json(out / "synth_summary.json", summary);
  write_json(out / "config.json", cfg.to_json());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen-labels

json boundary_json(const LaneBoundary& b) {
  return {{"coeffs", b.coeffs},
          {"z_lo", b.z_lo},
          {"z_hi", b.z_hi},
          {"rms_residual", b.rms_residual},
          {"regularized", b.regularized}};
}

int run_gen_labels(const Common& c, const std::string& manifest_path) {
  const auto cfg = load_tool_config(c);
  const auto m = load_manifest_or_fail(manifest_path);
  require_grid_match(m, cfg);
  if (m.frames.empty()) throw UsageError("no frames");
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    if (!m.frames[i].cloud) throw UsageError("frame " + std::to_string(i) + " has no cloud path");
    if (!m.frames[i].point_labels && !m.frames[i].semantic) {
      throw UsageError("frame " + std::to_string(i) + " has neither point labels nor a semantic image");
    }
    if (!m.frames[i].point_labels && !m.intrinsics) {
      throw UsageError("semantic images need camera intrinsics in the manifest");
    }
  }

  SequenceInput seq;
  seq.world_from_camera = world_poses(m);
  seq.intrinsics = m.intrinsics;
  seq.cam_from_lidar = m.cam_from_lidar;
  seq.frames.resize(m.frames.size());
  // Frames whose inputs fail to load are reported and left out of the
  // multi-frame accumulation.
  std::vector<std::string> load_errors(m.frames.size());
  parallel_for(m.frames.size(), c.jobs, [&](std::size_t i) {
    const auto& r = m.frames[i];
    try {
      seq.frames[i].cloud = io::load_cloud(m.resolve(*r.cloud));
      if (r.point_labels) {
        seq.frames[i].point_labels = io::load_point_labels(m.resolve(*r.point_labels));
        if (seq.frames[i].point_labels->size() != seq.frames[i].cloud.size()) {
          throw Error(ErrorCode::kShapeMismatch, "point label count differs from cloud size");
        }
      } else {
        seq.frames[i].segmentation = io::load_segmentation(m.resolve(*r.semantic));
      }
    } catch (const std::exception& e) {
      load_errors[i] = e.what();
    }
  });

  SequenceInput usable;
  usable.intrinsics = seq.intrinsics;
  usable.cam_from_lidar = seq.cam_from_lidar;
  std::vector<std::size_t> usable_index;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    if (!load_errors[i].empty()) {
      spdlog::error("frame {}: {}", i, load_errors[i]);
      continue;
    }
    usable.frames.push_back(std::move(seq.frames[i]));
    usable.world_from_camera.push_back(seq.world_from_camera[i]);
    usable_index.push_back(i);
  }
  std::vector<FrameLabels> labels;
  if (!usable.frames.empty()) labels = generate_labels(usable, cfg.weaksup, c.jobs);

  const fs::path out = c.out;
  json frames = json::array();
  bool any_failed = false;
  std::vector<const FrameLabels*> by_frame(m.frames.size(), nullptr);
  for (std::size_t u = 0; u < usable_index.size(); ++u) by_frame[usable_index[u]] = &labels[u];
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    json fj{{"frame", i}};
    const FrameLabels* fl = by_frame[i];
    if (fl == nullptr || !fl->ok) {
      any_failed = true;
      fj["status"] = "failed";
      fj["error"] = fl == nullptr ? load_errors[i] : fl->error;
      if (fl != nullptr) spdlog::error("frame {}: {}", i, fl->error);
      frames.push_back(fj);
      continue;
    }
    const std::string file = "labels/" + frame_name(i) + ".bevg";
    io::write_grid(out / file, *fl->grid);
    if (cfg.io.export_png) {
      io::export_png(*fl->grid, out / "labels" / (frame_name(i) + ".png"), m.palette);
    }
    fj["status"] = "ok";
    fj["output"] = file;
    json bs = json::array();
    for (const auto& b : fl->boundaries) bs.push_back(boundary_json(b));
    fj["boundaries"] = bs;
    json lanes = json::array();
    for (const auto& l : fl->lanes) lanes.push_back({{"id", l.id}, {"side", l.side}});
    fj["lanes"] = lanes;
    fj["rejected_clusters"] = fl->rejected_clusters;
    fj["needs_review"] = fl->needs_review;
    frames.push_back(fj);
  }
  json summary;
  summary["command"] = "gen-labels";
  summary["config"] = cfg.to_json();
  summary["manifest"] = manifest_path;
  summary["frames"] = frames;
  write_json(out / "summary.json", summary);
  write_json(out / "config.json", cfg.to_json());
  return any_failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// eval

json stat_json(const MetricStat& s) {
  return {{"value", opt_json(s.value)}, {"frames", s.frames}, {"excluded", s.excluded}};
}

json report_json(const EvalReport& r) {
  json j;
  j["frame_count"] = r.frame_count;
  json classes = json::object();
  for (const auto cls : scored_classes()) {
    json cj;
    if (auto it = r.class_iou.find(cls); it != r.class_iou.end()) cj["iou"] = stat_json(it->second);
    if (auto it = r.class_ap.find(cls); it != r.class_ap.end()) cj["ap"] = stat_json(it->second);
    classes[class_name(cls)] = cj;
  }
  j["classes"] = classes;
  j["miou"] = opt_json(r.miou);
  j["map"] = opt_json(r.map);
  j["road_iou"] = stat_json(r.road_iou);
  j["road_ap"] = stat_json(r.road_ap);
  j["occluded_miou"] = stat_json(r.occluded_miou);
  j["ego_iou"] = stat_json(r.ego_iou);
  j["ego_ap"] = stat_json(r.ego_ap);
  json lanes = json::object();
  for (const auto& [thr, score] : r.lane_detection) {
    lanes[number_key(thr)] =
        score ? json{{"ap", score->ap}, {"recall", score->recall}} : json(nullptr);
  }
  j["lane_detection"] = lanes;
  j["exclusions"] = r.exclusions;
  return j;
}

std::string cell(const json& v) {
  if (v.is_null()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v.get<double>());
  return buf;
}

std::string eval_table(const json& rep) {
  std::string t = "| metric | value |\n|---|---|\n";
  auto row = [&](const std::string& name, const json& v) { t += "| " + name + " | " + cell(v) + " |\n"; };
  for (const auto cls : scored_classes()) {
    const std::string name = class_name(cls);
    if (!rep["classes"].contains(name)) continue;
    const auto& cj = rep["classes"][name];
    if (cj.contains("iou")) row(name + " IoU", cj["iou"]["value"]);
    if (cj.contains("ap")) row(name + " AP", cj["ap"]["value"]);
  }
  row("mIoU", rep["miou"]);
  row("mAP", rep["map"]);
  row("drivable IoU", rep["road_iou"]["value"]);
  row("drivable AP", rep["road_ap"]["value"]);
  row("occluded road mIoU", rep["occluded_miou"]["value"]);
  row("ego-lane IoU", rep["ego_iou"]["value"]);
  row("ego-lane AP", rep["ego_ap"]["value"]);
  for (const auto& [thr, s] : rep["lane_detection"].items()) {
    row("lane AP@" + thr, s.is_null() ? json(nullptr) : s["ap"]);
    row("lane recall@" + thr, s.is_null() ? json(nullptr) : s["recall"]);
  }
  return t;
}

int run_eval(const Common& c, const std::string& manifest_path, const std::string& method) {
  const auto cfg = load_tool_config(c);
  const auto m = load_manifest_or_fail(manifest_path);
  require_grid_match(m, cfg);
  if (m.frames.empty()) throw UsageError("no frames");

  const std::size_t n = m.frames.size();
  std::vector<std::optional<LabelGrid>> gts(n);
  std::vector<std::optional<ConfidenceGrid>> preds(n);
  std::vector<std::string> errors(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const auto& r = m.frames[i];
    try {
      if (!r.label) throw Error(ErrorCode::kIoError, "no ground-truth label path");
      if (!r.prediction) throw Error(ErrorCode::kIoError, "no prediction path");
      gts[i] = io::read_label_grid(m.resolve(*r.label));
      preds[i] = io::read_confidence_grid(m.resolve(*r.prediction));
      if (!(gts[i]->spec() == cfg.grid) || !(preds[i]->spec == cfg.grid)) {
        throw Error(ErrorCode::kShapeMismatch, "grid differs from config grid");
      }
      if (preds[i]->num_classes != kNumSemanticClasses) {
        throw Error(ErrorCode::kShapeMismatch, "prediction must have one channel per class");
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<LabelGrid> ok_gts;
  std::vector<ConfidenceGrid> ok_preds;
  json frame_errors = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      spdlog::error("frame {}: {}", i, errors[i]);
      frame_errors.push_back(frame_error(i, errors[i]));
      continue;
    }
    ok_gts.push_back(std::move(*gts[i]));
    ok_preds.push_back(std::move(*preds[i]));
  }

  json rep;
  if (!ok_gts.empty()) {
    rep = report_json(evaluate_sequence(ok_gts, ok_preds, cfg.metrics, c.jobs));
  } else {
    rep = report_json(EvalReport{});
  }
  json out_j;
  out_j["command"] = "eval";
  out_j["method"] = method.empty() ? m.sequence_id : method;
  out_j["manifest"] = manifest_path;
  out_j["config"] = cfg.to_json();
  out_j["report"] = rep;
  out_j["frame_errors"] = frame_errors;
  const fs::path out = c.out;
  write_json(out / "report.json", out_j);
  io::write_text_atomic(out / "report.md", "# " + out_j["method"].get<std::string>() + "\n\n" +
                                                eval_table(rep));
  write_json(out / "config.json", cfg.to_json());
  std::fputs(eval_table(rep).c_str(), stdout);
  return frame_errors.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// voxelize

int run_voxelize(const Common& c, const std::string& manifest_path) {
  const auto cfg = load_tool_config(c);
  const auto m = load_manifest_or_fail(manifest_path);
  require_grid_match(m, cfg);
  if (m.frames.empty()) throw UsageError("no frames");
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const auto& r = m.frames[i];
    if (!r.depth && !r.cloud) {
      throw UsageError("frame " + std::to_string(i) + " has neither a depth map nor a cloud");
    }
    if (r.depth && !m.intrinsics) throw UsageError("depth maps need camera intrinsics");
  }

  const std::size_t n = m.frames.size();
  std::vector<json> results(n);
  std::vector<bool> failed(n, false);
  const fs::path out = c.out;
  // Frames run one at a time with the thread pool inside voxelize, so the
  // peak memory stays at one depth map.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = m.frames[i];
    json fj{{"frame", i}};
    try {
      PointCloud cloud;
      if (r.depth) {
        const DepthMap depth = io::load_depth(m.resolve(*r.depth));
        std::optional<ColorImage> color;
        if (r.rgb) color = io::load_color(m.resolve(*r.rgb));
        cloud = backproject_depth(depth, *m.intrinsics, color ? &*color : nullptr);
      } else {
        cloud = transform_cloud(io::load_cloud(m.resolve(*r.cloud)), m.cam_from_lidar,
                                CloudFrame::kCamera);
      }
      const VoxelVolume vol = voxelize(cloud, cfg.voxel, c.jobs);
      const std::uint64_t in_range = count_in_range(cloud, cfg.voxel);
      const std::uint64_t total = vol.total_count();
      if (in_range != total) {
        throw Error(ErrorCode::kInvalidSpec, "point-count conservation violated");
      }
      const std::string file = "volumes/" + frame_name(i) + ".bevg";
      io::write_grid(out / file, vol);
      if (cfg.io.export_png) {
        io::export_png(flatten_occupancy(vol, cfg.saturation),
                       out / "volumes" / (frame_name(i) + ".png"));
      }
      fj["status"] = "ok";
      fj["output"] = file;
      fj["points"] = cloud.size();
      fj["in_range"] = in_range;
      fj["voxel_total"] = total;
      fj["conserved"] = true;
    } catch (const std::exception& e) {
      spdlog::error("frame {}: {}", i, e.what());
      failed[i] = true;
      fj["status"] = "failed";
      fj["error"] = e.what();
    }
    results[i] = fj;
  }
  json summary;
  summary["command"] = "voxelize";
  summary["config"] = cfg.to_json();
  summary["manifest"] = manifest_path;
  summary["voxel_spec"] = {{"resolution", cfg.voxel.bev.resolution},
                           {"channels", cfg.voxel.channels},
                           {"y_min", cfg.voxel.y_min},
                           {"y_max", cfg.voxel.y_max},
                           {"channel_height", cfg.voxel.channel_height()}};
  summary["frames"] = results;
  write_json(out / "summary.json", summary);
  write_json(out / "config.json", cfg.to_json());
  return std::find(failed.begin(), failed.end(), true) != failed.end() ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// consistency

int run_consistency(const Common& c, const std::string& manifest_path) {
  const auto cfg = load_tool_config(c);
  const auto m = load_manifest_or_fail(manifest_path);
  require_grid_match(m, cfg);
  if (m.frames.size() < 2) throw UsageError("consistency needs at least 2 frames");
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    if (!m.frames[i].prediction) {
      throw UsageError("frame " + std::to_string(i) + " has no prediction path");
    }
  }
  const std::size_t n = m.frames.size();
  LayoutSequence seq;
  seq.statics.resize(n);
  seq.dynamics.resize(n);
  std::vector<std::optional<LabelGrid>> gts(n);
  std::vector<std::string> errors(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const auto& r = m.frames[i];
    try {
      seq.statics[i] = io::read_confidence_grid(m.resolve(*r.prediction));
      if (r.dynamic_prediction) {
        seq.dynamics[i] = io::read_confidence_grid(m.resolve(*r.dynamic_prediction));
      } else {
        const int v = static_cast<int>(SemanticClass::kVehicle);
        if (seq.statics[i].num_classes <= v) {
          throw Error(ErrorCode::kShapeMismatch, "no dynamic prediction and no vehicle channel");
        }
        ConfidenceGrid d(seq.statics[i].spec, 1);
        const auto ch = seq.statics[i].channel(v);
        std::copy(ch.begin(), ch.end(), d.probs.begin());
        seq.dynamics[i] = std::move(d);
      }
      if (r.label) gts[i] = io::read_label_grid(m.resolve(*r.label));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  json frame_errors = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      spdlog::error("frame {}: {}", i, errors[i]);
      frame_errors.push_back(frame_error(i, errors[i]));
    }
  }

  json scores{{"sup", nullptr}, {"short", nullptr}, {"long", nullptr}, {"total", nullptr}};
  if (frame_errors.empty()) {
    if (cfg.warp) {
      const auto poses = world_poses(m);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        seq.prev_from_next.push_back(poses[i].inverse() * poses[i + 1]);
      }
    }
    const bool all_gt = std::all_of(gts.begin(), gts.end(), [](const auto& g) { return g.has_value(); });
    std::optional<double> sup;
    if (all_gt) {
      std::vector<SupervisedItem> batch;
      for (std::size_t i = 0; i < n; ++i) {
        batch.push_back({&seq.statics[i], &*gts[i], &seq.dynamics[i], &*gts[i]});
      }
      sup = sup_loss(batch);
    } else {
      spdlog::info("ground truth missing for some frames; supervised term omitted");
    }
    const double short_term = short_consistency(seq, cfg.warp);
    const std::optional<double> long_term =
        n >= 3 ? std::optional<double>(long_consistency(seq, cfg.warp)) : std::nullopt;
    scores["sup"] = opt_json(sup);
    scores["short"] = short_term;
    scores["long"] = opt_json(long_term);
    scores["total"] = total_score(sup.value_or(0.0), short_term, long_term.value_or(0.0), cfg.weights);
    if (!cfg.weights.ordered()) spdlog::warn("consistency weights are not ordered sup > short > long");
  }
  json out_j;
  out_j["command"] = "consistency";
  out_j["config"] = cfg.to_json();
  out_j["manifest"] = manifest_path;
  out_j["frames"] = n;
  out_j["short_pairs"] = short_range_pairs(static_cast<int>(n)).size();
  out_j["long_pairs"] = long_range_pairs(static_cast<int>(n)).size();
  out_j["scores"] = scores;
  out_j["frame_errors"] = frame_errors;
  const fs::path out = c.out;
  write_json(out / "consistency.json", out_j);
  write_json(out / "config.json", cfg.to_json());
  return frame_errors.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// report

io::RawImage render_argmax(const ConfidenceGrid& g, const io::Palette& palette) {
  io::RawImage img{g.spec.cols, g.spec.rows, 3, 8, {}};
  for (std::size_t i = 0; i < g.spec.size(); ++i) {
    int best = 0;
    for (int k = 1; k < g.num_classes; ++k) {
      if (g.channel(k)[i] > g.channel(best)[i]) best = k;
    }
    io::Rgb color{0, 0, 0};
    if (best < kNumSemanticClasses) {
      if (auto it = palette.find(static_cast<SemanticClass>(best)); it != palette.end()) {
        color = it->second;
      }
    }
    img.samples.insert(img.samples.end(), color.begin(), color.end());
  }
  return img;
}

int run_report(const Common& c, const std::vector<std::string>& inputs, bool render) {
  const auto cfg = load_tool_config(c);
  if (inputs.empty()) throw UsageError("report needs at least one eval report");
  std::vector<json> reports;
  for (const auto& p : inputs) {
    try {
      const auto bytes = io::read_file(p);
      json j = json::parse(bytes.begin(), bytes.end());
      if (j.value("command", "") != "eval") throw UsageError(p + " is not an eval report");
      reports.push_back(std::move(j));
    } catch (const json::exception& e) {
      throw UsageError(p + ": " + e.what());
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }

  struct Column {
    std::string title;
    std::function<json(const json&)> get;
  };
  auto stat = [](const char* cls, const char* metric) {
    return [=](const json& r) {
      const auto& classes = r["classes"];
      if (!classes.contains(cls) || !classes[cls].contains(metric)) return json(nullptr);
      return classes[cls][metric]["value"];
    };
  };
  std::vector<Column> cols{
      {"Road mIoU", [](const json& r) { return r["road_iou"]["value"]; }},
      {"Road mAP", [](const json& r) { return r["road_ap"]["value"]; }},
      {"Vehicle mIoU", stat("vehicle", "iou")},
      {"Vehicle mAP", stat("vehicle", "ap")},
      {"Occluded mIoU", [](const json& r) { return r["occluded_miou"]["value"]; }},
      {"Ego-lane IoU", [](const json& r) { return r["ego_iou"]["value"]; }},
      {"Ego-lane AP", [](const json& r) { return r["ego_ap"]["value"]; }},
      {"mIoU", [](const json& r) { return r["miou"]; }},
      {"mAP", [](const json& r) { return r["map"]; }},
  };
  for (double thr : cfg.metrics.lane_iou_thresholds) {
    const std::string key = number_key(thr);
    cols.push_back({"Lane AP@" + key, [key](const json& r) {
                      const auto& l = r["lane_detection"];
                      return l.contains(key) && !l[key].is_null() ? l[key]["ap"] : json(nullptr);
                    }});
  }

  std::string table = "| Method |";
  std::string rule = "|---|";
  for (const auto& col : cols) {
    table += " " + col.title + " |";
    rule += "---|";
  }
  table += "\n" + rule + "\n";
  json rows = json::array();
  for (const auto& rep : reports) {
    const std::string method = rep.value("method", std::string("?"));
    table += "| " + method + " |";
    json row{{"method", method}};
    for (const auto& col : cols) {
      const json v = col.get(rep["report"]);
      table += " " + cell(v) + " |";
      row[col.title] = v;
    }
    table += "\n";
    rows.push_back(row);
  }

  const fs::path out = c.out;
  int code = kExitOk;
  json renders = json::array();
  if (render) {
    for (const auto& rep : reports) {
      const std::string method = rep.value("method", std::string("?"));
      try {
        const auto m = io::load_manifest(rep["manifest"].get<std::string>());
        for (std::size_t i = 0; i < m.frames.size(); ++i) {
          const auto& r = m.frames[i];
          const fs::path dir = out / "renders" / method;
          if (r.label) {
            io::export_png(io::read_label_grid(m.resolve(*r.label)), dir / (frame_name(i) + "_gt.png"),
                           m.palette);
          }
          if (r.prediction) {
            io::write_png(dir / (frame_name(i) + "_pred.png"),
                          render_argmax(io::read_confidence_grid(m.resolve(*r.prediction)), m.palette));
          }
        }
        renders.push_back({{"method", method}, {"dir", "renders/" + method}});
      } catch (const std::exception& e) {
        spdlog::error("render {}: {}", method, e.what());
        code = kExitPartial;
      }
    }
  }

  json out_j;
  out_j["command"] = "report";
  out_j["config"] = cfg.to_json();
  out_j["inputs"] = inputs;
  out_j["rows"] = rows;
  out_j["renders"] = renders;
  write_json(out / "comparison.json", out_j);
  io::write_text_atomic(out / "comparison.md", table);
  write_json(out / "config.json", cfg.to_json());
  std::fputs(table.c_str(), stdout);
  return code;
}

bool setup_logging() {
  auto logger = spdlog::stderr_color_mt("bevbench");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("BEVBENCH_LOG");
  const std::string level = env != nullptr ? env : "warn";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "warn") spdlog::set_level(spdlog::level::warn);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else {
    spdlog::error("BEVBENCH_LOG must be one of error, warn, info, debug (got '{}')", level);
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (!setup_logging()) return kExitUsage;

  CLI::App app{"Bird's-eye-view layout benchmarking toolkit"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", common.config_path, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed_value, "Random seed override");
    auto* out = sub->add_option("--out", common.out, "Output directory");
    if (needs_out) out->required();
  };

  std::string params, manifest, method;
  std::vector<std::string> reports;
  bool render = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("params", params, "Scene parameter file (TOML)")->required()->check(CLI::ExistingFile);
  add_common(synth, true);

  auto* gen = app.add_subcommand("gen-labels", "Generate weak BEV labels from a sequence");
  gen->add_option("manifest", manifest, "Sequence manifest (JSON)")->required();
  add_common(gen, true);

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("manifest", manifest, "Sequence manifest with predictions")->required();
  eval->add_option("--name", method, "Method name used in reports");
  add_common(eval, true);

  auto* vox = app.add_subcommand("voxelize", "Voxelize depth maps or clouds");
  vox->add_option("manifest", manifest, "Sequence manifest")->required();
  add_common(vox, true);

  auto* cons = app.add_subcommand("consistency", "Temporal consistency scores of predictions");
  cons->add_option("manifest", manifest, "Sequence manifest with predictions")->required();
  add_common(cons, true);

  auto* rep = app.add_subcommand("report", "Merge eval reports into one table");
  rep->add_option("reports", reports, "Eval report.json files")->required();
  rep->add_flag("--render", render, "Render ground truth and predictions as PNG");
  add_common(rep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) common.seed = seed_value;
  }

  try {
    if (synth->parsed()) return run_synth(common, params);
    if (gen->parsed()) return run_gen_labels(common, manifest);
    if (eval->parsed()) return run_eval(common, manifest, method);
    if (vox->parsed()) return run_voxelize(common, manifest);
    if (cons->parsed()) return run_consistency(common, manifest);
    if (rep->parsed()) return run_report(common, reports, render);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::kConfigError ? kExitUsage : kExitPartial;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitPartial;
  }
  return kExitUsage;
}
