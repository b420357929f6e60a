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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevbench/grid.hpp"
#include "bevbench/lanes.hpp"

namespace bevbench {

// |pred & gt| / |pred | gt|; 1.0 when both are empty. Throws kShapeMismatch.
double iou(const Mask& pred, const Mask& gt);

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
  // Confidence of the tie group that produced this point.
  double threshold = 0.0;
};

using PrCurve = std::vector<PrPoint>;

// Sweep over cells in descending confidence; equal confidences form one block.
PrCurve pr_curve(std::span<const float> confidence, const Mask& gt);

// All-point AP = sum_k (R_k - R_{k-1}) * P_k over the sweep, no envelope.
double area_under(const PrCurve& curve);

// Throws kEmptyGroundTruth when gt has no cells, kShapeMismatch on size.
double average_precision(std::span<const float> confidence, const Mask& gt);

Mask binarize(std::span<const float> confidence, const GridSpec& spec, float threshold = 0.5f);

double miou_from_confidence(const ConfidenceGrid& conf, const LabelGrid& gt, SemanticClass cls,
                            float threshold = 0.5f);

// IoU restricted to occluded cells. Throws kNoOccludedCells.
double occluded_miou(const Mask& pred, const Mask& gt, const Mask& occlusion);

// One instance per distinct nonzero id, in increasing id order. Confidence is
// the mean of `conf_channel` over the instance when `conf` is given.
std::vector<LaneInstance> extract_lane_instances(std::span<const std::uint16_t> lane_ids,
                                                 const GridSpec& spec,
                                                 const ConfidenceGrid* conf = nullptr,
                                                 int conf_channel = 0);

struct DetectionScore {
  double ap = 0.0;
  double recall = 0.0;
};

// Per-frame outcome of greedy matching, ready to be pooled.
struct MatchedDetection {
  double confidence = 0.0;
  bool true_positive = false;
};

// Predictions in descending confidence each take the unmatched ground-truth
// lane of highest IoU; a match counts when IoU > threshold.
std::vector<MatchedDetection> match_lanes(std::span<const LaneInstance> preds,
                                          std::span<const LaneInstance> gts, double iou_threshold);

// Same rule on a precomputed IoU matrix (iou[p][g]).
std::vector<MatchedDetection> match_by_iou(std::span<const double> confidences,
                                           const std::vector<std::vector<double>>& iou,
                                           double iou_threshold);

// AP and recall from pooled detections; throws kNoGroundTruth when
// total_gt == 0.
DetectionScore score_detections(std::vector<MatchedDetection> detections, std::size_t total_gt);

DetectionScore lane_detection_score(std::span<const LaneInstance> preds,
                                    std::span<const LaneInstance> gts, double iou_threshold);

// ---------------------------------------------------------------------------
// Report

struct EvalOptions {
  float threshold = 0.5f;
  std::vector<double> lane_iou_thresholds{0.5, 0.7};
};

// A metric averaged over frames. `value` is empty when every frame was
// excluded (e.g. the class never appears in the ground truth).
struct MetricStat {
  std::optional<double> value;
  int frames = 0;
  int excluded = 0;
};

// Metrics of a single frame; empty optionals mark excluded values.
struct FrameMetrics {
  std::map<SemanticClass, std::optional<double>> class_iou;
  std::map<SemanticClass, std::optional<double>> class_ap;
  std::optional<double> road_iou;
  std::optional<double> road_ap;
  std::optional<double> occluded_road_iou;
  std::optional<double> ego_iou;
  std::optional<double> ego_ap;
  std::vector<LaneInstance> pred_lanes;
  std::vector<LaneInstance> gt_lanes;
};

struct EvalReport {
  int frame_count = 0;
  std::map<SemanticClass, MetricStat> class_iou;
  std::map<SemanticClass, MetricStat> class_ap;
  std::optional<double> miou;
  std::optional<double> map;
  MetricStat road_iou;
  MetricStat road_ap;
  MetricStat occluded_miou;
  MetricStat ego_iou;
  MetricStat ego_ap;
  // Keyed by IoU threshold; empty optional when no ground-truth lanes exist.
  std::map<double, std::optional<DetectionScore>> lane_detection;
  int exclusions = 0;
};

// Classes scored individually (Free is background and is not scored).
std::span<const SemanticClass> scored_classes();

// Drivable composite used for the "road" column: Road, Crosswalk, Lane.
Mask road_mask(const LabelGrid& grid);

FrameMetrics evaluate_frame(const LabelGrid& gt, const ConfidenceGrid& pred,
                            const EvalOptions& options = {});

EvalReport aggregate(std::span<const FrameMetrics> frames, const EvalOptions& options = {});

EvalReport evaluate_sequence(std::span<const LabelGrid> gts, std::span<const ConfidenceGrid> preds,
                             const EvalOptions& options = {}, int jobs = 1);

}  // namespace bevbench
