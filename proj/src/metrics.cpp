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

#include "bevbench/metrics.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>

#include "bevbench/error.hpp"
#include "bevbench/parallel.hpp"
#include "bevbench/simd/kernels.hpp"

namespace bevbench {
namespace {

void require_same(const Mask& a, const Mask& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, what);
}

double ratio(const simd::PairCounts& c) {
  if (c.union_ == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_);
}

}  // namespace

double iou(const Mask& pred, const Mask& gt) {
  require_same(pred, gt, "iou: prediction and ground truth differ in shape");
  return ratio(simd::active().pair_counts(pred.bits.data(), gt.bits.data(), pred.size()));
}

PrCurve pr_curve(std::span<const float> confidence, const Mask& gt) {
  if (confidence.size() != gt.size()) {
    throw Error(ErrorCode::kShapeMismatch, "confidence and ground truth differ in size");
  }
  const std::size_t n = confidence.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return confidence[a] > confidence[b] || (confidence[a] == confidence[b] && a < b);
  });
  const double positives = static_cast<double>(simd::active().count_nonzero(gt.bits.data(), n));
  PrCurve curve;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < n;) {
    const float c = confidence[order[i]];
    std::size_t j = i;
    while (j < n && confidence[order[j]] == c) {
      tp += gt.bits[order[j]] != 0;
      ++j;
    }
    seen = j;
    PrPoint p;
    p.precision = static_cast<double>(tp) / static_cast<double>(seen);
    p.recall = positives > 0 ? static_cast<double>(tp) / positives : 0.0;
    p.threshold = c;
    curve.push_back(p);
    i = j;
  }
  return curve;
}

double area_under(const PrCurve& curve) {
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : curve) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

double average_precision(std::span<const float> confidence, const Mask& gt) {
  if (confidence.size() != gt.size()) {
    throw Error(ErrorCode::kShapeMismatch, "confidence and ground truth differ in size");
  }
  if (simd::active().count_nonzero(gt.bits.data(), gt.size()) == 0) {
    throw Error(ErrorCode::kEmptyGroundTruth, "average precision undefined without positives");
  }
  return area_under(pr_curve(confidence, gt));
}

Mask binarize(std::span<const float> confidence, const GridSpec& spec, float threshold) {
  if (confidence.size() != spec.size()) {
    throw Error(ErrorCode::kShapeMismatch, "confidence does not match grid size");
  }
  Mask out(spec);
  simd::active().threshold_mask(confidence.data(), threshold, out.bits.data(), out.size());
  return out;
}

double miou_from_confidence(const ConfidenceGrid& conf, const LabelGrid& gt, SemanticClass cls,
                            float threshold) {
  if (!(conf.spec == gt.spec())) {
    throw Error(ErrorCode::kShapeMismatch, "confidence grid and labels differ in spec");
  }
  const int k = conf.num_classes == 1 ? 0 : static_cast<int>(cls);
  if (k >= conf.num_classes) throw Error(ErrorCode::kShapeMismatch, "class not in confidence grid");
  return iou(binarize(conf.channel(k), conf.spec, threshold), binary_mask(gt, cls));
}

double occluded_miou(const Mask& pred, const Mask& gt, const Mask& occlusion) {
  require_same(pred, gt, "occluded_miou: prediction and ground truth differ in shape");
  require_same(pred, occlusion, "occluded_miou: occlusion mask differs in shape");
  if (simd::active().count_nonzero(occlusion.bits.data(), occlusion.size()) == 0) {
    throw Error(ErrorCode::kNoOccludedCells, "occlusion mask is empty");
  }
  return ratio(simd::active().masked_pair_counts(pred.bits.data(), gt.bits.data(),
                                                 occlusion.bits.data(), pred.size()));
}

std::vector<LaneInstance> extract_lane_instances(std::span<const std::uint16_t> lane_ids,
                                                 const GridSpec& spec, const ConfidenceGrid* conf,
                                                 int conf_channel) {
  if (lane_ids.size() != spec.size()) {
    throw Error(ErrorCode::kShapeMismatch, "lane-id raster does not match grid");
  }
  if (conf != nullptr && (!(conf->spec == spec) || conf_channel >= conf->num_classes)) {
    throw Error(ErrorCode::kShapeMismatch, "confidence grid does not match lane raster");
  }
  std::map<std::uint16_t, std::size_t> slot;
  for (auto id : lane_ids) {
    if (id != 0) slot.emplace(id, 0);
  }
  std::vector<LaneInstance> out;
  out.reserve(slot.size());
  for (auto& [id, s] : slot) {
    s = out.size();
    LaneInstance lane;
    lane.id = id;
    lane.mask = Mask(spec);
    out.push_back(std::move(lane));
  }
  std::vector<double> sums(out.size(), 0.0);
  std::vector<std::size_t> counts(out.size(), 0);
  for (std::size_t i = 0; i < lane_ids.size(); ++i) {
    if (lane_ids[i] == 0) continue;
    const std::size_t s = slot[lane_ids[i]];
    out[s].mask.bits[i] = 1;
    ++counts[s];
    if (conf != nullptr) sums[s] += conf->channel(conf_channel)[i];
  }
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].confidence = conf != nullptr ? sums[s] / static_cast<double>(counts[s]) : 1.0;
  }
  return out;
}

std::vector<MatchedDetection> match_by_iou(std::span<const double> confidences,
                                           const std::vector<std::vector<double>>& iou_matrix,
                                           double iou_threshold) {
  if (iou_matrix.size() != confidences.size()) {
    throw Error(ErrorCode::kShapeMismatch, "IoU matrix rows must match predictions");
  }
  std::vector<std::size_t> order(confidences.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] > confidences[b]; });
  const std::size_t n_gt = iou_matrix.empty() ? 0 : iou_matrix.front().size();
  std::vector<bool> taken(n_gt, false);
  std::vector<MatchedDetection> out;
  out.reserve(order.size());
  for (std::size_t p : order) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (taken[g]) continue;
      if (iou_matrix[p][g] > best_iou) {
        best_iou = iou_matrix[p][g];
        best = static_cast<int>(g);
      }
    }
    MatchedDetection d;
    d.confidence = confidences[p];
    if (best >= 0 && best_iou > iou_threshold) {
      taken[static_cast<std::size_t>(best)] = true;
      d.true_positive = true;
    }
    out.push_back(d);
  }
  return out;
}

std::vector<MatchedDetection> match_lanes(std::span<const LaneInstance> preds,
                                          std::span<const LaneInstance> gts, double iou_threshold) {
  std::vector<double> conf;
  std::vector<std::vector<double>> matrix;
  for (const auto& p : preds) {
    conf.push_back(p.confidence);
    std::vector<double> row;
    for (const auto& g : gts) row.push_back(iou(p.mask, g.mask));
    matrix.push_back(std::move(row));
  }
  return match_by_iou(conf, matrix, iou_threshold);
}

DetectionScore score_detections(std::vector<MatchedDetection> detections, std::size_t total_gt) {
  if (total_gt == 0) throw Error(ErrorCode::kNoGroundTruth, "no ground-truth lanes");
  std::stable_sort(detections.begin(), detections.end(),
                   [](const MatchedDetection& a, const MatchedDetection& b) {
                     return a.confidence > b.confidence;
                   });
  DetectionScore s;
  std::size_t tp = 0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < detections.size();) {
    std::size_t j = i;
    while (j < detections.size() && detections[j].confidence == detections[i].confidence) {
      tp += detections[j].true_positive ? 1 : 0;
      ++j;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_gt);
    s.ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  s.recall = static_cast<double>(tp) / static_cast<double>(total_gt);
  return s;
}

DetectionScore lane_detection_score(std::span<const LaneInstance> preds,
                                    std::span<const LaneInstance> gts, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "IoU threshold must lie in (0,1)");
  }
  return score_detections(match_lanes(preds, gts, iou_threshold), gts.size());
}

// ---------------------------------------------------------------------------

std::span<const SemanticClass> scored_classes() {
  static constexpr std::array<SemanticClass, 6> kClasses{
      SemanticClass::kRoad,      SemanticClass::kSidewalk, SemanticClass::kCrosswalk,
      SemanticClass::kOtherRoad, SemanticClass::kVehicle,  SemanticClass::kLane};
  return kClasses;
}

Mask road_mask(const LabelGrid& grid) {
  Mask out(grid.spec());
  const auto classes = grid.classes();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto c = classes[i];
    out.bits[i] = (c == SemanticClass::kRoad || c == SemanticClass::kCrosswalk ||
                   c == SemanticClass::kLane)
                      ? 1
                      : 0;
  }
  return out;
}

FrameMetrics evaluate_frame(const LabelGrid& gt, const ConfidenceGrid& pred,
                            const EvalOptions& options) {
  const GridSpec& spec = gt.spec();
  if (!(pred.spec == spec)) throw Error(ErrorCode::kShapeMismatch, "prediction grid spec differs");
  if (pred.num_classes != kNumSemanticClasses) {
    throw Error(ErrorCode::kShapeMismatch, "prediction must carry one channel per class");
  }
  const std::size_t n = spec.size();
  const auto& k = simd::active();
  FrameMetrics m;
  for (SemanticClass cls : scored_classes()) {
    const Mask g = binary_mask(gt, cls);
    const auto channel = pred.channel(static_cast<int>(cls));
    if (k.count_nonzero(g.bits.data(), n) == 0) {
      m.class_iou[cls] = std::nullopt;
      m.class_ap[cls] = std::nullopt;
      continue;
    }
    m.class_iou[cls] = iou(binarize(channel, spec, options.threshold), g);
    m.class_ap[cls] = average_precision(channel, g);
  }

  const Mask road_gt = road_mask(gt);
  std::vector<float> road_conf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float s = pred.channel(static_cast<int>(SemanticClass::kRoad))[i] +
                    pred.channel(static_cast<int>(SemanticClass::kCrosswalk))[i] +
                    pred.channel(static_cast<int>(SemanticClass::kLane))[i];
    road_conf[i] = std::min(1.0f, s);
  }
  const Mask road_pred = binarize(road_conf, spec, options.threshold);
  if (k.count_nonzero(road_gt.bits.data(), n) > 0) {
    m.road_iou = iou(road_pred, road_gt);
    m.road_ap = average_precision(road_conf, road_gt);
    const Mask occ = gt.occlusion_mask();
    if (k.count_nonzero(occ.bits.data(), n) > 0 &&
        k.masked_pair_counts(road_gt.bits.data(), road_gt.bits.data(), occ.bits.data(), n)
                .intersection > 0) {
      m.occluded_road_iou = occluded_miou(road_pred, road_gt, occ);
    }
  }

  const Mask ego_gt = gt.lane_id_mask(1);
  if (pred.lane_ids && k.count_nonzero(ego_gt.bits.data(), n) > 0) {
    const auto lane_channel = pred.channel(static_cast<int>(SemanticClass::kLane));
    std::vector<float> ego_conf(n, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
      if ((*pred.lane_ids)[i] == 1) ego_conf[i] = lane_channel[i];
    }
    m.ego_iou = iou(binarize(ego_conf, spec, options.threshold), ego_gt);
    m.ego_ap = average_precision(ego_conf, ego_gt);
  }

  m.gt_lanes = extract_lane_instances(gt.lane_ids(), spec);
  if (pred.lane_ids) {
    m.pred_lanes = extract_lane_instances(*pred.lane_ids, spec, &pred,
                                          static_cast<int>(SemanticClass::kLane));
  }
  return m;
}

namespace {

MetricStat mean_of(std::span<const FrameMetrics> frames,
                   const std::function<std::optional<double>(const FrameMetrics&)>& get) {
  MetricStat s;
  double sum = 0.0;
  for (const auto& f : frames) {
    const auto v = get(f);
    if (v) {
      sum += *v;
      ++s.frames;
    } else {
      ++s.excluded;
    }
  }
  if (s.frames > 0) s.value = sum / s.frames;
  return s;
}

std::optional<double> mean_present(const std::map<SemanticClass, MetricStat>& stats) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [cls, s] : stats) {
    if (s.value) {
      sum += *s.value;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

EvalReport aggregate(std::span<const FrameMetrics> frames, const EvalOptions& options) {
  EvalReport r;
  r.frame_count = static_cast<int>(frames.size());
  for (SemanticClass cls : scored_classes()) {
    r.class_iou[cls] = mean_of(frames, [cls](const FrameMetrics& f) {
      const auto it = f.class_iou.find(cls);
      return it == f.class_iou.end() ? std::nullopt : it->second;
    });
    r.class_ap[cls] = mean_of(frames, [cls](const FrameMetrics& f) {
      const auto it = f.class_ap.find(cls);
      return it == f.class_ap.end() ? std::nullopt : it->second;
    });
    r.exclusions += r.class_iou[cls].excluded + r.class_ap[cls].excluded;
  }
  r.miou = mean_present(r.class_iou);
  r.map = mean_present(r.class_ap);
  r.road_iou = mean_of(frames, [](const FrameMetrics& f) { return f.road_iou; });
  r.road_ap = mean_of(frames, [](const FrameMetrics& f) { return f.road_ap; });
  r.occluded_miou = mean_of(frames, [](const FrameMetrics& f) { return f.occluded_road_iou; });
  r.ego_iou = mean_of(frames, [](const FrameMetrics& f) { return f.ego_iou; });
  r.ego_ap = mean_of(frames, [](const FrameMetrics& f) { return f.ego_ap; });
  r.exclusions += r.road_iou.excluded + r.road_ap.excluded + r.occluded_miou.excluded +
                  r.ego_iou.excluded + r.ego_ap.excluded;

  for (double t : options.lane_iou_thresholds) {
    std::vector<MatchedDetection> pooled;
    std::size_t total_gt = 0;
    for (const auto& f : frames) {
      auto d = match_lanes(f.pred_lanes, f.gt_lanes, t);
      pooled.insert(pooled.end(), d.begin(), d.end());
      total_gt += f.gt_lanes.size();
    }
    if (total_gt == 0) {
      r.lane_detection[t] = std::nullopt;
      ++r.exclusions;
    } else {
      r.lane_detection[t] = score_detections(std::move(pooled), total_gt);
    }
  }
  return r;
}

EvalReport evaluate_sequence(std::span<const LabelGrid> gts, std::span<const ConfidenceGrid> preds,
                             const EvalOptions& options, int jobs) {
  if (gts.size() != preds.size()) {
    throw Error(ErrorCode::kShapeMismatch, "need one prediction per ground-truth frame");
  }
  std::vector<FrameMetrics> frames(gts.size());
  parallel_for(gts.size(), jobs,
               [&](std::size_t i) { frames[i] = evaluate_frame(gts[i], preds[i], options); });
  return aggregate(frames, options);
}

}  // namespace bevbench
