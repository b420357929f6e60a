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

#include "bevbench/consistency.hpp"

#include <algorithm>
#include <cmath>

#include "bevbench/error.hpp"

namespace bevbench {
namespace {

// Floor applied to every probability that enters a log. A certain and
// correct prediction therefore costs exactly zero.
double neg_log(double p) { return -std::log(std::max(p, kProbEpsilon)); }

void require_same_spec(const ConfidenceGrid& a, const GridSpec& spec) {
  if (!(a.spec == spec)) throw Error(ErrorCode::kShapeMismatch, "grids differ in spec");
}

double mean_of(std::vector<double>& per_cell) {
  if (per_cell.empty()) return 0.0;
  return pairwise_sum(per_cell) / static_cast<double>(per_cell.size());
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void LayoutSequence::validate() const {
  if (statics.empty()) throw Error(ErrorCode::kSequenceTooShort, "empty layout sequence");
  if (dynamics.size() != statics.size()) {
    throw Error(ErrorCode::kShapeMismatch, "static and dynamic streams differ in length");
  }
  const GridSpec& spec = statics.front().spec;
  for (std::size_t i = 0; i < statics.size(); ++i) {
    require_same_spec(statics[i], spec);
    require_same_spec(dynamics[i], spec);
    if (statics[i].num_classes != statics.front().num_classes ||
        dynamics[i].num_classes != dynamics.front().num_classes) {
      throw Error(ErrorCode::kShapeMismatch, "channel count changes along the sequence");
    }
  }
  if (!prev_from_next.empty() && prev_from_next.size() + 1 != statics.size()) {
    throw Error(ErrorCode::kShapeMismatch, "need seqlen-1 relative poses");
  }
}

double xent(const ConfidenceGrid& pred, const ConfidenceGrid& target, const Mask* valid) {
  require_same_spec(target, pred.spec);
  if (pred.num_classes != target.num_classes) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and target differ in channel count");
  }
  const std::size_t n = pred.spec.size();
  if (valid != nullptr && valid->size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "validity mask does not match grid");
  }
  std::vector<double> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (valid != nullptr && valid->bits[i] == 0) continue;
    double loss = 0.0;
    if (pred.num_classes == 1) {
      const double p = pred.probs[i];
      const double t = target.probs[i];
      if (t != 0.0) loss += t * neg_log(p);
      if (t != 1.0) loss += (1.0 - t) * neg_log(1.0 - p);
    } else {
      for (int c = 0; c < pred.num_classes; ++c) {
        const double t = target.channel(c)[i];
        if (t != 0.0) loss += t * neg_log(pred.channel(c)[i]);
      }
    }
    cells.push_back(loss);
  }
  return mean_of(cells);
}

double xent(const ConfidenceGrid& pred, const LabelGrid& target, SemanticClass positive) {
  require_same_spec(pred, target.spec());
  const std::size_t n = pred.spec.size();
  const auto classes = target.classes();
  std::vector<double> cells(n);
  if (pred.num_classes == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = pred.probs[i];
      cells[i] = classes[i] == positive ? neg_log(p) : neg_log(1.0 - p);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(classes[i]);
      if (c >= pred.num_classes) {
        throw Error(ErrorCode::kShapeMismatch, "label class outside prediction channels");
      }
      cells[i] = neg_log(pred.channel(c)[i]);
    }
  }
  return mean_of(cells);
}

double sup_loss(std::span<const SupervisedItem> batch) {
  std::vector<double> terms;
  for (const auto& item : batch) {
    terms.push_back(xent(*item.static_pred, *item.static_gt, SemanticClass::kRoad) +
                    xent(*item.dynamic_pred, *item.dynamic_gt, SemanticClass::kVehicle));
  }
  return pairwise_sum(terms);
}

std::vector<std::pair<int, int>> short_range_pairs(int seqlen) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j + 1 < seqlen; ++j) out.emplace_back(j, j + 1);
  return out;
}

std::vector<std::pair<int, int>> long_range_pairs(int seqlen) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j + 1 < seqlen; ++j) {
    for (int k = j + 2; k < seqlen; ++k) out.emplace_back(j, k);
  }
  return out;
}

ConfidenceGrid warp_into(const LayoutSequence& seq, const ConfidenceGrid& grid, int j, int k,
                         Mask& valid) {
  if (seq.prev_from_next.empty()) {
    throw Error(ErrorCode::kInvalidParams, "pose-warp mode needs relative poses");
  }
  Pose j_from_k;
  for (int i = j; i < k; ++i) j_from_k = j_from_k * seq.prev_from_next[static_cast<std::size_t>(i)];
  const Pose k_from_j = j_from_k.inverse();
  const GridSpec& spec = grid.spec;
  ConfidenceGrid out(spec, grid.num_classes);
  valid = Mask(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Vec2 c = cell_center(spec.cell(i), spec);
    const Eigen::Vector3d q = k_from_j.apply(Eigen::Vector3d(c.lateral, 0.0, c.forward));
    const auto src = cell_of({q.x(), q.z()}, spec);
    if (!src) continue;
    valid.bits[i] = 1;
    for (int ch = 0; ch < grid.num_classes; ++ch) out.channel(ch)[i] = grid.at(ch, *src);
  }
  return out;
}

namespace {

double pair_term(const LayoutSequence& seq, int j, int k, bool warp) {
  const auto& sj = seq.statics[static_cast<std::size_t>(j)];
  const auto& sk = seq.statics[static_cast<std::size_t>(k)];
  const auto& dj = seq.dynamics[static_cast<std::size_t>(j)];
  const auto& dk = seq.dynamics[static_cast<std::size_t>(k)];
  if (!warp) return xent(sj, sk) + xent(dj, dk);
  Mask valid;
  const ConfidenceGrid sw = warp_into(seq, sk, j, k, valid);
  const double s = xent(sj, sw, &valid);
  const ConfidenceGrid dw = warp_into(seq, dk, j, k, valid);
  return s + xent(dj, dw, &valid);
}

double sum_pairs(const LayoutSequence& seq, const std::vector<std::pair<int, int>>& pairs,
                 bool warp) {
  std::vector<double> terms;
  terms.reserve(pairs.size());
  for (const auto& [j, k] : pairs) terms.push_back(pair_term(seq, j, k, warp));
  return pairwise_sum(terms);
}

}  // namespace

double short_consistency(const LayoutSequence& seq, bool warp) {
  seq.validate();
  if (seq.length() < 2) {
    throw Error(ErrorCode::kSequenceTooShort, "short-range term needs at least 2 frames");
  }
  return sum_pairs(seq, short_range_pairs(static_cast<int>(seq.length())), warp);
}

double long_consistency(const LayoutSequence& seq, bool warp) {
  seq.validate();
  if (seq.length() < 3) {
    throw Error(ErrorCode::kSequenceTooShort, "long-range term needs at least 3 frames");
  }
  return sum_pairs(seq, long_range_pairs(static_cast<int>(seq.length())), warp);
}

double total_score(double sup, double short_range, double long_range,
                   const ConsistencyWeights& w) {
  return w.sup * sup + w.short_range * short_range + w.long_range * long_range;
}

}  // namespace bevbench
