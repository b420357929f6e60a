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

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bevbench/geom.hpp"
#include "bevbench/grid.hpp"

namespace bevbench {

inline constexpr double kProbEpsilon = 1e-7;

// Predicted static and dynamic layouts over time. When present,
// prev_from_next[j] maps BEV frame j+1 into frame j.
struct LayoutSequence {
  std::vector<ConfidenceGrid> statics;
  std::vector<ConfidenceGrid> dynamics;
  std::vector<Pose> prev_from_next;

  std::size_t length() const { return statics.size(); }
  void validate() const;
};

struct ConsistencyWeights {
  double sup = 1.0;
  double short_range = 0.1;
  double long_range = 0.01;

  // sup > short > long; violating it is allowed but worth a warning.
  bool ordered() const { return sup > short_range && short_range > long_range; }
};

// Mean over cells of -sum_c t_c log max(p_c, eps). A
// single-channel grid is a binary probability and uses both outcomes. Cells
// with valid[i] == 0 are skipped when a mask is supplied.
double xent(const ConfidenceGrid& pred, const ConfidenceGrid& target,
            const Mask* valid = nullptr);

// Hard-label target. Multi-class predictions use the cell's class as a
// one-hot target; a single-channel prediction is scored against
// (class == positive).
double xent(const ConfidenceGrid& pred, const LabelGrid& target,
            SemanticClass positive = SemanticClass::kVehicle);

struct SupervisedItem {
  const ConfidenceGrid* static_pred;
  const LabelGrid* static_gt;
  const ConfidenceGrid* dynamic_pred;
  const LabelGrid* dynamic_gt;
};

// Sum over the batch of xent(static) + xent(dynamic).
double sup_loss(std::span<const SupervisedItem> batch);

// Frame index pairs (j, k), zero based, that enter each term.
std::vector<std::pair<int, int>> short_range_pairs(int seqlen);
std::vector<std::pair<int, int>> long_range_pairs(int seqlen);

// Target grid `k` resampled into frame `j` by nearest cell; `valid` marks
// cells whose source lies inside the grid.
ConfidenceGrid warp_into(const LayoutSequence& seq, const ConfidenceGrid& grid, int j, int k,
                         Mask& valid);

// Sum over adjacent pairs of xent(S^j, S^{j+1}) + xent(D^j, D^{j+1}); the
// later frame is the target. Throws kSequenceTooShort for seqlen < 2.
double short_consistency(const LayoutSequence& seq, bool warp = false);

// Sum over pairs k >= j + 2. Throws kSequenceTooShort for seqlen < 3.
double long_consistency(const LayoutSequence& seq, bool warp = false);

double total_score(double sup, double short_range, double long_range,
                   const ConsistencyWeights& w);

// Order-independent summation used for the loss terms.
double pairwise_sum(std::span<const double> values);

}  // namespace bevbench
