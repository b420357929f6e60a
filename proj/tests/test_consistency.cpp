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

#include <algorithm>
#include <cmath>
#include <random>

#include "bevbench/consistency.hpp"
#include "bevbench/error.hpp"

namespace bevbench {
namespace {

const GridSpec kSpec{8, 8, 1.0};

ConfidenceGrid onehot(const LabelGrid& g) {
  ConfidenceGrid c(g.spec(), kNumSemanticClasses);
  for (std::size_t i = 0; i < g.spec().size(); ++i) {
    c.probs[static_cast<std::size_t>(g.classes()[i]) * g.spec().size() + i] = 1.0f;
  }
  return c;
}

LabelGrid random_labels(std::mt19937_64& rng, const GridSpec& s = kSpec) {
  LabelGrid g(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    g.set(s.cell(i), static_cast<SemanticClass>(rng() % 6));
  }
  return g;
}

LayoutSequence repeated(int n, const LabelGrid& g) {
  LayoutSequence seq;
  for (int i = 0; i < n; ++i) {
    seq.statics.push_back(onehot(g));
    seq.dynamics.push_back(ConfidenceGrid(g.spec(), 1));
  }
  return seq;
}

TEST(Xent, ClosedForms) {
  ConfidenceGrid half(kSpec, 1);
  std::fill(half.probs.begin(), half.probs.end(), 0.5f);
  LabelGrid target(kSpec);
  target.set({0, 0}, SemanticClass::kVehicle);
  EXPECT_NEAR(xent(half, target), std::log(2.0), 1e-7);

  ConfidenceGrid uniform(kSpec, 4);
  std::fill(uniform.probs.begin(), uniform.probs.end(), 0.25f);
  ConfidenceGrid hot(kSpec, 4);
  for (std::size_t i = 0; i < kSpec.size(); ++i) hot.probs[(i % 4) * kSpec.size() + i] = 1.0f;
  EXPECT_NEAR(xent(uniform, hot), std::log(4.0), 1e-7);

  std::mt19937_64 rng(1);
  const LabelGrid g = random_labels(rng);
  EXPECT_EQ(xent(onehot(g), onehot(g)), 0.0);
  EXPECT_EQ(xent(onehot(g), g), 0.0);
  // A confidently wrong cell costs -log(eps).
  ConfidenceGrid wrong(kSpec, 1);
  EXPECT_NEAR(xent(wrong, target), -std::log(kProbEpsilon) / kSpec.size(), 1e-9);
  EXPECT_THROW(xent(uniform, ConfidenceGrid(GridSpec{4, 4, 1.0}, 4)), Error);
}

TEST(Pairs, EnumerationMatchesIndexRanges) {
  EXPECT_EQ(short_range_pairs(3), (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}));
  EXPECT_EQ(long_range_pairs(3), (std::vector<std::pair<int, int>>{{0, 2}}));
  EXPECT_EQ(long_range_pairs(5),
            (std::vector<std::pair<int, int>>{{0, 2}, {0, 3}, {0, 4}, {1, 3}, {1, 4}, {2, 4}}));
  for (int n = 2; n <= 6; ++n) {
    std::vector<std::pair<int, int>> s, l;
    for (int j = 0; j + 1 < n; ++j) {
      s.push_back({j, j + 1});
      for (int k = j + 2; k < n; ++k) l.push_back({j, k});
    }
    EXPECT_EQ(short_range_pairs(n), s);
    EXPECT_EQ(long_range_pairs(n), l);
    EXPECT_EQ(static_cast<int>(short_range_pairs(n).size()), n - 1);
    EXPECT_EQ(static_cast<int>(long_range_pairs(n).size()), (n - 1) * (n - 2) / 2);
  }
}

TEST(Consistency, TermsAndErrors) {
  std::mt19937_64 rng(2);
  const LabelGrid g = random_labels(rng);
  EXPECT_LE(short_consistency(repeated(4, g)), 1e-6);
  EXPECT_LE(long_consistency(repeated(4, g)), 1e-6);
  EXPECT_THROW(short_consistency(repeated(1, g)), Error);
  EXPECT_THROW(long_consistency(repeated(2, g)), Error);

  // Alternating frames: each pair contributes the same constant, so the sums
  // count the terms.
  const LabelGrid h = random_labels(rng);
  LayoutSequence alt;
  for (int i = 0; i < 3; ++i) {
    alt.statics.push_back(onehot(i == 1 ? h : g));
    alt.dynamics.push_back(ConfidenceGrid(kSpec, 1));
  }
  const double dyn = xent(alt.dynamics[0], alt.dynamics[1]);
  const double gh = xent(alt.statics[0], alt.statics[1]);
  const double hg = xent(alt.statics[1], alt.statics[2]);
  EXPECT_NEAR(short_consistency(alt), gh + hg + 2 * dyn, 1e-12);
  EXPECT_NEAR(long_consistency(alt), xent(alt.statics[0], alt.statics[2]) + dyn, 1e-12);
}

TEST(TotalScore, WeightedSum) {
  const ConsistencyWeights w;
  EXPECT_NEAR(total_score(2.0, 0.5, 0.3, w), 2.053, 1e-12);
  EXPECT_EQ(total_score(1.5, 7.0, 9.0, {1.0, 0.0, 0.0}), 1.5);
  EXPECT_EQ(total_score(0, 0, 0, w), 0.0);
  EXPECT_NEAR(total_score(4.0, 0.5, 0.3, w) - total_score(2.0, 0.5, 0.3, w), 2.0, 1e-12);
  EXPECT_NEAR(total_score(2.0, 1.5, 0.3, w) - total_score(2.0, 0.5, 0.3, w), 0.1, 1e-12);
  EXPECT_TRUE(w.ordered());
}

double clamp_log(double p) { return std::log(std::max(p, kProbEpsilon)); }

TEST(SupLoss, BatchAndOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const LabelGrid sgt = random_labels(rng);
  LabelGrid dgt(kSpec);
  for (std::size_t i = 0; i < kSpec.size(); ++i) {
    if (rng() % 3 == 0) dgt.set(kSpec.cell(i), SemanticClass::kVehicle);
  }
  ConfidenceGrid sp(kSpec, kNumSemanticClasses), dp(kSpec, 1);
  for (auto& p : sp.probs) p = u(rng);
  for (auto& p : dp.probs) p = u(rng);

  double s = 0.0, d = 0.0;
  for (std::size_t i = 0; i < kSpec.size(); ++i) {
    s -= clamp_log(sp.probs[static_cast<std::size_t>(sgt.classes()[i]) * kSpec.size() + i]);
    const bool veh = dgt.classes()[i] == SemanticClass::kVehicle;
    d -= clamp_log(veh ? dp.probs[i] : 1.0 - dp.probs[i]);
  }
  const double expected = (s + d) / static_cast<double>(kSpec.size());

  const SupervisedItem item{&sp, &sgt, &dp, &dgt};
  EXPECT_NEAR(sup_loss(std::vector<SupervisedItem>{item}), expected, 1e-9);
  EXPECT_EQ(sup_loss(std::vector<SupervisedItem>{item, item}),
            2.0 * sup_loss(std::vector<SupervisedItem>{item}));
  const ConfidenceGrid perfect = onehot(sgt);
  ConfidenceGrid dperfect(kSpec, 1);
  for (std::size_t i = 0; i < kSpec.size(); ++i) {
    dperfect.probs[i] = dgt.classes()[i] == SemanticClass::kVehicle ? 1.0f : 0.0f;
  }
  EXPECT_LE(sup_loss(std::vector<SupervisedItem>{{&perfect, &sgt, &dperfect, &dgt}}), 1e-6);
}

TEST(Warp, IdentityAndForwardMotion) {
  std::mt19937_64 rng(4);
  const LabelGrid g = random_labels(rng);
  LayoutSequence same = repeated(3, g);
  same.prev_from_next.assign(2, Pose{});
  EXPECT_LE(short_consistency(same, true), 1e-6);
  EXPECT_NEAR(short_consistency(same, true), short_consistency(same, false), 1e-12);

  // The camera advances one cell per frame, so the scene slides one row
  // toward the bottom edge.
  LabelGrid next(kSpec);
  for (int r = 1; r < kSpec.rows; ++r) {
    for (int c = 0; c < kSpec.cols; ++c) next.set({r, c}, g.class_at({r - 1, c}));
  }
  LayoutSequence moving;
  moving.statics = {onehot(g), onehot(next)};
  moving.dynamics = {ConfidenceGrid(kSpec, 1), ConfidenceGrid(kSpec, 1)};
  moving.prev_from_next = {Pose::from_translation({0, 0, kSpec.resolution})};
  EXPECT_LE(short_consistency(moving, true), 1e-6);
  EXPECT_GT(short_consistency(moving, false), 1.0);

  Mask valid;
  warp_into(moving, moving.statics[1], 0, 1, valid);
  EXPECT_EQ(valid.count(), static_cast<std::size_t>((kSpec.rows - 1) * kSpec.cols));
  EXPECT_THROW(short_consistency(repeated(2, g), true), Error);
}

}  // namespace
}  // namespace bevbench
