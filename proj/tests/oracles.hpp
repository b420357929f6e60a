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

// Brute-force references for the metric kernels. They share no code with the
// library: every quantity is recomputed with plain loops over cells.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

namespace bevbench::oracle {

inline double iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double masked_iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b,
                         const std::vector<std::uint8_t>& m) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!m[i]) continue;
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Thresholds are visited from the highest distinct confidence down; at each
// one every cell at or above it counts as predicted.
inline double average_precision(const std::vector<float>& conf, const std::vector<std::uint8_t>& gt) {
  std::set<float, std::greater<float>> levels(conf.begin(), conf.end());
  std::size_t total = 0;
  for (auto g : gt) total += g ? 1 : 0;
  double ap = 0.0, prev_recall = 0.0;
  for (float t : levels) {
    std::size_t tp = 0, pred = 0;
    for (std::size_t i = 0; i < conf.size(); ++i) {
      if (conf[i] >= t) {
        ++pred;
        tp += gt[i] ? 1 : 0;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total);
    const double precision = static_cast<double>(tp) / static_cast<double>(pred);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

inline std::vector<std::uint8_t> binarize(const std::vector<float>& conf, float threshold) {
  std::vector<std::uint8_t> out(conf.size());
  for (std::size_t i = 0; i < conf.size(); ++i) out[i] = conf[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace bevbench::oracle
