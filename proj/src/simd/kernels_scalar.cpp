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

#include "bevbench/simd/kernels.hpp"

namespace bevbench::simd {
namespace {

std::uint64_t count_nonzero(const std::uint8_t* a, std::size_t n) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += a[i] != 0;
  return c;
}

PairCounts pair_counts(const std::uint8_t* a, const std::uint8_t* b,
                       std::size_t n) {
  PairCounts out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    out.intersection += x && y;
    out.union_ += x || y;
  }
  return out;
}

PairCounts masked_pair_counts(const std::uint8_t* a, const std::uint8_t* b,
                              const std::uint8_t* m, std::size_t n) {
  PairCounts out;
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i] == 0) continue;
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    out.intersection += x && y;
    out.union_ += x || y;
  }
  return out;
}

void equal_mask(const std::uint8_t* values, std::uint8_t v, std::uint8_t* out,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = values[i] == v ? 1 : 0;
}

void threshold_mask(const float* p, float threshold, std::uint8_t* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = p[i] >= threshold ? 1 : 0;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",   count_nonzero,  pair_counts,
                                 masked_pair_counts, equal_mask, threshold_mask};
  return table;
}

}  // namespace bevbench::simd
