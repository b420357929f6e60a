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

// Data-parallel inner loops used by the raster metrics. Each kernel has a
// portable scalar reference and, on x86-64, an AVX2 variant. The active table
// is chosen once at startup from CPUID; BEVBENCH_SIMD=scalar forces the
// reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace bevbench::simd {

struct PairCounts {
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct KernelTable {
  const char* name;
  // Number of nonzero bytes.
  std::uint64_t (*count_nonzero)(const std::uint8_t* a, std::size_t n);
  // |a AND b|, |a OR b| over 0/1 byte masks.
  PairCounts (*pair_counts)(const std::uint8_t* a, const std::uint8_t* b,
                            std::size_t n);
  // Same, restricted to cells where m is nonzero.
  PairCounts (*masked_pair_counts)(const std::uint8_t* a, const std::uint8_t* b,
                                   const std::uint8_t* m, std::size_t n);
  // out[i] = (values[i] == v)
  void (*equal_mask)(const std::uint8_t* values, std::uint8_t v,
                     std::uint8_t* out, std::size_t n);
  // out[i] = (p[i] >= threshold)
  void (*threshold_mask)(const float* p, float threshold, std::uint8_t* out,
                         std::size_t n);
};

const KernelTable& scalar_kernels();
// Null when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();
bool cpu_has_avx2();

// Table used by the library. Resolved on first call.
const KernelTable& active();

// Test hook; "scalar", "avx2" or "auto". Returns false if unavailable.
bool select(std::string_view which);

}  // namespace bevbench::simd
