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

#if defined(__AVX2__)

#include <immintrin.h>

#include <bit>

namespace bevbench::simd {
namespace {

inline __m256i nonzero(__m256i x) {
  // 0xFF where x != 0.
  return _mm256_xor_si256(_mm256_cmpeq_epi8(x, _mm256_setzero_si256()),
                          _mm256_set1_epi8(-1));
}

inline std::uint64_t popcount_bytes(__m256i m) {
  return static_cast<std::uint64_t>(
      std::popcount(static_cast<std::uint32_t>(_mm256_movemask_epi8(m))));
}

inline __m256i load(const std::uint8_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

std::uint64_t count_nonzero(const std::uint8_t* a, std::size_t n) {
  std::uint64_t c = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) c += popcount_bytes(nonzero(load(a + i)));
  for (; i < n; ++i) c += a[i] != 0;
  return c;
}

PairCounts pair_counts(const std::uint8_t* a, const std::uint8_t* b,
                       std::size_t n) {
  PairCounts out;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i x = nonzero(load(a + i));
    const __m256i y = nonzero(load(b + i));
    out.intersection += popcount_bytes(_mm256_and_si256(x, y));
    out.union_ += popcount_bytes(_mm256_or_si256(x, y));
  }
  for (; i < n; ++i) {
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
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i k = nonzero(load(m + i));
    const __m256i x = _mm256_and_si256(nonzero(load(a + i)), k);
    const __m256i y = _mm256_and_si256(nonzero(load(b + i)), k);
    out.intersection += popcount_bytes(_mm256_and_si256(x, y));
    out.union_ += popcount_bytes(_mm256_or_si256(x, y));
  }
  for (; i < n; ++i) {
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
  const __m256i needle = _mm256_set1_epi8(static_cast<char>(v));
  const __m256i one = _mm256_set1_epi8(1);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i eq = _mm256_cmpeq_epi8(load(values + i), needle);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                        _mm256_and_si256(eq, one));
  }
  for (; i < n; ++i) out[i] = values[i] == v ? 1 : 0;
}

void threshold_mask(const float* p, float threshold, std::uint8_t* out,
                    std::size_t n) {
  const __m256 t = _mm256_set1_ps(threshold);
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i m[4];
    for (int j = 0; j < 4; ++j) {
      const __m256 ge = _mm256_cmp_ps(_mm256_loadu_ps(p + i + 8 * j), t, _CMP_GE_OQ);
      m[j] = _mm256_and_si256(_mm256_castps_si256(ge), one);
    }
    const __m256i lo = _mm256_packs_epi32(m[0], m[1]);
    const __m256i hi = _mm256_packs_epi32(m[2], m[3]);
    const __m256i bytes =
        _mm256_permutevar8x32_epi32(_mm256_packs_epi16(lo, hi), order);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), bytes);
  }
  for (; i < n; ++i) out[i] = p[i] >= threshold ? 1 : 0;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2",     count_nonzero,  pair_counts,
                                 masked_pair_counts, equal_mask, threshold_mask};
  return &table;
}

}  // namespace bevbench::simd

#else

namespace bevbench::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace bevbench::simd

#endif
