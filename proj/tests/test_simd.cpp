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

#include <random>
#include <vector>

#include "bevbench/simd/kernels.hpp"

namespace bevbench::simd {
namespace {

// Lengths straddle the 32-byte and 8-float vector widths to cover the tails.
const std::size_t kLengths[] = {0, 1, 7, 8, 9, 31, 32, 33, 63, 64, 65, 255, 1000, 65536 + 13};

std::vector<std::uint8_t> random_mask(std::mt19937_64& rng, std::size_t n, int max_value = 1) {
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(rng() % (max_value + 1));
  return v;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (avx2_kernels() == nullptr || !cpu_has_avx2()) GTEST_SKIP() << "AVX2 unavailable";
  }
  const KernelTable& s = scalar_kernels();
  const KernelTable& v = *avx2_kernels();
};

TEST_F(KernelEquivalence, CountNonzero) {
  std::mt19937_64 rng(1);
  for (std::size_t n : kLengths) {
    const auto a = random_mask(rng, n, 3);
    EXPECT_EQ(s.count_nonzero(a.data(), n), v.count_nonzero(a.data(), n)) << n;
  }
}

TEST_F(KernelEquivalence, PairCounts) {
  std::mt19937_64 rng(2);
  for (std::size_t n : kLengths) {
    const auto a = random_mask(rng, n);
    const auto b = random_mask(rng, n);
    const auto m = random_mask(rng, n);
    EXPECT_EQ(s.pair_counts(a.data(), b.data(), n), v.pair_counts(a.data(), b.data(), n)) << n;
    EXPECT_EQ(s.masked_pair_counts(a.data(), b.data(), m.data(), n),
              v.masked_pair_counts(a.data(), b.data(), m.data(), n))
        << n;
  }
}

TEST_F(KernelEquivalence, EqualMask) {
  std::mt19937_64 rng(3);
  for (std::size_t n : kLengths) {
    const auto a = random_mask(rng, n, 6);
    std::vector<std::uint8_t> o1(n), o2(n);
    for (std::uint8_t value = 0; value < 7; ++value) {
      s.equal_mask(a.data(), value, o1.data(), n);
      v.equal_mask(a.data(), value, o2.data(), n);
      EXPECT_EQ(o1, o2) << n;
    }
  }
}

TEST_F(KernelEquivalence, ThresholdMaskIncludingBoundaryValues) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t n : kLengths) {
    std::vector<float> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i % 5 == 0 ? 0.5f : u(rng);
    std::vector<std::uint8_t> o1(n), o2(n);
    for (float thr : {0.0f, 0.25f, 0.5f, 1.0f}) {
      s.threshold_mask(p.data(), thr, o1.data(), n);
      v.threshold_mask(p.data(), thr, o2.data(), n);
      EXPECT_EQ(o1, o2) << n << " @ " << thr;
    }
  }
}

TEST(ScalarKernels, HandValues) {
  const KernelTable& k = scalar_kernels();
  const std::uint8_t a[] = {1, 1, 0, 0, 1};
  const std::uint8_t b[] = {1, 0, 1, 0, 1};
  const std::uint8_t m[] = {1, 1, 1, 0, 0};
  EXPECT_EQ(k.count_nonzero(a, 5), 3u);
  EXPECT_EQ(k.pair_counts(a, b, 5), (PairCounts{2, 4}));
  EXPECT_EQ(k.masked_pair_counts(a, b, m, 5), (PairCounts{1, 3}));
  const float p[] = {0.49f, 0.5f, 0.51f};
  std::uint8_t out[3];
  k.threshold_mask(p, 0.5f, out, 3);
  EXPECT_EQ(out[0], 0);
  EXPECT_EQ(out[1], 1);
  EXPECT_EQ(out[2], 1);
}

TEST(Dispatch, SelectScalarAndBack) {
  ASSERT_TRUE(select("scalar"));
  EXPECT_STREQ(active().name, "scalar");
  EXPECT_FALSE(select("neon"));
  ASSERT_TRUE(select("auto"));
  if (cpu_has_avx2() && avx2_kernels() != nullptr && std::getenv("BEVBENCH_SIMD") == nullptr) {
    EXPECT_STREQ(active().name, "avx2");
  }
}

}  // namespace
}  // namespace bevbench::simd
