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

#include <atomic>
#include <cstdlib>
#include <string>

#include "bevbench/simd/kernels.hpp"

namespace bevbench::simd {
namespace {

const KernelTable* resolve_default() {
  const char* env = std::getenv("BEVBENCH_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &scalar_kernels();
  if (cpu_has_avx2() && avx2_kernels() != nullptr) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{resolve_default()};
  return table;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view which) {
  if (which == "scalar") {
    current().store(&scalar_kernels(), std::memory_order_release);
    return true;
  }
  if (which == "avx2") {
    if (!cpu_has_avx2() || avx2_kernels() == nullptr) return false;
    current().store(avx2_kernels(), std::memory_order_release);
    return true;
  }
  if (which == "auto") {
    current().store(resolve_default(), std::memory_order_release);
    return true;
  }
  return false;
}

}  // namespace bevbench::simd
