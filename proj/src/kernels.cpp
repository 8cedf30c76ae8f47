// Copyright 2026 The blocklda Authors.
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

#include "blocklda/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "blocklda/error.hpp"

namespace blocklda::kernels {
namespace {

const Kernels* resolve(const std::string& which) {
  if (which == "scalar") {
    return &scalar();
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (which == "avx2") {
    if (!avx2_supported()) {
      throw ConfigError("kernel variant 'avx2' is not supported on this CPU");
    }
    return &avx2();
  }
#endif
  if (which == "auto") {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) {
      return &avx2();
    }
#endif
    return &scalar();
  }
  throw ConfigError("unknown kernel variant '" + which + "'");
}

std::atomic<const Kernels*> g_active{nullptr};

}  // namespace

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (k == nullptr) {
    const char* env = std::getenv("BLOCKLDA_KERNEL");
    k = resolve(env != nullptr ? env : "auto");
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void force(const char* which) {
  g_active.store(resolve(which), std::memory_order_release);
}

}  // namespace blocklda::kernels
