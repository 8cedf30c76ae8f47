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

#pragma once

#include <cstdint>
#include <random>

namespace blocklda {

// Deterministic seedable random stream. mt19937_64 is fully specified by the
// standard, and all derived draws below avoid std::*_distribution (whose
// output is implementation-defined), so a seed fixes the draw sequence
// bit-for-bit on every platform.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : gen_(seed) {}

  // Independent stream for (seed, stream_id); used to give every worker its
  // own stream so draw order never couples workers.
  static RngStream derive(uint64_t seed, uint64_t stream_id) {
    return RngStream(splitmix64(seed ^ splitmix64(stream_id + 0x9e3779b97f4a7c15ULL)));
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, mass).
  double next_uniform(double mass) { return next_double() * mass; }

  // Uniform integer in [0, n). Widening-multiply range reduction; the
  // 2^-64 bias is irrelevant here and the result is deterministic.
  uint32_t next_below(uint32_t n) {
    return static_cast<uint32_t>((static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  uint64_t next_u64() { return gen_(); }

 private:
  static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace blocklda
