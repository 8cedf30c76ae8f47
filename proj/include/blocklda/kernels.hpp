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

namespace blocklda::kernels {

// Dense per-topic inner loops, length K. Scalar reference implementations
// plus an AVX2 variant selected at runtime; the two are equivalence-tested
// (per-element results bit-exact, reduction results within 1e-13 relative).
//
// Reductions use a fixed association order per variant, so a given binary on
// a given machine always produces the same bits.
struct Kernels {
  // out[k] = (cd[k] + alpha[k]) * (ct[k] + beta) / (ctot[k] + beta_sum).
  // Returns the sum of out[0..k_count).
  double (*dense_conditional)(const int32_t* cd, const int32_t* ct, const int32_t* ctot,
                              const double* alpha, double beta, double beta_sum, int k_count,
                              double* out);

  // coef[k] = beta / (ctot[k] + beta_sum). Returns sum_k alpha[k] * coef[k],
  // which is both the A-bucket mass of the forward decomposition and the
  // zero-count X mass of the inverted-index decomposition.
  double (*beta_coef)(const int32_t* ctot, const double* alpha, double beta, double beta_sum,
                      int k_count, double* coef);

  // q[k] = (alpha[k] + cd[k]) / (ctot[k] + beta_sum).
  void (*doc_coef)(const int32_t* cd, const int32_t* ctot, const double* alpha, double beta_sum,
                   int k_count, double* q);

  // sum_k |a[k] - b[k]| in 64-bit.
  int64_t (*l1_distance)(const int32_t* a, const int32_t* b, int k_count);

  // dst[k] += src[k].
  void (*vec_add)(int32_t* dst, const int32_t* src, int k_count);

  const char* name;
};

// Scalar reference kernels. Always available.
const Kernels& scalar();

#if defined(__x86_64__) || defined(_M_X64)
// AVX2 kernels. Call only when avx2_supported() is true.
const Kernels& avx2();
bool avx2_supported();
#endif

// The variant selected at startup: an explicit force() override if set, else
// the BLOCKLDA_KERNEL environment variable ("scalar", "avx2", "auto"), else
// the best the CPU supports.
const Kernels& active();

// Override the selection ("scalar", "avx2", "auto"). Throws ConfigError for
// unknown names or variants this machine cannot run.
void force(const char* which);

}  // namespace blocklda::kernels
