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

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstdlib>

// This translation unit is compiled with -mavx2. Entry points must only be
// reached after avx2_supported() returned true.
//
// Per-element arithmetic uses plain mul/add/div (no FMA) so each lane matches
// the scalar kernel bit-for-bit. Reductions keep four lane accumulators and
// fold them in a fixed order, so results are reproducible even though the
// association differs from the scalar left-to-right sum.

namespace blocklda::kernels {
namespace {

inline __m256d load4_i32_as_pd(const int32_t* p) {
  return _mm256_cvtepi32_pd(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

inline double fold4(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

double dense_conditional_avx2(const int32_t* cd, const int32_t* ct, const int32_t* ctot,
                              const double* alpha, double beta, double beta_sum, int k_count,
                              double* out) {
  const __m256d vbeta = _mm256_set1_pd(beta);
  const __m256d vbsum = _mm256_set1_pd(beta_sum);
  __m256d acc = _mm256_setzero_pd();
  int k = 0;
  for (; k + 4 <= k_count; k += 4) {
    const __m256d num1 = _mm256_add_pd(load4_i32_as_pd(cd + k), _mm256_loadu_pd(alpha + k));
    const __m256d num2 = _mm256_add_pd(load4_i32_as_pd(ct + k), vbeta);
    const __m256d den = _mm256_add_pd(load4_i32_as_pd(ctot + k), vbsum);
    const __m256d w = _mm256_div_pd(_mm256_mul_pd(num1, num2), den);
    _mm256_storeu_pd(out + k, w);
    acc = _mm256_add_pd(acc, w);
  }
  double total = fold4(acc);
  for (; k < k_count; ++k) {
    const double w = (cd[k] + alpha[k]) * (ct[k] + beta) / (ctot[k] + beta_sum);
    out[k] = w;
    total += w;
  }
  return total;
}

double beta_coef_avx2(const int32_t* ctot, const double* alpha, double beta, double beta_sum,
                      int k_count, double* coef) {
  const __m256d vbeta = _mm256_set1_pd(beta);
  const __m256d vbsum = _mm256_set1_pd(beta_sum);
  __m256d acc = _mm256_setzero_pd();
  int k = 0;
  for (; k + 4 <= k_count; k += 4) {
    const __m256d den = _mm256_add_pd(load4_i32_as_pd(ctot + k), vbsum);
    const __m256d c = _mm256_div_pd(vbeta, den);
    _mm256_storeu_pd(coef + k, c);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(alpha + k), c));
  }
  double mass = fold4(acc);
  for (; k < k_count; ++k) {
    const double c = beta / (ctot[k] + beta_sum);
    coef[k] = c;
    mass += alpha[k] * c;
  }
  return mass;
}

void doc_coef_avx2(const int32_t* cd, const int32_t* ctot, const double* alpha, double beta_sum,
                   int k_count, double* q) {
  const __m256d vbsum = _mm256_set1_pd(beta_sum);
  int k = 0;
  for (; k + 4 <= k_count; k += 4) {
    const __m256d num = _mm256_add_pd(_mm256_loadu_pd(alpha + k), load4_i32_as_pd(cd + k));
    const __m256d den = _mm256_add_pd(load4_i32_as_pd(ctot + k), vbsum);
    _mm256_storeu_pd(q + k, _mm256_div_pd(num, den));
  }
  for (; k < k_count; ++k) {
    q[k] = (alpha[k] + cd[k]) / (ctot[k] + beta_sum);
  }
}

int64_t l1_distance_avx2(const int32_t* a, const int32_t* b, int k_count) {
  __m256i acc = _mm256_setzero_si256();
  int k = 0;
  for (; k + 8 <= k_count; k += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + k));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + k));
    const __m256i ad = _mm256_abs_epi32(_mm256_sub_epi32(va, vb));
    acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(ad)));
    acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(ad, 1)));
  }
  alignas(32) int64_t lane[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lane), acc);
  int64_t sum = lane[0] + lane[1] + lane[2] + lane[3];
  for (; k < k_count; ++k) {
    sum += std::abs(static_cast<int64_t>(a[k]) - b[k]);
  }
  return sum;
}

void vec_add_avx2(int32_t* dst, const int32_t* src, int k_count) {
  int k = 0;
  for (; k + 8 <= k_count; k += 8) {
    const __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + k));
    const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + k));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + k), _mm256_add_epi32(d, s));
  }
  for (; k < k_count; ++k) {
    dst[k] += src[k];
  }
}

}  // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

const Kernels& avx2() {
  static const Kernels k = {
      dense_conditional_avx2, beta_coef_avx2, doc_coef_avx2,
      l1_distance_avx2,       vec_add_avx2,   "avx2",
  };
  return k;
}

}  // namespace blocklda::kernels

#endif  // x86-64
