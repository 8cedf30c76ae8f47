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

#include <cstdlib>

namespace blocklda::kernels {
namespace {

double dense_conditional_scalar(const int32_t* cd, const int32_t* ct, const int32_t* ctot,
                                const double* alpha, double beta, double beta_sum, int k_count,
                                double* out) {
  double total = 0.0;
  for (int k = 0; k < k_count; ++k) {
    const double w = (cd[k] + alpha[k]) * (ct[k] + beta) / (ctot[k] + beta_sum);
    out[k] = w;
    total += w;
  }
  return total;
}

double beta_coef_scalar(const int32_t* ctot, const double* alpha, double beta, double beta_sum,
                        int k_count, double* coef) {
  double mass = 0.0;
  for (int k = 0; k < k_count; ++k) {
    const double c = beta / (ctot[k] + beta_sum);
    coef[k] = c;
    mass += alpha[k] * c;
  }
  return mass;
}

void doc_coef_scalar(const int32_t* cd, const int32_t* ctot, const double* alpha, double beta_sum,
                     int k_count, double* q) {
  for (int k = 0; k < k_count; ++k) {
    q[k] = (alpha[k] + cd[k]) / (ctot[k] + beta_sum);
  }
}

int64_t l1_distance_scalar(const int32_t* a, const int32_t* b, int k_count) {
  int64_t sum = 0;
  for (int k = 0; k < k_count; ++k) {
    sum += std::abs(static_cast<int64_t>(a[k]) - b[k]);
  }
  return sum;
}

void vec_add_scalar(int32_t* dst, const int32_t* src, int k_count) {
  for (int k = 0; k < k_count; ++k) {
    dst[k] += src[k];
  }
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k = {
      dense_conditional_scalar, beta_coef_scalar, doc_coef_scalar,
      l1_distance_scalar,       vec_add_scalar,   "scalar",
  };
  return k;
}

}  // namespace blocklda::kernels
