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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "blocklda/kernels.hpp"
#include "blocklda/rng.hpp"

using namespace blocklda;

namespace {

struct KernelInputs {
  std::vector<int32_t> cd, ct, ctot;
  std::vector<double> alpha;
  double beta, beta_sum;
};

KernelInputs random_inputs(RngStream& rng, int k_count) {
  KernelInputs in;
  in.cd.resize(static_cast<size_t>(k_count));
  in.ct.resize(static_cast<size_t>(k_count));
  in.ctot.resize(static_cast<size_t>(k_count));
  in.alpha.resize(static_cast<size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    in.ct[static_cast<size_t>(k)] = static_cast<int32_t>(rng.next_below(50));
    in.cd[static_cast<size_t>(k)] = static_cast<int32_t>(rng.next_below(30));
    in.ctot[static_cast<size_t>(k)] =
        in.ct[static_cast<size_t>(k)] + static_cast<int32_t>(rng.next_below(100));
    in.alpha[static_cast<size_t>(k)] = 0.01 + rng.next_double();
  }
  in.beta = 0.001 + rng.next_double() * 0.2;
  in.beta_sum = in.beta * (10.0 + static_cast<double>(rng.next_below(1000)));
  return in;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

// The scalar kernels are the reference; every other variant must agree on
// each element bit-for-bit (same IEEE ops in the same per-lane order) and on
// reductions to tight relative tolerance (association differs).
TEST_CASE("all variants agree with the scalar reference") {
  std::vector<const kernels::Kernels*> variants{&kernels::scalar()};
#if defined(__x86_64__) || defined(_M_X64)
  if (kernels::avx2_supported()) variants.push_back(&kernels::avx2());
#endif
  REQUIRE(variants.size() >= 1);

  RngStream rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int k_count = 1 + static_cast<int>(rng.next_below(67));  // cover tails of 4/8 lanes
    const KernelInputs in = random_inputs(rng, k_count);

    std::vector<double> ref_out(static_cast<size_t>(k_count));
    const double ref_total = kernels::scalar().dense_conditional(
        in.cd.data(), in.ct.data(), in.ctot.data(), in.alpha.data(), in.beta, in.beta_sum,
        k_count, ref_out.data());
    std::vector<double> ref_coef(static_cast<size_t>(k_count));
    const double ref_mass = kernels::scalar().beta_coef(in.ctot.data(), in.alpha.data(), in.beta,
                                                        in.beta_sum, k_count, ref_coef.data());
    std::vector<double> ref_q(static_cast<size_t>(k_count));
    kernels::scalar().doc_coef(in.cd.data(), in.ctot.data(), in.alpha.data(), in.beta_sum,
                               k_count, ref_q.data());
    const int64_t ref_l1 = kernels::scalar().l1_distance(in.cd.data(), in.ct.data(), k_count);

    for (const kernels::Kernels* variant : variants) {
      std::vector<double> out(static_cast<size_t>(k_count));
      const double total = variant->dense_conditional(in.cd.data(), in.ct.data(), in.ctot.data(),
                                                      in.alpha.data(), in.beta, in.beta_sum,
                                                      k_count, out.data());
      for (int k = 0; k < k_count; ++k) {
        CHECK(out[static_cast<size_t>(k)] == ref_out[static_cast<size_t>(k)]);
      }
      CHECK(std::abs(total - ref_total) <= 1e-13 * std::abs(ref_total) + 1e-300);

      std::vector<double> coef(static_cast<size_t>(k_count));
      const double mass = variant->beta_coef(in.ctot.data(), in.alpha.data(), in.beta, in.beta_sum,
                                             k_count, coef.data());
      for (int k = 0; k < k_count; ++k) {
        CHECK(coef[static_cast<size_t>(k)] == ref_coef[static_cast<size_t>(k)]);
      }
      CHECK(std::abs(mass - ref_mass) <= 1e-13 * std::abs(ref_mass) + 1e-300);

      std::vector<double> q(static_cast<size_t>(k_count));
      variant->doc_coef(in.cd.data(), in.ctot.data(), in.alpha.data(), in.beta_sum, k_count,
                        q.data());
      for (int k = 0; k < k_count; ++k) {
        CHECK(q[static_cast<size_t>(k)] == ref_q[static_cast<size_t>(k)]);
      }

      CHECK(variant->l1_distance(in.cd.data(), in.ct.data(), k_count) == ref_l1);

      std::vector<int32_t> dst = in.cd;
      variant->vec_add(dst.data(), in.ct.data(), k_count);
      for (int k = 0; k < k_count; ++k) {
        CHECK(dst[static_cast<size_t>(k)] ==
              in.cd[static_cast<size_t>(k)] + in.ct[static_cast<size_t>(k)]);
      }
    }
  }
}

TEST_CASE("scalar kernels compute the definitional formulas") {
  const std::vector<int32_t> cd{3, 0};
  const std::vector<int32_t> ct{2, 0};
  const std::vector<int32_t> ctot{5, 1};
  const std::vector<double> alpha{0.1, 0.1};
  const double beta = 0.01;
  const double beta_sum = 0.1;

  std::vector<double> out(2);
  const double total = kernels::scalar().dense_conditional(cd.data(), ct.data(), ctot.data(),
                                                           alpha.data(), beta, beta_sum, 2,
                                                           out.data());
  CHECK(out[0] == (3 + 0.1) * (2 + 0.01) / (5 + 0.1));
  CHECK(out[1] == (0 + 0.1) * (0 + 0.01) / (1 + 0.1));
  CHECK(total == out[0] + out[1]);

  std::vector<double> coef(2);
  const double mass =
      kernels::scalar().beta_coef(ctot.data(), alpha.data(), beta, beta_sum, 2, coef.data());
  CHECK(coef[0] == beta / 5.1);
  CHECK(coef[1] == beta / 1.1);
  CHECK(mass == alpha[0] * coef[0] + alpha[1] * coef[1]);
}

TEST_CASE("force/active selection") {
  kernels::force("scalar");
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::force("auto");
#if defined(__x86_64__) || defined(_M_X64)
  if (kernels::avx2_supported()) CHECK(std::string(kernels::active().name) == "avx2");
#endif
  CHECK_THROWS(kernels::force("neon512"));
}

TEST_SUITE_END();
