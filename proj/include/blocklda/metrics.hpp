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
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "blocklda/model.hpp"

namespace blocklda {

// log Gamma(x) for x > 0 via the Lanczos series (g = 7, 9 coefficients);
// relative error below 1e-10 across the count magnitudes seen here.
double log_gamma(double x);

// Complete-data joint log p(W, Z) of collapsed LDA with symmetric beta:
//
//   sum_k [ lgam(V*beta) - lgam(C_k + V*beta)
//           + sum_{t: C_t^k>0} (lgam(C_t^k + beta) - lgam(beta)) ]
// + sum_d [ lgam(alpha_sum) - lgam(N_d + alpha_sum)
//           + sum_{k: C_d^k>0} (lgam(C_d^k + alpha_k) - lgam(alpha_k)) ]
//
// evaluated on globally consistent merged counts. Negative counts are an
// InvariantViolationError.
double log_likelihood(const CountModel& model, const Hyperparameters& hyper);

// Parallelization error: the normalized l1 drift of the workers' topic-total
// replicas from the authoritative vector,
//   delta = (1/(M*N)) sum_m sum_k |T_k - replica_m[k]|,
// always in [0, 2]. ShapeError on length mismatch.
double delta_error(const TopicTotals& authoritative,
                   std::span<const TopicTotals* const> replicas, int64_t total_tokens);

// Logical entry counts (not bytes): what one worker keeps resident.
struct WorkerMemory {
  int64_t doc_topic_entries = 0;
  int64_t word_topic_entries = 0;  // held block / replica nonzeros (peak)
  int64_t totals_entries = 0;      // K
};

struct MemoryReport {
  std::vector<WorkerMemory> workers;
  std::vector<int64_t> shard_entries;  // stored (unheld) block nonzeros per shard

  int64_t max_worker_word_entries() const;
  int64_t shard_total() const;
};

// One metrics row. `round` is within-iteration; iteration 0 / round -1 is
// the pre-training measurement. log_likelihood is present on the last round
// of each iteration (and the initial row).
struct MetricsRecord {
  int32_t iteration = 0;
  int32_t round = -1;
  double wall_seconds = 0.0;
  std::optional<double> log_likelihood;
  double delta_error = 0.0;
  int64_t tokens_sampled = 0;
  double tokens_per_second = 0.0;
  int64_t max_worker_entries = 0;
};

class MetricsSink {
 public:
  void add(MetricsRecord record) { records_.push_back(record); }
  const std::vector<MetricsRecord>& records() const { return records_; }

  // CSV schema: iteration,round,wall_time_s,log_likelihood,delta_error,
  // tokens_sampled,tokens_per_sec,max_worker_entries. zero_timing writes
  // the two timing columns as 0 so deterministic runs are byte-reproducible.
  void write_csv(std::ostream& out, bool zero_timing) const;

  double total_wall_seconds() const;
  std::optional<double> final_log_likelihood() const;

 private:
  std::vector<MetricsRecord> records_;
};

}  // namespace blocklda
