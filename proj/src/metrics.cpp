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

#include "blocklda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "blocklda/error.hpp"
#include "blocklda/kernels.hpp"

namespace blocklda {

double log_gamma(double x) {
  // Lanczos, g = 7, kmax = 8.
  static const double kLogRootTwoPi = 0.9189385332046727418;
  static const double kCoef[9] = {
      0.99999999999980993227684700473478,  676.520368121885098567009190444019,
      -1259.13921672240287047156078755283, 771.3234287776530788486528258894,
      -176.61502916214059906584551354,     12.507343278686904814458936853,
      -0.13857109526572011689554707,       9.984369578019570859563e-6,
      1.50563273514931155834e-7};
  if (!(x > 0.0)) throw NumericalError("log_gamma requires x > 0, got " + std::to_string(x));
  const double z = x - 1.0;
  double ag = kCoef[0];
  for (int k = 1; k <= 8; ++k) ag += kCoef[k] / (z + k);
  const double term1 = (z + 0.5) * std::log((z + 7.5) / M_E);
  const double term2 = kLogRootTwoPi + std::log(ag);
  return term1 + (term2 - 7.0);
}

double log_likelihood(const CountModel& model, const Hyperparameters& hyper) {
  const double lgam_beta = log_gamma(hyper.beta);
  const double lgam_beta_sum = log_gamma(hyper.beta_sum);
  const double lgam_alpha_sum = log_gamma(hyper.alpha_sum);

  double topic_part = 0.0;
  for (const WordTopicRow& row : model.word_rows) {
    for (const TopicCount& e : row.entries()) {
      if (e.count < 0) throw InvariantViolationError("negative word-topic count");
      topic_part += log_gamma(e.count + hyper.beta) - lgam_beta;
    }
  }
  for (int32_t k = 0; k < hyper.K; ++k) {
    const Count c = model.totals[k];
    if (c < 0) throw InvariantViolationError("negative topic total");
    topic_part += lgam_beta_sum - log_gamma(c + hyper.beta_sum);
  }

  double doc_part = 0.0;
  for (const DocTopicRow& doc : model.doc_rows) {
    doc_part += lgam_alpha_sum - log_gamma(static_cast<double>(doc.total()) + hyper.alpha_sum);
    doc.for_each_nonzero([&](TopicId k, Count c) {
      if (c < 0) throw InvariantViolationError("negative doc-topic count");
      doc_part += log_gamma(c + hyper.alpha[static_cast<size_t>(k)]) -
                  log_gamma(hyper.alpha[static_cast<size_t>(k)]);
    });
  }
  return topic_part + doc_part;
}

double delta_error(const TopicTotals& authoritative,
                   std::span<const TopicTotals* const> replicas, int64_t total_tokens) {
  if (replicas.empty() || total_tokens <= 0) return 0.0;
  int64_t drift = 0;
  for (const TopicTotals* replica : replicas) {
    if (replica->size() != authoritative.size()) {
      throw ShapeError("replica has K = " + std::to_string(replica->size()) +
                       ", authoritative has K = " + std::to_string(authoritative.size()));
    }
    drift += kernels::active().l1_distance(authoritative.counts.data(), replica->counts.data(),
                                           authoritative.size());
  }
  return static_cast<double>(drift) /
         (static_cast<double>(replicas.size()) * static_cast<double>(total_tokens));
}

int64_t MemoryReport::max_worker_word_entries() const {
  int64_t best = 0;
  for (const WorkerMemory& w : workers) best = std::max(best, w.word_topic_entries);
  return best;
}

int64_t MemoryReport::shard_total() const {
  int64_t sum = 0;
  for (int64_t e : shard_entries) sum += e;
  return sum;
}

void MetricsSink::write_csv(std::ostream& out, bool zero_timing) const {
  out << "iteration,round,wall_time_s,log_likelihood,delta_error,tokens_sampled,"
         "tokens_per_sec,max_worker_entries\n";
  char buf[64];
  for (const MetricsRecord& r : records_) {
    out << r.iteration << ',' << r.round << ',';
    const double wall = zero_timing ? 0.0 : r.wall_seconds;
    const double tps = zero_timing ? 0.0 : r.tokens_per_second;
    std::snprintf(buf, sizeof buf, "%.6f", wall);
    out << buf << ',';
    if (r.log_likelihood.has_value()) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.log_likelihood);
      out << buf;
    }
    out << ',';
    std::snprintf(buf, sizeof buf, "%.9f", r.delta_error);
    out << buf << ',' << r.tokens_sampled << ',';
    std::snprintf(buf, sizeof buf, "%.1f", tps);
    out << buf << ',' << r.max_worker_entries << '\n';
  }
}

double MetricsSink::total_wall_seconds() const {
  double sum = 0.0;
  for (const MetricsRecord& r : records_) sum += r.wall_seconds;
  return sum;
}

std::optional<double> MetricsSink::final_log_likelihood() const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->log_likelihood.has_value()) return it->log_likelihood;
  }
  return std::nullopt;
}

}  // namespace blocklda
