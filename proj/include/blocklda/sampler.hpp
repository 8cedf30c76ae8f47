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
#include <functional>
#include <span>
#include <vector>

#include "blocklda/corpus.hpp"
#include "blocklda/model.hpp"
#include "blocklda/rng.hpp"

namespace blocklda {

// Three samplers draw from the same collapsed conditional
//
//   p(z = k) ∝ (C_d^k + alpha_k) (C_t^k + beta) / (C_k + beta_sum)
//
// with the current token's counts already removed:
//  - the dense sampler evaluates all K topics (the oracle the sparse ones
//    are equivalence-tested against),
//  - the forward sampler splits the mass into A/B/C buckets so a draw costs
//    O(K_d + K_t) count-entry reads,
//  - the inverted sampler splits into X/Y buckets around a per-word
//    coefficient cache, the shape that pays off when tokens are visited
//    word-by-word through an inverted index.

// Per-pass instrumentation.
//
// The sparse counters track reads of doc-row / word-row count entries:
// sparse_build_entries during conditional construction (the O(K_d + K_t)
// part), sparse_walk_entries during the bucket walk. Cache lookups and the
// dense A/X tail walks read no count entries and are not counted.
// dense_entries_touched counts the K slots the dense sampler evaluates.
struct SamplerStats {
  uint64_t tokens_sampled = 0;
  uint64_t sparse_build_entries = 0;
  uint64_t sparse_walk_entries = 0;
  uint64_t dense_entries_touched = 0;
  // Forward sampler: [A, B, C]. Inverted sampler: [X, Y, unused].
  uint64_t bucket_hits[3] = {0, 0, 0};
  uint64_t word_cache_builds = 0;
  uint64_t word_cache_build_entries = 0;

  uint64_t sparse_entries_touched() const { return sparse_build_entries + sparse_walk_entries; }

  void merge(const SamplerStats& other);
};

struct DenseConditional {
  std::vector<double> weights;
  double total = 0.0;
};

// Scatter buffers reused across tokens so the dense path does not allocate.
class DenseWorkspace {
 public:
  explicit DenseWorkspace(int32_t k_topics)
      : cd_(static_cast<size_t>(k_topics), 0), ct_(static_cast<size_t>(k_topics), 0) {}

  std::span<Count> cd() { return cd_; }
  std::span<Count> ct() { return ct_; }

 private:
  std::vector<Count> cd_, ct_;
};

// Evaluates the collapsed conditional for all K topics. Counts must already
// exclude the token being resampled. Throws InvariantViolationError if any
// denominator C_k + beta_sum is not positive, NumericalError on non-finite
// mass.
void build_dense_conditional(const DocTopicRow& doc, const WordTopicRow& word,
                             const TopicTotals& totals, const Hyperparameters& hyper,
                             DenseWorkspace& ws, DenseConditional& out, SamplerStats& stats);

// One uniform draw, linear scan. Throws NumericalError unless total mass is
// positive and finite.
TopicId sample_dense(const DenseConditional& cond, RngStream& rng);

// Per-document caches for the forward A/B/C decomposition:
//   A_k = alpha_k beta / (C_k + beta_sum)           (corpus-wide shape)
//   B_k = beta C_d^k / (C_k + beta_sum)             (document)
//   C_k = (alpha_k + C_d^k)(C_t^k) / (C_k + beta_sum)   (token)
// bcoef[k] = beta/(C_k+beta_sum) and q[k] = (alpha_k+C_d^k)/(C_k+beta_sum)
// are built dense in O(K) per document and maintained in O(1) per count
// change; the masses of A and B ride along.
class ForwardDocCaches {
 public:
  void build(const DocTopicRow& doc, const TopicTotals& totals, const Hyperparameters& hyper);

  // Call after the (doc,topic) and totals counts of topic k changed.
  void update_topic(TopicId k, const DocTopicRow& doc, const TopicTotals& totals,
                    const Hyperparameters& hyper);

  double a_mass() const { return a_mass_; }
  double b_mass() const { return b_mass_; }
  std::span<const double> bcoef() const { return bcoef_; }
  std::span<const double> q() const { return q_; }

  // Compares every cached value against a from-scratch rebuild; throws
  // InternalError beyond tol. For debug runs and the coherence tests.
  void check_coherent(const DocTopicRow& doc, const TopicTotals& totals,
                      const Hyperparameters& hyper, double tol) const;

 private:
  std::vector<double> bcoef_;  // beta / (C_k + beta_sum)
  std::vector<double> q_;      // (alpha_k + C_d^k) / (C_k + beta_sum)
  std::vector<double> bterm_;  // bcoef[k] * C_d^k
  double a_mass_ = 0.0;
  double b_mass_ = 0.0;
};

// Draws from the A/B/C decomposition; identical distribution to the dense
// conditional. Bucket walk order C, B, A (most mass first).
TopicId sample_sparse_abc(const DocTopicRow& doc, const WordTopicRow& word,
                          const ForwardDocCaches& caches, const Hyperparameters& hyper,
                          RngStream& rng, SamplerStats& stats);

// Per-word cache for the inverted X/Y decomposition:
//   X_k = coef[k] alpha_k,  Y_k = coef[k] C_d^k,
//   coef[k] = (C_t^k + beta) / (C_k + beta_sum).
// Built once per word in O(K + K_t), shared by every token of that word in
// the partition, maintained in O(1) per count change.
class InvertedWordCache {
 public:
  void build(const WordTopicRow& word, const TopicTotals& totals, const Hyperparameters& hyper,
             SamplerStats& stats);

  // Call after word/totals counts of topic k changed; word_count is the new
  // C_t^k.
  void update_topic(TopicId k, Count word_count, const TopicTotals& totals,
                    const Hyperparameters& hyper);

  double x_mass() const { return x_mass_; }
  std::span<const double> coef() const { return coef_; }

  void check_coherent(const WordTopicRow& word, const TopicTotals& totals,
                      const Hyperparameters& hyper, double tol) const;

 private:
  std::vector<double> coef_;
  double x_mass_ = 0.0;
};

// Draws from the X/Y decomposition. Bucket walk order Y, X.
TopicId sample_sparse_xy(const DocTopicRow& doc, const InvertedWordCache& cache,
                         const Hyperparameters& hyper, RngStream& rng, SamplerStats& stats);

// Optional per-token callback (local doc index, token position); used by the
// exactly-once instrumentation.
using TokenHook = std::function<void(int32_t, int32_t)>;

// One sampling round over a partition: every token whose term is on the task
// list is resampled exactly once via decrement -> X/Y draw -> increment.
// Postings are walked per term in ascending term order; the word cache is
// built once per term and maintained incrementally. The totals replica sees
// only this worker's updates. A task term missing from the held block is a
// ProtocolViolationError.
void gibbs_pass_inverted(DataPartition& partition, std::span<const TermId> task_terms,
                         ModelBlock& block, std::vector<DocTopicRow>& doc_rows,
                         TopicTotals& totals_replica, const Hyperparameters& hyper, RngStream& rng,
                         SamplerStats& stats, const TokenHook* on_token = nullptr);

}  // namespace blocklda
