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
#include <span>
#include <vector>

#include "blocklda/corpus.hpp"

namespace blocklda {

// Symmetric beta, per-topic alpha. beta_sum is V * beta, computed once.
struct Hyperparameters {
  int32_t K = 0;
  int32_t V = 0;
  std::vector<double> alpha;
  double alpha_sum = 0.0;
  double beta = 0.0;
  double beta_sum = 0.0;
};

Hyperparameters make_hyper(int32_t K, int32_t V, double alpha_symmetric, double beta);
Hyperparameters make_hyper(int32_t K, int32_t V, std::vector<double> alpha, double beta);

struct TopicCount {
  TopicId topic;
  Count count;

  bool operator==(const TopicCount&) const = default;
};

// Sparse word-topic row: the nonzero C_k^t for one term, kept in canonical
// order (count descending, topic ascending for ties). Zero entries are
// evicted. Canonical order makes row layout a pure function of the count
// multiset, so equal states serialize identically and the sparse-bucket walk
// sees the heavy topics first.
class WordTopicRow {
 public:
  WordTopicRow() = default;
  explicit WordTopicRow(TermId term) : term_(term) {}

  TermId term() const { return term_; }
  void set_term(TermId t) { term_ = t; }

  int32_t nonzero() const { return static_cast<int32_t>(entries_.size()); }  // K_t
  std::span<const TopicCount> entries() const { return entries_; }
  Count count_of(TopicId k) const;
  int64_t total() const;

  // Both return the new count.
  Count increment(TopicId k);
  // Throws ProtocolViolationError on underflow (k absent): that means a
  // worker decremented a count it does not own this round.
  Count decrement(TopicId k);

  bool operator==(const WordTopicRow& other) const {
    return term_ == other.term_ && entries_ == other.entries_;
  }

  // Deserialization path: entries must already be canonical.
  void assign_entries(std::vector<TopicCount> entries);

 private:
  void reposition(size_t i);

  TermId term_ = 0;
  std::vector<TopicCount> entries_;
};

// Sparse doc-topic row C_d^k with a dense escape hatch: stays a topic-sorted
// sparse vector while K_d <= K/4, switches to a dense array beyond that (and
// stays dense). Nonzero iteration is topic-ascending in both modes, so the
// sampling trajectory does not depend on the representation.
class DocTopicRow {
 public:
  DocTopicRow() = default;
  explicit DocTopicRow(int32_t k_topics) : k_topics_(k_topics) {}

  int32_t nonzero() const { return nonzero_; }  // K_d
  bool is_dense() const { return !dense_.empty(); }
  Count count_of(TopicId k) const;
  int64_t total() const;  // == N_d when all tokens assigned

  // Both return the new count.
  Count increment(TopicId k);
  Count decrement(TopicId k);  // ProtocolViolationError on underflow

  // f(TopicId, Count) over nonzero entries, ascending topic id; return false
  // from f to stop early.
  template <typename F>
  void walk_nonzero(F&& f) const {
    if (is_dense()) {
      for (TopicId k = 0; k < k_topics_; ++k) {
        if (dense_[static_cast<size_t>(k)] > 0 && !f(k, dense_[static_cast<size_t>(k)])) return;
      }
    } else {
      for (const TopicCount& e : sparse_) {
        if (!f(e.topic, e.count)) return;
      }
    }
  }

  // f(TopicId, Count) over nonzero entries, ascending topic id.
  template <typename F>
  void for_each_nonzero(F&& f) const {
    walk_nonzero([&](TopicId k, Count c) {
      f(k, c);
      return true;
    });
  }

 private:
  void switch_to_dense();

  int32_t k_topics_ = 0;
  int32_t nonzero_ = 0;
  std::vector<TopicCount> sparse_;  // sorted by topic id
  std::vector<Count> dense_;
};

// Dense C_k, length K.
struct TopicTotals {
  std::vector<Count> counts;

  explicit TopicTotals(int32_t k_topics = 0) : counts(static_cast<size_t>(k_topics), 0) {}
  int32_t size() const { return static_cast<int32_t>(counts.size()); }
  int64_t total() const;
  Count operator[](TopicId k) const { return counts[static_cast<size_t>(k)]; }
};

// Applies one token's assignment change to the three count structures
// together. decrement is the "not counting this token" exclusion before
// sampling; increment restores the newly drawn topic. Both return the new
// word-topic count (the value sampler caches need).
Count decrement_counts(DocTopicRow& doc, WordTopicRow& word, TopicTotals& totals, TopicId k);
Count increment_counts(DocTopicRow& doc, WordTopicRow& word, TopicTotals& totals, TopicId k);

// The disjoint vocabulary slice of the word-topic matrix one worker holds for
// one round. rows[i] belongs to terms[i]; terms are ascending.
struct ModelBlock {
  int32_t block_id = 0;
  int32_t version = 0;  // rounds this block has been committed
  std::vector<TermId> terms;
  std::vector<WordTopicRow> rows;

  WordTopicRow* find(TermId t);
  const WordTopicRow* find(TermId t) const;
  int64_t nonzero_entries() const;

  bool operator==(const ModelBlock&) const = default;
};

// Splits per-term rows (index == term id) into blocks along block_terms.
// Every term must appear in exactly one block; overlap or gaps are a
// ConfigError.
std::vector<ModelBlock> slice_blocks(const std::vector<WordTopicRow>& rows,
                                     const std::vector<std::vector<TermId>>& block_terms);

// Inverse of slice_blocks: reassembles the full per-term row vector.
std::vector<WordTopicRow> merge_blocks(const std::vector<ModelBlock>& blocks, TermId vocab_size);

// Fully merged global state: all three count structures. Used for metrics,
// checkpoints, and invariant checks at barriers; workers never share one.
struct CountModel {
  std::vector<DocTopicRow> doc_rows;   // index == global doc id
  std::vector<WordTopicRow> word_rows;  // index == term id
  TopicTotals totals;

  CountModel() = default;
  CountModel(int32_t num_docs, TermId vocab_size, int32_t k_topics);

  void increment(DocId d, TermId t, TopicId k);
  void decrement(DocId d, TermId t, TopicId k);

  int64_t model_nonzeros() const;
};

// Recounts the full state from assignments; every token must be assigned.
CountModel recount_from_documents(const std::vector<const Document*>& docs, TermId vocab_size,
                                  int32_t k_topics, int32_t num_docs);

// Conservation at a consistent snapshot: sum_k C_d^k == N_d for all d,
// sum_t C_k^t == C_k for all k, sum_k C_k == N. Throws
// InvariantViolationError naming the first failure.
void check_conservation(const CountModel& model, const std::vector<int32_t>& doc_lengths,
                        int64_t total_tokens);

}  // namespace blocklda
