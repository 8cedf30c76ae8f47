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

#include "blocklda/model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "blocklda/error.hpp"

namespace blocklda {

Hyperparameters make_hyper(int32_t K, int32_t V, double alpha_symmetric, double beta) {
  return make_hyper(K, V, std::vector<double>(static_cast<size_t>(K), alpha_symmetric), beta);
}

Hyperparameters make_hyper(int32_t K, int32_t V, std::vector<double> alpha, double beta) {
  if (K < 1) throw ConfigError("K must be >= 1");
  if (static_cast<int32_t>(alpha.size()) != K) throw ConfigError("alpha must have length K");
  for (double a : alpha) {
    if (!(a > 0.0)) throw ConfigError("all alpha_k must be > 0");
  }
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");

  Hyperparameters hyper;
  hyper.K = K;
  hyper.V = V;
  hyper.alpha = std::move(alpha);
  hyper.alpha_sum = std::accumulate(hyper.alpha.begin(), hyper.alpha.end(), 0.0);
  hyper.beta = beta;
  hyper.beta_sum = static_cast<double>(V) * beta;
  return hyper;
}

namespace {

// Canonical row order: count descending, topic ascending for equal counts.
inline bool row_less(const TopicCount& a, const TopicCount& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.topic < b.topic;
}

}  // namespace

Count WordTopicRow::count_of(TopicId k) const {
  for (const TopicCount& e : entries_) {
    if (e.topic == k) return e.count;
  }
  return 0;
}

int64_t WordTopicRow::total() const {
  int64_t sum = 0;
  for (const TopicCount& e : entries_) sum += e.count;
  return sum;
}

// Moves entries_[i] (whose count just changed) back to its canonical slot.
void WordTopicRow::reposition(size_t i) {
  const TopicCount e = entries_[i];
  if (i > 0 && row_less(e, entries_[i - 1])) {
    size_t j = i;
    while (j > 0 && row_less(e, entries_[j - 1])) --j;
    std::rotate(entries_.begin() + static_cast<ptrdiff_t>(j),
                entries_.begin() + static_cast<ptrdiff_t>(i),
                entries_.begin() + static_cast<ptrdiff_t>(i) + 1);
  } else if (i + 1 < entries_.size() && row_less(entries_[i + 1], e)) {
    size_t j = i;
    while (j + 1 < entries_.size() && row_less(entries_[j + 1], e)) ++j;
    std::rotate(entries_.begin() + static_cast<ptrdiff_t>(i),
                entries_.begin() + static_cast<ptrdiff_t>(i) + 1,
                entries_.begin() + static_cast<ptrdiff_t>(j) + 1);
  }
}

Count WordTopicRow::increment(TopicId k) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].topic == k) {
      const Count c = ++entries_[i].count;
      reposition(i);
      return c;
    }
  }
  entries_.push_back({k, 1});
  reposition(entries_.size() - 1);
  return 1;
}

Count WordTopicRow::decrement(TopicId k) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].topic == k) {
      const Count c = --entries_[i].count;
      if (c == 0) {
        entries_.erase(entries_.begin() + static_cast<ptrdiff_t>(i));
      } else {
        reposition(i);
      }
      return c;
    }
  }
  throw ProtocolViolationError("word-topic underflow: term " + std::to_string(term_) + " topic " +
                               std::to_string(k) + " has no count to remove");
}

void WordTopicRow::assign_entries(std::vector<TopicCount> entries) {
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].count <= 0) {
      throw InvariantViolationError("word-topic row entries must be positive");
    }
    if (i > 0 && !row_less(entries[i - 1], entries[i])) {
      throw InvariantViolationError("word-topic row entries must be in canonical order");
    }
  }
  entries_ = std::move(entries);
}

Count DocTopicRow::count_of(TopicId k) const {
  if (is_dense()) return dense_[static_cast<size_t>(k)];
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), k,
                             [](const TopicCount& e, TopicId key) { return e.topic < key; });
  if (it != sparse_.end() && it->topic == k) return it->count;
  return 0;
}

int64_t DocTopicRow::total() const {
  int64_t sum = 0;
  for_each_nonzero([&](TopicId, Count c) { sum += c; });
  return sum;
}

void DocTopicRow::switch_to_dense() {
  dense_.assign(static_cast<size_t>(k_topics_), 0);
  for (const TopicCount& e : sparse_) dense_[static_cast<size_t>(e.topic)] = e.count;
  sparse_.clear();
  sparse_.shrink_to_fit();
}

Count DocTopicRow::increment(TopicId k) {
  if (is_dense()) {
    Count& c = dense_[static_cast<size_t>(k)];
    if (c++ == 0) ++nonzero_;
    return c;
  }
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), k,
                             [](const TopicCount& e, TopicId key) { return e.topic < key; });
  if (it != sparse_.end() && it->topic == k) {
    return ++it->count;
  }
  sparse_.insert(it, {k, 1});
  ++nonzero_;
  if (nonzero_ > k_topics_ / 4) switch_to_dense();
  return 1;
}

Count DocTopicRow::decrement(TopicId k) {
  if (is_dense()) {
    Count& c = dense_[static_cast<size_t>(k)];
    if (c == 0) {
      throw ProtocolViolationError("doc-topic underflow at topic " + std::to_string(k));
    }
    if (--c == 0) --nonzero_;
    return c;
  }
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), k,
                             [](const TopicCount& e, TopicId key) { return e.topic < key; });
  if (it == sparse_.end() || it->topic != k) {
    throw ProtocolViolationError("doc-topic underflow at topic " + std::to_string(k));
  }
  const Count c = --it->count;
  if (c == 0) {
    sparse_.erase(it);
    --nonzero_;
  }
  return c;
}

int64_t TopicTotals::total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

Count decrement_counts(DocTopicRow& doc, WordTopicRow& word, TopicTotals& totals, TopicId k) {
  Count& total = totals.counts[static_cast<size_t>(k)];
  if (total < 1) {
    throw ProtocolViolationError("topic-total underflow at topic " + std::to_string(k));
  }
  doc.decrement(k);
  const Count c = word.decrement(k);
  --total;
  return c;
}

Count increment_counts(DocTopicRow& doc, WordTopicRow& word, TopicTotals& totals, TopicId k) {
  doc.increment(k);
  const Count c = word.increment(k);
  ++totals.counts[static_cast<size_t>(k)];
  return c;
}

WordTopicRow* ModelBlock::find(TermId t) {
  auto it = std::lower_bound(terms.begin(), terms.end(), t);
  if (it == terms.end() || *it != t) return nullptr;
  return &rows[static_cast<size_t>(it - terms.begin())];
}

const WordTopicRow* ModelBlock::find(TermId t) const {
  return const_cast<ModelBlock*>(this)->find(t);
}

int64_t ModelBlock::nonzero_entries() const {
  int64_t sum = 0;
  for (const WordTopicRow& row : rows) sum += row.nonzero();
  return sum;
}

std::vector<ModelBlock> slice_blocks(const std::vector<WordTopicRow>& rows,
                                     const std::vector<std::vector<TermId>>& block_terms) {
  const TermId vocab_size = static_cast<TermId>(rows.size());
  std::vector<int32_t> owner(static_cast<size_t>(vocab_size), -1);
  for (size_t b = 0; b < block_terms.size(); ++b) {
    for (TermId t : block_terms[b]) {
      if (t < 0 || t >= vocab_size) {
        throw ConfigError("block term " + std::to_string(t) + " out of vocabulary range");
      }
      if (owner[static_cast<size_t>(t)] != -1) {
        throw ConfigError("block partition overlaps at term " + std::to_string(t));
      }
      owner[static_cast<size_t>(t)] = static_cast<int32_t>(b);
    }
  }
  for (TermId t = 0; t < vocab_size; ++t) {
    if (owner[static_cast<size_t>(t)] == -1) {
      throw ConfigError("block partition misses term " + std::to_string(t));
    }
  }

  std::vector<ModelBlock> blocks(block_terms.size());
  for (size_t b = 0; b < block_terms.size(); ++b) {
    ModelBlock& block = blocks[b];
    block.block_id = static_cast<int32_t>(b);
    block.version = 0;
    block.terms = block_terms[b];
    std::sort(block.terms.begin(), block.terms.end());
    block.rows.reserve(block.terms.size());
    for (TermId t : block.terms) block.rows.push_back(rows[static_cast<size_t>(t)]);
  }
  return blocks;
}

std::vector<WordTopicRow> merge_blocks(const std::vector<ModelBlock>& blocks, TermId vocab_size) {
  std::vector<WordTopicRow> rows(static_cast<size_t>(vocab_size));
  std::vector<bool> seen(static_cast<size_t>(vocab_size), false);
  for (TermId t = 0; t < vocab_size; ++t) rows[static_cast<size_t>(t)].set_term(t);
  for (const ModelBlock& block : blocks) {
    for (size_t i = 0; i < block.terms.size(); ++i) {
      const TermId t = block.terms[i];
      if (seen[static_cast<size_t>(t)]) {
        throw ConfigError("blocks overlap at term " + std::to_string(t));
      }
      seen[static_cast<size_t>(t)] = true;
      rows[static_cast<size_t>(t)] = block.rows[i];
    }
  }
  return rows;
}

CountModel::CountModel(int32_t num_docs, TermId vocab_size, int32_t k_topics)
    : doc_rows(static_cast<size_t>(num_docs), DocTopicRow(k_topics)),
      word_rows(static_cast<size_t>(vocab_size)),
      totals(k_topics) {
  for (TermId t = 0; t < vocab_size; ++t) word_rows[static_cast<size_t>(t)].set_term(t);
}

void CountModel::increment(DocId d, TermId t, TopicId k) {
  increment_counts(doc_rows[static_cast<size_t>(d)], word_rows[static_cast<size_t>(t)], totals, k);
}

void CountModel::decrement(DocId d, TermId t, TopicId k) {
  decrement_counts(doc_rows[static_cast<size_t>(d)], word_rows[static_cast<size_t>(t)], totals, k);
}

int64_t CountModel::model_nonzeros() const {
  int64_t sum = 0;
  for (const WordTopicRow& row : word_rows) sum += row.nonzero();
  return sum;
}

CountModel recount_from_documents(const std::vector<const Document*>& docs, TermId vocab_size,
                                  int32_t k_topics, int32_t num_docs) {
  CountModel model(num_docs, vocab_size, k_topics);
  for (const Document* doc : docs) {
    for (size_t n = 0; n < doc->tokens.size(); ++n) {
      const TopicId k = doc->assignments[n];
      if (k < 0 || k >= k_topics) {
        throw InvariantViolationError("token has no valid assignment during recount");
      }
      model.increment(doc->doc_id, doc->tokens[n], k);
    }
  }
  return model;
}

void check_conservation(const CountModel& model, const std::vector<int32_t>& doc_lengths,
                        int64_t total_tokens) {
  for (size_t d = 0; d < doc_lengths.size(); ++d) {
    if (model.doc_rows[d].total() != doc_lengths[d]) {
      throw InvariantViolationError("doc " + std::to_string(d) + " topic counts sum to " +
                                    std::to_string(model.doc_rows[d].total()) + ", expected " +
                                    std::to_string(doc_lengths[d]));
    }
  }
  std::vector<int64_t> per_topic(static_cast<size_t>(model.totals.size()), 0);
  for (const WordTopicRow& row : model.word_rows) {
    for (const TopicCount& e : row.entries()) per_topic[static_cast<size_t>(e.topic)] += e.count;
  }
  for (int32_t k = 0; k < model.totals.size(); ++k) {
    if (per_topic[static_cast<size_t>(k)] != model.totals[k]) {
      throw InvariantViolationError("topic " + std::to_string(k) + " word counts sum to " +
                                    std::to_string(per_topic[static_cast<size_t>(k)]) +
                                    ", totals say " + std::to_string(model.totals[k]));
    }
  }
  if (model.totals.total() != total_tokens) {
    throw InvariantViolationError("topic totals sum to " + std::to_string(model.totals.total()) +
                                  ", expected N = " + std::to_string(total_tokens));
  }
}

}  // namespace blocklda
