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

#include "blocklda/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "blocklda/error.hpp"
#include "blocklda/kernels.hpp"

namespace blocklda {

void SamplerStats::merge(const SamplerStats& other) {
  tokens_sampled += other.tokens_sampled;
  sparse_build_entries += other.sparse_build_entries;
  sparse_walk_entries += other.sparse_walk_entries;
  dense_entries_touched += other.dense_entries_touched;
  for (int i = 0; i < 3; ++i) bucket_hits[i] += other.bucket_hits[i];
  word_cache_builds += other.word_cache_builds;
  word_cache_build_entries += other.word_cache_build_entries;
}

void build_dense_conditional(const DocTopicRow& doc, const WordTopicRow& word,
                             const TopicTotals& totals, const Hyperparameters& hyper,
                             DenseWorkspace& ws, DenseConditional& out, SamplerStats& stats) {
  const int32_t K = hyper.K;
  for (int32_t k = 0; k < K; ++k) {
    if (totals[k] + hyper.beta_sum <= 0.0) {
      throw InvariantViolationError("non-positive denominator at topic " + std::to_string(k));
    }
  }

  std::span<Count> cd = ws.cd();
  std::span<Count> ct = ws.ct();
  std::memset(cd.data(), 0, sizeof(Count) * static_cast<size_t>(K));
  std::memset(ct.data(), 0, sizeof(Count) * static_cast<size_t>(K));
  doc.for_each_nonzero([&](TopicId k, Count c) { cd[static_cast<size_t>(k)] = c; });
  for (const TopicCount& e : word.entries()) ct[static_cast<size_t>(e.topic)] = e.count;

  out.weights.resize(static_cast<size_t>(K));
  out.total = kernels::active().dense_conditional(cd.data(), ct.data(), totals.counts.data(),
                                                  hyper.alpha.data(), hyper.beta, hyper.beta_sum,
                                                  K, out.weights.data());
  stats.dense_entries_touched += static_cast<uint64_t>(K);
  if (!std::isfinite(out.total)) throw NumericalError("dense conditional mass is not finite");
}

TopicId sample_dense(const DenseConditional& cond, RngStream& rng) {
  if (!std::isfinite(cond.total) || cond.total <= 0.0) {
    throw NumericalError("cannot sample from mass " + std::to_string(cond.total));
  }
  double u = rng.next_uniform(cond.total);
  const int32_t K = static_cast<int32_t>(cond.weights.size());
  for (int32_t k = 0; k < K; ++k) {
    u -= cond.weights[static_cast<size_t>(k)];
    if (u < 0.0) return k;
  }
  return K - 1;  // rounding slack lands on the last topic
}

void ForwardDocCaches::build(const DocTopicRow& doc, const TopicTotals& totals,
                             const Hyperparameters& hyper) {
  const size_t K = static_cast<size_t>(hyper.K);
  bcoef_.resize(K);
  q_.resize(K);
  bterm_.assign(K, 0.0);
  a_mass_ = kernels::active().beta_coef(totals.counts.data(), hyper.alpha.data(), hyper.beta,
                                        hyper.beta_sum, hyper.K, bcoef_.data());

  static thread_local std::vector<Count> cd_scratch;
  cd_scratch.assign(K, 0);
  doc.for_each_nonzero([&](TopicId k, Count c) { cd_scratch[static_cast<size_t>(k)] = c; });
  kernels::active().doc_coef(cd_scratch.data(), totals.counts.data(), hyper.alpha.data(),
                             hyper.beta_sum, hyper.K, q_.data());

  b_mass_ = 0.0;
  doc.for_each_nonzero([&](TopicId k, Count c) {
    const double term = bcoef_[static_cast<size_t>(k)] * c;
    bterm_[static_cast<size_t>(k)] = term;
    b_mass_ += term;
  });
}

void ForwardDocCaches::update_topic(TopicId k, const DocTopicRow& doc, const TopicTotals& totals,
                                    const Hyperparameters& hyper) {
  const size_t i = static_cast<size_t>(k);
  const double denom = totals[k] + hyper.beta_sum;
  const double bcoef_new = hyper.beta / denom;
  const Count cd = doc.count_of(k);

  a_mass_ += hyper.alpha[i] * (bcoef_new - bcoef_[i]);
  const double bterm_new = bcoef_new * cd;
  b_mass_ += bterm_new - bterm_[i];
  bcoef_[i] = bcoef_new;
  bterm_[i] = bterm_new;
  q_[i] = (hyper.alpha[i] + cd) / denom;
}

void ForwardDocCaches::check_coherent(const DocTopicRow& doc, const TopicTotals& totals,
                                      const Hyperparameters& hyper, double tol) const {
  ForwardDocCaches fresh;
  fresh.build(doc, totals, hyper);
  double worst = std::abs(a_mass_ - fresh.a_mass_) + std::abs(b_mass_ - fresh.b_mass_);
  for (size_t i = 0; i < bcoef_.size(); ++i) {
    worst = std::max(worst, std::abs(bcoef_[i] - fresh.bcoef_[i]));
    worst = std::max(worst, std::abs(q_[i] - fresh.q_[i]));
  }
  if (!(worst <= tol)) {
    throw InternalError("forward caches drifted by " + std::to_string(worst));
  }
}

TopicId sample_sparse_abc(const DocTopicRow& doc, const WordTopicRow& word,
                          const ForwardDocCaches& caches, const Hyperparameters& hyper,
                          RngStream& rng, SamplerStats& stats) {
  const std::span<const double> q = caches.q();
  const std::span<const double> bcoef = caches.bcoef();

  double c_mass = 0.0;
  for (const TopicCount& e : word.entries()) {
    c_mass += q[static_cast<size_t>(e.topic)] * e.count;
  }
  stats.sparse_build_entries += static_cast<uint64_t>(word.nonzero());

  const double total = caches.a_mass() + caches.b_mass() + c_mass;
  if (!std::isfinite(total) || total <= 0.0) {
    throw NumericalError("forward sampler mass " + std::to_string(total));
  }
  double u = rng.next_uniform(total);

  if (u < c_mass) {
    ++stats.bucket_hits[2];
    TopicId last = 0;
    for (const TopicCount& e : word.entries()) {
      ++stats.sparse_walk_entries;
      u -= q[static_cast<size_t>(e.topic)] * e.count;
      last = e.topic;
      if (u < 0.0) return e.topic;
    }
    return last;
  }
  u -= c_mass;

  if (u < caches.b_mass()) {
    ++stats.bucket_hits[1];
    TopicId last = 0;
    doc.walk_nonzero([&](TopicId k, Count c) {
      ++stats.sparse_walk_entries;
      u -= bcoef[static_cast<size_t>(k)] * c;
      last = k;
      return u >= 0.0;
    });
    return last;
  }
  u -= caches.b_mass();

  ++stats.bucket_hits[0];
  for (int32_t k = 0; k < hyper.K; ++k) {
    u -= hyper.alpha[static_cast<size_t>(k)] * bcoef[static_cast<size_t>(k)];
    if (u < 0.0) return k;
  }
  return hyper.K - 1;
}

void InvertedWordCache::build(const WordTopicRow& word, const TopicTotals& totals,
                              const Hyperparameters& hyper, SamplerStats& stats) {
  coef_.resize(static_cast<size_t>(hyper.K));
  x_mass_ = kernels::active().beta_coef(totals.counts.data(), hyper.alpha.data(), hyper.beta,
                                        hyper.beta_sum, hyper.K, coef_.data());
  for (const TopicCount& e : word.entries()) {
    const size_t i = static_cast<size_t>(e.topic);
    const double fresh = (e.count + hyper.beta) / (totals[e.topic] + hyper.beta_sum);
    x_mass_ += hyper.alpha[i] * (fresh - coef_[i]);
    coef_[i] = fresh;
  }
  ++stats.word_cache_builds;
  stats.word_cache_build_entries += static_cast<uint64_t>(hyper.K) +
                                    static_cast<uint64_t>(word.nonzero());
}

void InvertedWordCache::update_topic(TopicId k, Count word_count, const TopicTotals& totals,
                                     const Hyperparameters& hyper) {
  const size_t i = static_cast<size_t>(k);
  const double fresh = (word_count + hyper.beta) / (totals[k] + hyper.beta_sum);
  x_mass_ += hyper.alpha[i] * (fresh - coef_[i]);
  coef_[i] = fresh;
}

void InvertedWordCache::check_coherent(const WordTopicRow& word, const TopicTotals& totals,
                                       const Hyperparameters& hyper, double tol) const {
  InvertedWordCache fresh;
  SamplerStats scratch;
  fresh.build(word, totals, hyper, scratch);
  double worst = std::abs(x_mass_ - fresh.x_mass_);
  for (size_t i = 0; i < coef_.size(); ++i) {
    worst = std::max(worst, std::abs(coef_[i] - fresh.coef_[i]));
  }
  if (!(worst <= tol)) {
    throw InternalError("word cache drifted by " + std::to_string(worst));
  }
}

TopicId sample_sparse_xy(const DocTopicRow& doc, const InvertedWordCache& cache,
                         const Hyperparameters& hyper, RngStream& rng, SamplerStats& stats) {
  const std::span<const double> coef = cache.coef();

  double y_mass = 0.0;
  doc.for_each_nonzero([&](TopicId k, Count c) { y_mass += coef[static_cast<size_t>(k)] * c; });
  stats.sparse_build_entries += static_cast<uint64_t>(doc.nonzero());

  const double total = cache.x_mass() + y_mass;
  if (!std::isfinite(total) || total <= 0.0) {
    throw NumericalError("inverted sampler mass " + std::to_string(total));
  }
  double u = rng.next_uniform(total);

  if (u < y_mass) {
    ++stats.bucket_hits[1];
    TopicId last = 0;
    doc.walk_nonzero([&](TopicId k, Count c) {
      ++stats.sparse_walk_entries;
      u -= coef[static_cast<size_t>(k)] * c;
      last = k;
      return u >= 0.0;
    });
    return last;
  }
  u -= y_mass;

  ++stats.bucket_hits[0];
  for (int32_t k = 0; k < hyper.K; ++k) {
    u -= hyper.alpha[static_cast<size_t>(k)] * coef[static_cast<size_t>(k)];
    if (u < 0.0) return k;
  }
  return hyper.K - 1;
}

void gibbs_pass_inverted(DataPartition& partition, std::span<const TermId> task_terms,
                         ModelBlock& block, std::vector<DocTopicRow>& doc_rows,
                         TopicTotals& totals_replica, const Hyperparameters& hyper, RngStream& rng,
                         SamplerStats& stats, const TokenHook* on_token) {
  InvertedWordCache cache;
  for (TermId t : task_terms) {
    const Posting* p = partition.inverted.begin_of(t);
    const Posting* end = partition.inverted.end_of(t);
    if (p == end) continue;

    WordTopicRow* row = block.find(t);
    if (row == nullptr) {
      throw ProtocolViolationError("task term " + std::to_string(t) +
                                   " is outside the held block " + std::to_string(block.block_id));
    }

    cache.build(*row, totals_replica, hyper, stats);
    for (; p != end; ++p) {
      Document& doc = partition.documents[static_cast<size_t>(p->doc)];
      DocTopicRow& doc_row = doc_rows[static_cast<size_t>(p->doc)];
      const TopicId old_k = doc.assignments[static_cast<size_t>(p->pos)];

      Count c = decrement_counts(doc_row, *row, totals_replica, old_k);
      cache.update_topic(old_k, c, totals_replica, hyper);

      const TopicId new_k = sample_sparse_xy(doc_row, cache, hyper, rng, stats);

      c = increment_counts(doc_row, *row, totals_replica, new_k);
      cache.update_topic(new_k, c, totals_replica, hyper);

      doc.assignments[static_cast<size_t>(p->pos)] = new_k;
      ++stats.tokens_sampled;
      if (on_token != nullptr) (*on_token)(p->doc, p->pos);
    }
  }
}

}  // namespace blocklda
