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

#include "blocklda/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "blocklda/error.hpp"

namespace blocklda {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr uint64_t kInitStream = 0x696e6974;  // "init"

// All-or-nothing assignment state; a mixed corpus is a caller bug.
bool needs_assignment(const Corpus& corpus) {
  bool any_unassigned = false;
  bool any_assigned = false;
  for (const Document& doc : corpus.documents) {
    for (TopicId z : doc.assignments) {
      (z == kUnassigned ? any_unassigned : any_assigned) = true;
    }
  }
  if (any_unassigned && any_assigned) {
    throw InvariantViolationError("corpus is partially assigned");
  }
  return any_unassigned;
}

std::vector<int32_t> collect_doc_lengths(const Corpus& corpus) {
  std::vector<int32_t> lengths;
  lengths.reserve(corpus.documents.size());
  for (const Document& doc : corpus.documents) lengths.push_back(doc.length());
  return lengths;
}

// Word rows + totals recounted from assignments.
void recount_word_state(const Corpus& corpus, int32_t k_topics,
                        std::vector<WordTopicRow>& word_rows, TopicTotals& totals) {
  word_rows.assign(static_cast<size_t>(corpus.vocabulary.size), WordTopicRow());
  for (TermId t = 0; t < corpus.vocabulary.size; ++t) {
    word_rows[static_cast<size_t>(t)].set_term(t);
  }
  totals = TopicTotals(k_topics);
  for (const Document& doc : corpus.documents) {
    for (size_t n = 0; n < doc.tokens.size(); ++n) {
      const TopicId k = doc.assignments[n];
      word_rows[static_cast<size_t>(doc.tokens[n])].increment(k);
      ++totals.counts[static_cast<size_t>(k)];
    }
  }
}

std::vector<DocTopicRow> build_doc_rows(const DataPartition& partition, int32_t k_topics) {
  std::vector<DocTopicRow> rows(partition.documents.size(), DocTopicRow(k_topics));
  for (size_t d = 0; d < partition.documents.size(); ++d) {
    const Document& doc = partition.documents[d];
    for (TopicId z : doc.assignments) rows[d].increment(z);
  }
  return rows;
}

int64_t doc_entry_total(const std::vector<DocTopicRow>& rows) {
  int64_t sum = 0;
  for (const DocTopicRow& r : rows) sum += r.nonzero();
  return sum;
}

}  // namespace

Schedule make_schedule(TermId vocab_size, int32_t m_blocks, std::span<const int64_t> term_freq) {
  if (m_blocks < 1) throw ConfigError("block count must be >= 1");
  if (static_cast<TermId>(term_freq.size()) != vocab_size) {
    throw ShapeError("frequency table size does not match vocabulary");
  }
  if (vocab_size < m_blocks) {
    std::fprintf(stderr, "warning: %d blocks over %d terms leaves some blocks empty\n",
                 m_blocks, vocab_size);
  }

  std::vector<TermId> order(static_cast<size_t>(vocab_size));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](TermId a, TermId b) {
    return term_freq[static_cast<size_t>(a)] > term_freq[static_cast<size_t>(b)];
  });

  Schedule schedule;
  schedule.M = m_blocks;
  schedule.blocks.assign(static_cast<size_t>(m_blocks), {});
  for (size_t rank = 0; rank < order.size(); ++rank) {
    schedule.blocks[rank % static_cast<size_t>(m_blocks)].push_back(order[rank]);
  }
  for (std::vector<TermId>& block : schedule.blocks) std::sort(block.begin(), block.end());
  return schedule;
}

void init_assignments(Corpus& corpus, int32_t k_topics, uint64_t seed) {
  RngStream rng = RngStream::derive(seed, kInitStream);
  for (Document& doc : corpus.documents) {
    for (TopicId& z : doc.assignments) {
      z = static_cast<TopicId>(rng.next_below(static_cast<uint32_t>(k_topics)));
    }
  }
}

Engine::Engine(const Corpus& corpus, const Hyperparameters& hyper, EngineOptions options)
    : hyper_(hyper), options_(options) {
  if (options_.M < 1) throw ConfigError("worker count must be >= 1");
  if (options_.iterations < 0) throw ConfigError("iterations must be >= 0");

  Corpus working = corpus;
  if (needs_assignment(working)) init_assignments(working, hyper_.K, options_.seed);

  doc_lengths_ = collect_doc_lengths(working);
  total_tokens_ = working.total_tokens;
  total_rounds_ = options_.iterations * options_.M;

  schedule_ = make_schedule(working.vocabulary.size, options_.M, term_frequencies(working));

  std::vector<WordTopicRow> word_rows;
  TopicTotals totals(hyper_.K);
  recount_word_state(working, hyper_.K, word_rows, totals);

  std::vector<ModelBlock> blocks = slice_blocks(word_rows, schedule_.blocks);
  const int shard_count = options_.shard_count > 0 ? options_.shard_count : options_.M;
  kv_ = std::make_unique<KvStore>(std::move(blocks), totals.counts, shard_count, options_.M);

  std::vector<DataPartition> partitions = partition_documents(working, options_.M);
  workers_.reserve(static_cast<size_t>(options_.M));
  for (int32_t m = 0; m < options_.M; ++m) {
    WorkerState w;
    w.id = m;
    w.partition = std::move(partitions[static_cast<size_t>(m)]);
    w.doc_rows = build_doc_rows(w.partition, hyper_.K);
    w.replica = TopicTotals(hyper_.K);
    w.replica_snapshot.assign(static_cast<size_t>(hyper_.K), 0);
    w.rng = RngStream::derive(options_.seed, static_cast<uint64_t>(m));
    workers_.push_back(std::move(w));
  }

  step_order_.resize(static_cast<size_t>(options_.M));
  std::iota(step_order_.begin(), step_order_.end(), 0);
}

Engine::~Engine() = default;

void Engine::set_step_order(std::vector<int32_t> order) {
  if (static_cast<int32_t>(order.size()) != options_.M) {
    throw ConfigError("step order must list every worker exactly once");
  }
  step_order_ = std::move(order);
}

void Engine::fetch_all_replicas() {
  for (WorkerState& w : workers_) {
    w.replica.counts = kv_->fetch_topic_totals(w.id);
    w.replica_snapshot = w.replica.counts;
  }
}

void Engine::push_all_deltas() {
  std::vector<Count> delta(static_cast<size_t>(hyper_.K));
  for (WorkerState& w : workers_) {
    for (int32_t k = 0; k < hyper_.K; ++k) {
      delta[static_cast<size_t>(k)] =
          w.replica.counts[static_cast<size_t>(k)] - w.replica_snapshot[static_cast<size_t>(k)];
    }
    kv_->push_topic_delta(w.id, delta);
    w.replica_snapshot = w.replica.counts;
  }

  const std::vector<Count> merged = kv_->totals_snapshot();
  const int64_t sum = std::accumulate(merged.begin(), merged.end(), int64_t{0});
  if (sum != total_tokens_) {
    throw InvariantViolationError("merged topic totals sum to " + std::to_string(sum) +
                                  ", expected N = " + std::to_string(total_tokens_));
  }
}

void Engine::sync_topic_totals() {
  push_all_deltas();
  fetch_all_replicas();
}

double Engine::measure_delta() const {
  TopicTotals authoritative(hyper_.K);
  authoritative.counts = kv_->totals_snapshot();
  std::vector<const TopicTotals*> replicas;
  replicas.reserve(workers_.size());
  for (const WorkerState& w : workers_) replicas.push_back(&w.replica);
  return delta_error(authoritative, replicas, total_tokens_);
}

void Engine::worker_round(WorkerState& w) {
  const int32_t block_id = schedule_.owner_block(w.id, global_round_);

  ModelBlock block;
  if (w.prefetched.has_value() && w.prefetched->block_id == block_id &&
      w.prefetched->version == global_round_) {
    block = std::move(*w.prefetched);
    w.prefetched.reset();
  } else {
    w.prefetched.reset();
    block = kv_->checkout_block(w.id, block_id, global_round_);
  }
  w.peak_block_entries = std::max(w.peak_block_entries, block.nonzero_entries());

  const TaskList tasks{w.id, block_id, schedule_.blocks[static_cast<size_t>(block_id)]};

  TokenHook hook;
  const TokenHook* hook_ptr = nullptr;
  if (on_token) {
    hook = [&](int32_t local_doc, int32_t pos) {
      on_token(w.id, w.partition.documents[static_cast<size_t>(local_doc)].doc_id, pos);
    };
    hook_ptr = &hook;
  }

  gibbs_pass_inverted(w.partition, tasks.terms, block, w.doc_rows, w.replica, hyper_, w.rng,
                      w.stats, hook_ptr);

  w.peak_block_entries = std::max(w.peak_block_entries, block.nonzero_entries());
  kv_->commit_block(w.id, block);

  if (options_.prefetch && global_round_ + 1 < total_rounds_) {
    w.prefetched = kv_->try_checkout_block(
        w.id, schedule_.owner_block(w.id, global_round_ + 1), global_round_ + 1);
  }
}

void Engine::work_phase() {
  if (options_.deterministic || options_.M == 1) {
    for (int32_t m : step_order_) worker_round(workers_[static_cast<size_t>(m)]);
    return;
  }
  std::vector<std::exception_ptr> failures(workers_.size());
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers_.size());
    for (size_t m = 0; m < workers_.size(); ++m) {
      threads.emplace_back([this, m, &failures] {
        try {
          worker_round(workers_[m]);
        } catch (...) {
          failures[m] = std::current_exception();
        }
      });
    }
  }
  for (std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

RoundResult Engine::run_round() {
  const auto start = Clock::now();

  fetch_all_replicas();
  RoundResult result;
  result.delta_start = measure_delta();

  int64_t tokens_before = 0;
  for (const WorkerState& w : workers_) {
    tokens_before += static_cast<int64_t>(w.stats.tokens_sampled);
  }

  work_phase();
  push_all_deltas();

  MetricsRecord& rec = result.record;
  rec.iteration = global_round_ / options_.M + 1;
  rec.round = global_round_ % options_.M;
  rec.delta_error = measure_delta();
  rec.wall_seconds = seconds_since(start);

  int64_t tokens_after = 0;
  int64_t max_entries = 0;
  for (const WorkerState& w : workers_) {
    tokens_after += static_cast<int64_t>(w.stats.tokens_sampled);
    max_entries = std::max(max_entries,
                           w.peak_block_entries + doc_entry_total(w.doc_rows) + hyper_.K);
  }
  rec.tokens_sampled = tokens_after - tokens_before;
  rec.tokens_per_second =
      rec.wall_seconds > 0.0 ? static_cast<double>(rec.tokens_sampled) / rec.wall_seconds : 0.0;
  rec.max_worker_entries = max_entries;

  ++global_round_;
  if (on_round_end) on_round_end(*this);
  return result;
}

CountModel Engine::merged_model() const {
  CountModel model;
  model.word_rows = merge_blocks(kv_->blocks_snapshot(), static_cast<TermId>(hyper_.V));
  model.totals = TopicTotals(hyper_.K);
  model.totals.counts = kv_->totals_snapshot();
  model.doc_rows.assign(doc_lengths_.size(), DocTopicRow(hyper_.K));
  for (const WorkerState& w : workers_) {
    for (size_t d = 0; d < w.partition.documents.size(); ++d) {
      model.doc_rows[static_cast<size_t>(w.partition.documents[d].doc_id)] = w.doc_rows[d];
    }
  }
  return model;
}

double Engine::iteration_log_likelihood() const {
  return log_likelihood(merged_model(), hyper_);
}

MemoryReport Engine::memory_report() const {
  MemoryReport report;
  for (const WorkerState& w : workers_) {
    WorkerMemory mem;
    mem.doc_topic_entries = doc_entry_total(w.doc_rows);
    mem.word_topic_entries = w.peak_block_entries;
    mem.totals_entries = hyper_.K;
    report.workers.push_back(mem);
  }
  for (int s = 0; s < kv_->shard_count(); ++s) {
    report.shard_entries.push_back(kv_->stored_entries(s));
  }
  return report;
}

void Engine::run(MetricsSink& sink) {
  MetricsRecord initial;
  initial.iteration = 0;
  initial.round = -1;
  initial.log_likelihood = iteration_log_likelihood();
  sink.add(initial);

  for (int32_t iter = 0; iter < options_.iterations; ++iter) {
    for (int32_t r = 0; r < options_.M; ++r) {
      RoundResult result = run_round();
      if (r == options_.M - 1) {
        result.record.log_likelihood = iteration_log_likelihood();
      }
      sink.add(result.record);
    }
  }
}

SerialTrainer::SerialTrainer(const Corpus& corpus, const Hyperparameters& hyper, uint64_t seed)
    : hyper_(hyper), rng_(RngStream::derive(seed, 0)) {
  Corpus working = corpus;
  if (needs_assignment(working)) init_assignments(working, hyper_.K, seed);

  doc_lengths_ = collect_doc_lengths(working);
  total_tokens_ = working.total_tokens;

  partition_ = std::move(partition_documents(working, 1)[0]);
  doc_rows_ = build_doc_rows(partition_, hyper_.K);

  std::vector<WordTopicRow> word_rows;
  recount_word_state(working, hyper_.K, word_rows, totals_);

  block_.block_id = 0;
  block_.version = 0;
  block_.terms.resize(static_cast<size_t>(working.vocabulary.size));
  std::iota(block_.terms.begin(), block_.terms.end(), 0);
  all_terms_ = block_.terms;
  block_.rows = std::move(word_rows);
}

void SerialTrainer::run_iteration() {
  gibbs_pass_inverted(partition_, all_terms_, block_, doc_rows_, totals_, hyper_, rng_, stats_);
}

CountModel SerialTrainer::merged_model() const {
  CountModel model;
  model.word_rows = block_.rows;
  model.totals = totals_;
  model.doc_rows.assign(doc_lengths_.size(), DocTopicRow(hyper_.K));
  for (size_t d = 0; d < partition_.documents.size(); ++d) {
    model.doc_rows[static_cast<size_t>(partition_.documents[d].doc_id)] = doc_rows_[d];
  }
  return model;
}

void SerialTrainer::run(int32_t iterations, MetricsSink& sink) {
  MetricsRecord initial;
  initial.iteration = 0;
  initial.round = -1;
  initial.log_likelihood = log_likelihood(merged_model(), hyper_);
  sink.add(initial);

  for (int32_t iter = 0; iter < iterations; ++iter) {
    const auto start = Clock::now();
    const uint64_t tokens_before = stats_.tokens_sampled;
    run_iteration();

    MetricsRecord rec;
    rec.iteration = iter + 1;
    rec.round = 0;
    rec.wall_seconds = seconds_since(start);
    rec.log_likelihood = log_likelihood(merged_model(), hyper_);
    rec.delta_error = 0.0;
    rec.tokens_sampled = static_cast<int64_t>(stats_.tokens_sampled - tokens_before);
    rec.tokens_per_second =
        rec.wall_seconds > 0.0 ? static_cast<double>(rec.tokens_sampled) / rec.wall_seconds : 0.0;
    rec.max_worker_entries = block_.nonzero_entries() + doc_entry_total(doc_rows_) + hyper_.K;
    sink.add(rec);
  }
}

// ---------------------------------------------------------------------------
// Stale-sync baseline
// ---------------------------------------------------------------------------

struct StaleSyncEngine::StaleWorker {
  int32_t id = 0;
  DataPartition partition;
  std::vector<DocTopicRow> doc_rows;
  std::vector<WordTopicRow> replica_rows;  // full vocabulary
  TopicTotals replica_totals;
  std::vector<Count> totals_snapshot;
  std::unordered_map<uint64_t, Count> row_deltas;  // (term, topic) -> net change
  RngStream rng{0};
  SamplerStats stats;
  int64_t peak_replica_entries = 0;
  int64_t sync_countdown = 0;
};

namespace {

uint64_t delta_key(TermId t, TopicId k) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(t)) << 32) | static_cast<uint32_t>(k);
}

constexpr int64_t kNeverSync = std::numeric_limits<int64_t>::max() / 2;

}  // namespace

StaleSyncEngine::StaleSyncEngine(const Corpus& corpus, const Hyperparameters& hyper,
                                 StaleSyncOptions options)
    : hyper_(hyper), options_(options) {
  if (options_.M < 1) throw ConfigError("worker count must be >= 1");

  const int64_t dense_estimate =
      static_cast<int64_t>(corpus.vocabulary.size) * static_cast<int64_t>(hyper_.K);
  if (dense_estimate > options_.replica_entry_budget) {
    throw ConfigError("stale-sync replica estimate V*K = " + std::to_string(dense_estimate) +
                      " entries exceeds the budget of " +
                      std::to_string(options_.replica_entry_budget) +
                      "; full-model replicas do not fit");
  }

  Corpus working = corpus;
  if (needs_assignment(working)) init_assignments(working, hyper_.K, options_.seed);

  doc_lengths_ = collect_doc_lengths(working);
  total_tokens_ = working.total_tokens;

  Schedule schedule = make_schedule(working.vocabulary.size, options_.M,
                                    term_frequencies(working));
  n_blocks_ = schedule.M;
  block_of_term_.assign(static_cast<size_t>(working.vocabulary.size), 0);
  for (int32_t b = 0; b < n_blocks_; ++b) {
    for (TermId t : schedule.blocks[static_cast<size_t>(b)]) {
      block_of_term_[static_cast<size_t>(t)] = b;
    }
  }

  std::vector<WordTopicRow> word_rows;
  TopicTotals totals(hyper_.K);
  recount_word_state(working, hyper_.K, word_rows, totals);
  std::vector<ModelBlock> blocks = slice_blocks(word_rows, schedule.blocks);
  const int shard_count = options_.shard_count > 0 ? options_.shard_count : options_.M;
  kv_ = std::make_unique<KvStore>(std::move(blocks), totals.counts, shard_count, options_.M);

  std::vector<DataPartition> partitions = partition_documents(working, options_.M);
  for (int32_t m = 0; m < options_.M; ++m) {
    auto w = std::make_unique<StaleWorker>();
    w->id = m;
    w->partition = std::move(partitions[static_cast<size_t>(m)]);
    w->doc_rows = build_doc_rows(w->partition, hyper_.K);
    w->replica_totals = TopicTotals(hyper_.K);
    w->rng = RngStream::derive(options_.seed, static_cast<uint64_t>(m));
    workers_.push_back(std::move(w));
  }
  for (auto& w : workers_) sync_worker(*w);  // initial replica fill
}

StaleSyncEngine::~StaleSyncEngine() = default;

void StaleSyncEngine::sync_worker(StaleWorker& w) {
  // Push accumulated row deltas, grouped by block, in deterministic order.
  std::vector<std::vector<RowDelta>> per_block(static_cast<size_t>(n_blocks_));
  for (const auto& [key, delta] : w.row_deltas) {
    if (delta == 0) continue;
    const TermId t = static_cast<TermId>(key >> 32);
    const TopicId k = static_cast<TopicId>(key & 0xffffffffu);
    per_block[static_cast<size_t>(block_of_term_[static_cast<size_t>(t)])].push_back(
        {t, k, delta});
  }
  for (int32_t b = 0; b < n_blocks_; ++b) {
    auto& deltas = per_block[static_cast<size_t>(b)];
    if (deltas.empty()) continue;
    std::sort(deltas.begin(), deltas.end(), [](const RowDelta& a, const RowDelta& c) {
      if (a.term != c.term) return a.term < c.term;
      return a.topic < c.topic;
    });
    kv_->push_row_deltas(w.id, b, deltas);
  }
  w.row_deltas.clear();

  if (!w.totals_snapshot.empty()) {
    std::vector<Count> delta(static_cast<size_t>(hyper_.K));
    for (int32_t k = 0; k < hyper_.K; ++k) {
      delta[static_cast<size_t>(k)] =
          w.replica_totals.counts[static_cast<size_t>(k)] - w.totals_snapshot[static_cast<size_t>(k)];
    }
    kv_->push_topic_delta(w.id, delta);
  }

  // Pull a fresh image of the whole model: the bulk transfer that makes this
  // mode bandwidth-hungry.
  std::vector<ModelBlock> blocks;
  blocks.reserve(static_cast<size_t>(n_blocks_));
  for (int32_t b = 0; b < n_blocks_; ++b) {
    blocks.push_back(kv_->fetch_block_snapshot(w.id, b));
  }
  w.replica_rows = merge_blocks(blocks, static_cast<TermId>(hyper_.V));
  w.replica_totals.counts = kv_->fetch_topic_totals(w.id);
  w.totals_snapshot = w.replica_totals.counts;

  int64_t entries = 0;
  for (const WordTopicRow& row : w.replica_rows) entries += row.nonzero();
  w.peak_replica_entries = std::max(w.peak_replica_entries, entries);

  w.sync_countdown = options_.staleness > 0 ? options_.staleness : kNeverSync;
}

void StaleSyncEngine::worker_pass(StaleWorker& w) {
  ForwardDocCaches caches;
  for (size_t d = 0; d < w.partition.documents.size(); ++d) {
    Document& doc = w.partition.documents[d];
    DocTopicRow& doc_row = w.doc_rows[d];
    if (doc.tokens.empty()) continue;
    caches.build(doc_row, w.replica_totals, hyper_);

    for (size_t n = 0; n < doc.tokens.size(); ++n) {
      const TermId t = doc.tokens[n];
      const TopicId old_k = doc.assignments[n];
      WordTopicRow& row = w.replica_rows[static_cast<size_t>(t)];

      decrement_counts(doc_row, row, w.replica_totals, old_k);
      caches.update_topic(old_k, doc_row, w.replica_totals, hyper_);

      const TopicId new_k = sample_sparse_abc(doc_row, row, caches, hyper_, w.rng, w.stats);

      increment_counts(doc_row, w.replica_rows[static_cast<size_t>(t)], w.replica_totals, new_k);
      caches.update_topic(new_k, doc_row, w.replica_totals, hyper_);

      doc.assignments[n] = new_k;
      ++w.stats.tokens_sampled;
      if (new_k != old_k) {
        --w.row_deltas[delta_key(t, old_k)];
        ++w.row_deltas[delta_key(t, new_k)];
      }

      if (--w.sync_countdown <= 0) {
        sync_worker(w);
        caches.build(doc_row, w.replica_totals, hyper_);
      }
    }
  }
  sync_worker(w);  // mandatory end-of-pass merge
}

void StaleSyncEngine::run_iteration() {
  if (options_.deterministic || options_.M == 1) {
    for (auto& w : workers_) worker_pass(*w);
  } else {
    std::vector<std::exception_ptr> failures(workers_.size());
    {
      std::vector<std::jthread> threads;
      threads.reserve(workers_.size());
      for (size_t m = 0; m < workers_.size(); ++m) {
        threads.emplace_back([this, m, &failures] {
          try {
            worker_pass(*workers_[m]);
          } catch (...) {
            failures[m] = std::current_exception();
          }
        });
      }
    }
    for (std::exception_ptr& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }
  ++iterations_run_;
}

CountModel StaleSyncEngine::merged_model() const {
  std::vector<const Document*> docs;
  int32_t num_docs = static_cast<int32_t>(doc_lengths_.size());
  for (const auto& w : workers_) {
    for (const Document& doc : w->partition.documents) docs.push_back(&doc);
  }
  return recount_from_documents(docs, static_cast<TermId>(hyper_.V), hyper_.K, num_docs);
}

double StaleSyncEngine::replica_delta_error() const {
  TopicTotals truth(hyper_.K);
  for (const auto& w : workers_) {
    for (const Document& doc : w->partition.documents) {
      for (TopicId z : doc.assignments) ++truth.counts[static_cast<size_t>(z)];
    }
  }
  std::vector<const TopicTotals*> replicas;
  for (const auto& w : workers_) replicas.push_back(&w->replica_totals);
  return delta_error(truth, replicas, total_tokens_);
}

MemoryReport StaleSyncEngine::memory_report() const {
  MemoryReport report;
  for (const auto& w : workers_) {
    WorkerMemory mem;
    mem.doc_topic_entries = doc_entry_total(w->doc_rows);
    mem.word_topic_entries = w->peak_replica_entries;
    mem.totals_entries = hyper_.K;
    report.workers.push_back(mem);
  }
  for (int s = 0; s < kv_->shard_count(); ++s) {
    report.shard_entries.push_back(kv_->stored_entries(s));
  }
  return report;
}

void StaleSyncEngine::run(MetricsSink& sink) {
  MetricsRecord initial;
  initial.iteration = 0;
  initial.round = -1;
  initial.log_likelihood = log_likelihood(merged_model(), hyper_);
  sink.add(initial);

  for (int32_t iter = 0; iter < options_.iterations; ++iter) {
    const auto start = Clock::now();
    int64_t tokens_before = 0;
    for (const auto& w : workers_) tokens_before += static_cast<int64_t>(w->stats.tokens_sampled);

    // Replica drift is measured against the pre-iteration truth once the
    // workers finish, just before their end-of-pass merges would be visible
    // to a fresh fetch; the recount-based truth makes the measurement
    // independent of push timing.
    run_iteration();

    MetricsRecord rec;
    rec.iteration = iter + 1;
    rec.round = 0;
    rec.wall_seconds = seconds_since(start);
    rec.log_likelihood = log_likelihood(merged_model(), hyper_);
    rec.delta_error = replica_delta_error();
    int64_t tokens_after = 0;
    int64_t max_entries = 0;
    for (const auto& w : workers_) {
      tokens_after += static_cast<int64_t>(w->stats.tokens_sampled);
      max_entries = std::max(max_entries, w->peak_replica_entries +
                                              doc_entry_total(w->doc_rows) + hyper_.K);
    }
    rec.tokens_sampled = tokens_after - tokens_before;
    rec.tokens_per_second =
        rec.wall_seconds > 0.0 ? static_cast<double>(rec.tokens_sampled) / rec.wall_seconds : 0.0;
    rec.max_worker_entries = max_entries;
    sink.add(rec);
  }
}

}  // namespace blocklda
