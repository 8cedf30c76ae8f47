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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "blocklda/corpus.hpp"
#include "blocklda/kvstore.hpp"
#include "blocklda/metrics.hpp"
#include "blocklda/model.hpp"
#include "blocklda/rng.hpp"
#include "blocklda/sampler.hpp"

namespace blocklda {

// The M-block vocabulary partition and its rotation. Worker m samples block
// (m + r) mod M in round r; over M consecutive rounds every (worker, block)
// pair occurs exactly once and every token is resampled exactly once.
struct Schedule {
  int32_t M = 1;
  std::vector<std::vector<TermId>> blocks;  // terms ascending within each block

  int32_t owner_block(int32_t worker, int32_t round) const { return (worker + round) % M; }
};

// Frequency-balanced blocks: terms sorted by descending corpus frequency are
// dealt round-robin across the M blocks, so the frequent (large-K_t) words
// spread evenly and rounds have comparable work. V < M leaves some blocks
// empty (allowed; a warning is printed).
Schedule make_schedule(TermId vocab_size, int32_t m_blocks, std::span<const int64_t> term_freq);

// The work order a worker receives for one round.
struct TaskList {
  int32_t worker = 0;
  int32_t block_id = 0;
  std::span<const TermId> terms;
};

// Uniform random topics for every token, stream derived from (seed, "init").
// All modes share this, so runs with equal seeds start from equal states.
void init_assignments(Corpus& corpus, int32_t k_topics, uint64_t seed);

struct WorkerState {
  int32_t id = 0;
  DataPartition partition;
  std::vector<DocTopicRow> doc_rows;  // aligned with partition.documents
  TopicTotals replica;                // local copy of C_k, drifts within a round
  std::vector<Count> replica_snapshot;
  RngStream rng{0};
  SamplerStats stats;
  int64_t peak_block_entries = 0;
  std::optional<ModelBlock> held;
  std::optional<ModelBlock> prefetched;
};

struct EngineOptions {
  int32_t M = 1;
  int32_t iterations = 0;
  uint64_t seed = 1;
  // Step workers round-robin in one thread instead of spawning M threads.
  // Final counts are identical either way; the deterministic executor also
  // fixes wall-clock-independent behavior for reproducible tests.
  bool deterministic = false;
  // Request the next round's block right after committing the current one.
  // Best effort: falls back to a normal checkout when the block is not yet
  // available. The prefetched block is not read before the round barrier.
  bool prefetch = false;
  int shard_count = 0;  // 0 = one shard per block
};

struct RoundResult {
  MetricsRecord record;     // delta_error is the end-of-round value
  double delta_start = 0.0;  // measured right after the round-start sync
};

// Model-parallel executor: M workers, disjoint vocabulary blocks rotated
// through the kv-store, bulk-synchronous rounds. Per round each worker
// fetches the authoritative topic totals, checks out its block, samples
// every posting of the block's terms in its partition, commits the block,
// and hands its totals delta to the merge. M = 1 degenerates to a serial
// sweep.
class Engine {
 public:
  Engine(const Corpus& corpus, const Hyperparameters& hyper, EngineOptions options);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Runs options.iterations full iterations, appending one row per round
  // plus the initial likelihood row to the sink.
  void run(MetricsSink& sink);

  // One round: round-start totals sync, sampling phase, delta merge.
  RoundResult run_round();

  // Merges pushed deltas into the authoritative totals (checking that they
  // sum to N) and resets every replica to the merged vector. run_round
  // performs these two halves at the round boundary; calling this standalone
  // is idempotent.
  void sync_topic_totals();

  CountModel merged_model() const;  // consistent between rounds
  MemoryReport memory_report() const;
  double iteration_log_likelihood() const;

  const Schedule& schedule() const { return schedule_; }
  const KvStore& kv() const { return *kv_; }
  std::vector<WorkerState>& workers() { return workers_; }
  const Hyperparameters& hyper() const { return hyper_; }
  int64_t total_tokens() const { return total_tokens_; }
  const std::vector<int32_t>& doc_lengths() const { return doc_lengths_; }
  int32_t rounds_run() const { return global_round_; }

  // Test hooks. on_round_end runs at the barrier after the delta merge;
  // on_token must be thread-safe unless the executor is deterministic.
  std::function<void(Engine&)> on_round_end;
  std::function<void(int32_t worker, DocId global_doc, int32_t pos)> on_token;
  void set_step_order(std::vector<int32_t> order);  // deterministic executor only

 private:
  void fetch_all_replicas();
  void push_all_deltas();
  void work_phase();
  void worker_round(WorkerState& w);
  double measure_delta() const;

  Hyperparameters hyper_;
  EngineOptions options_;
  Schedule schedule_;
  std::vector<WorkerState> workers_;
  std::unique_ptr<KvStore> kv_;
  std::vector<int32_t> doc_lengths_;
  int64_t total_tokens_ = 0;
  int32_t global_round_ = 0;
  int32_t total_rounds_ = 0;
  std::vector<int32_t> step_order_;
};

// Straight-line reference: one thread, the whole model in memory, no
// kv-store. Visits terms in ascending id through an inverted index over the
// entire corpus, so with equal seeds its trajectory matches the
// model-parallel engine at M = 1 token for token.
class SerialTrainer {
 public:
  SerialTrainer(const Corpus& corpus, const Hyperparameters& hyper, uint64_t seed);

  void run(int32_t iterations, MetricsSink& sink);
  void run_iteration();

  CountModel merged_model() const;
  const std::vector<WordTopicRow>& word_rows() const { return block_.rows; }
  int64_t total_tokens() const { return total_tokens_; }
  SamplerStats& stats() { return stats_; }

 private:
  Hyperparameters hyper_;
  DataPartition partition_;
  std::vector<DocTopicRow> doc_rows_;
  ModelBlock block_;  // the whole vocabulary as one block
  TopicTotals totals_;
  std::vector<TermId> all_terms_;
  RngStream rng_;
  SamplerStats stats_;
  std::vector<int32_t> doc_lengths_;
  int64_t total_tokens_ = 0;
};

struct StaleSyncOptions {
  int32_t M = 1;
  int32_t iterations = 0;
  uint64_t seed = 1;
  // Tokens a worker samples between delta exchanges; <= 0 means sync only at
  // the end of each local pass (unbounded staleness within an iteration).
  int64_t staleness = -1;
  bool deterministic = false;
  // Refuses to start when V*K exceeds this per-worker dense-replica
  // estimate: the failure mode of full-replica data parallelism, surfaced
  // instead of hit as an OOM.
  int64_t replica_entry_budget = 64ll << 20;
  int shard_count = 0;
};

// Data-parallel baseline: every worker keeps a full word-topic replica,
// samples its own documents with the forward A/B/C sampler, and exchanges
// deltas with the store only at sync points. The replicas go stale in
// between; that staleness is the error source the model-parallel schedule
// eliminates.
class StaleSyncEngine {
 public:
  StaleSyncEngine(const Corpus& corpus, const Hyperparameters& hyper, StaleSyncOptions options);
  ~StaleSyncEngine();

  StaleSyncEngine(const StaleSyncEngine&) = delete;
  StaleSyncEngine& operator=(const StaleSyncEngine&) = delete;

  void run(MetricsSink& sink);
  void run_iteration();

  // True merged counts recounted from assignments (the authoritative store
  // equals this at iteration barriers, where all deltas are pushed).
  CountModel merged_model() const;
  MemoryReport memory_report() const;
  double replica_delta_error() const;  // drift of replica totals vs truth

  const KvStore& kv() const { return *kv_; }
  int64_t total_tokens() const { return total_tokens_; }

 private:
  struct StaleWorker;

  void worker_pass(StaleWorker& w);
  void sync_worker(StaleWorker& w);

  Hyperparameters hyper_;
  StaleSyncOptions options_;
  std::vector<std::unique_ptr<StaleWorker>> workers_;
  std::unique_ptr<KvStore> kv_;
  std::vector<int32_t> block_of_term_;
  int32_t n_blocks_ = 0;
  std::vector<int32_t> doc_lengths_;
  int64_t total_tokens_ = 0;
  int32_t iterations_run_ = 0;
};

}  // namespace blocklda
