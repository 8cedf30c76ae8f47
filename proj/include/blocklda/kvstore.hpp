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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "blocklda/model.hpp"

namespace blocklda {

// Sharded in-memory store for the model blocks and the authoritative topic
// totals. Every operation, even in-process, goes through a serialized
// request/response pair so payload volumes are honestly measurable and the
// transport could be swapped for a socket later. Blocks route to shard
// (block_id mod shard_count); the totals vector lives on shard 0. Each shard
// processes requests under its own lock, so per-shard execution is
// serializable and block keys never span shards.

struct TrafficCounters {
  int64_t requests = 0;
  int64_t bytes_sent = 0;      // request payloads, worker -> store
  int64_t bytes_received = 0;  // response payloads, store -> worker
  int64_t block_entries_out = 0;   // committed/pushed row entries
  int64_t block_entries_in = 0;    // checked-out/fetched row entries
  int64_t totals_entries_out = 0;  // pushed delta entries
  int64_t totals_entries_in = 0;   // fetched totals entries
};

struct LedgerEvent {
  int32_t round;
  int32_t worker;
  int32_t block;
  bool is_checkout;  // false = commit
};

// Sparse word-topic count adjustment (stale-sync delta exchange).
struct RowDelta {
  TermId term;
  TopicId topic;
  Count delta;
};

class KvStore {
 public:
  // Takes ownership of the initial blocks and totals. shard_count defaults to
  // the block count when 0 is passed.
  KvStore(std::vector<ModelBlock> blocks, std::vector<Count> totals, int shard_count,
          int worker_count);
  ~KvStore();

  KvStore(const KvStore&) = delete;
  KvStore& operator=(const KvStore&) = delete;

  // --- protocol operations (metered, serialized through the transport) ---

  // Exclusive ownership transfer; requires the block unheld and at version
  // `round`. Throws ProtocolViolationError / StaleRoundError.
  ModelBlock checkout_block(int32_t worker, int32_t block_id, int32_t round);

  // Best-effort variant for prefetching: nullopt instead of throwing when
  // the block is still held or not yet at `round`.
  std::optional<ModelBlock> try_checkout_block(int32_t worker, int32_t block_id, int32_t round);

  // Returns the block, bumps its version, clears the holder. Committing a
  // block one does not hold is a ProtocolViolationError.
  void commit_block(int32_t worker, const ModelBlock& block);

  std::vector<Count> fetch_topic_totals(int32_t worker);

  // Element-wise add; ShapeError unless delta has length K.
  void push_topic_delta(int32_t worker, std::span<const Count> delta);

  // Stale-sync operations: shared snapshot reads and additive sparse
  // updates, no ownership involved.
  ModelBlock fetch_block_snapshot(int32_t worker, int32_t block_id);
  void push_row_deltas(int32_t worker, int32_t block_id, std::span<const RowDelta> deltas);

  // --- engine-side inspection (not protocol traffic, unmetered) ---

  int shard_count() const;
  int shard_of(int32_t block_id) const;
  int32_t block_count() const;
  std::vector<Count> totals_snapshot() const;
  std::vector<ModelBlock> blocks_snapshot() const;
  int64_t stored_entries(int shard) const;  // nonzeros resident on a shard
  std::vector<LedgerEvent> ledger_log() const;
  void dump_ledger(std::ostream& out) const;
  TrafficCounters traffic(int32_t worker) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace blocklda
