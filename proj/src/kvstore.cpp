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

#include "blocklda/kvstore.hpp"

#include <algorithm>
#include <mutex>
#include <ostream>
#include <string>
#include <unordered_map>

#include "blocklda/checkpoint.hpp"
#include "blocklda/error.hpp"

namespace blocklda {

namespace {

enum class KvOp : uint8_t {
  kCheckout = 1,
  kTryCheckout = 2,
  kCommit = 3,
  kFetchTotals = 4,
  kPushTotalsDelta = 5,
  kFetchSnapshot = 6,
  kPushRowDeltas = 7,
};

enum class KvStatus : uint8_t {
  kOk = 0,
  kProtocolViolation = 1,
  kStaleRound = 2,
  kShape = 3,
  kUnavailable = 4,  // try-checkout miss
  kBadRequest = 5,
};

std::vector<uint8_t> error_response(KvStatus status, const std::string& message) {
  std::vector<uint8_t> out;
  out.push_back(static_cast<uint8_t>(status));
  out.insert(out.end(), message.begin(), message.end());
  return out;
}

std::string response_message(std::span<const uint8_t> response) {
  return std::string(response.begin() + 1, response.end());
}

[[noreturn]] void throw_status(KvStatus status, const std::string& message) {
  switch (status) {
    case KvStatus::kProtocolViolation:
      throw ProtocolViolationError(message);
    case KvStatus::kStaleRound:
      throw StaleRoundError(message);
    case KvStatus::kShape:
      throw ShapeError(message);
    default:
      throw Error(message);
  }
}

}  // namespace

struct KvStore::Impl {
  struct BlockSlot {
    ModelBlock block;
    int32_t holder = -1;  // worker id, -1 when unheld
  };

  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<int32_t, BlockSlot> blocks;
    std::vector<Count> totals;  // populated on shard 0 only
  };

  std::vector<Shard> shards;
  int32_t n_blocks = 0;
  int32_t k_topics = 0;

  mutable std::mutex meter_mu;
  std::vector<TrafficCounters> traffic;
  std::vector<LedgerEvent> ledger;

  int shard_of(int32_t block_id) const {
    return static_cast<int>(block_id % static_cast<int32_t>(shards.size()));
  }

  void meter(int32_t worker, size_t sent, size_t received) {
    std::lock_guard lock(meter_mu);
    TrafficCounters& t = traffic[static_cast<size_t>(worker)];
    ++t.requests;
    t.bytes_sent += static_cast<int64_t>(sent);
    t.bytes_received += static_cast<int64_t>(received);
  }

  void meter_entries(int32_t worker, int64_t block_out, int64_t block_in, int64_t totals_out,
                     int64_t totals_in) {
    std::lock_guard lock(meter_mu);
    TrafficCounters& t = traffic[static_cast<size_t>(worker)];
    t.block_entries_out += block_out;
    t.block_entries_in += block_in;
    t.totals_entries_out += totals_out;
    t.totals_entries_in += totals_in;
  }

  void log_ledger(int32_t round, int32_t worker, int32_t block, bool is_checkout) {
    std::lock_guard lock(meter_mu);
    ledger.push_back({round, worker, block, is_checkout});
  }

  // The store-side request handler. Runs under the target shard's lock.
  std::vector<uint8_t> handle(Shard& shard, int32_t worker, std::span<const uint8_t> request);

  // The transport: serialize, route by the block id embedded in the request
  // (totals requests go to shard 0), execute, meter both directions.
  std::vector<uint8_t> call(int32_t worker, const std::vector<uint8_t>& request, int shard_id) {
    Shard& shard = shards[static_cast<size_t>(shard_id)];
    std::vector<uint8_t> response;
    {
      std::lock_guard lock(shard.mu);
      response = handle(shard, worker, request);
    }
    meter(worker, request.size(), response.size());
    return response;
  }
};

std::vector<uint8_t> KvStore::Impl::handle(Shard& shard, int32_t worker,
                                           std::span<const uint8_t> request) {
  size_t cursor = 0;
  const KvOp op = static_cast<KvOp>(request[cursor++]);

  switch (op) {
    case KvOp::kCheckout:
    case KvOp::kTryCheckout: {
      const int32_t block_id = read_i32(request, cursor);
      const int32_t round = read_i32(request, cursor);
      auto it = shard.blocks.find(block_id);
      if (it == shard.blocks.end()) {
        return error_response(KvStatus::kBadRequest, "unknown block " + std::to_string(block_id));
      }
      BlockSlot& slot = it->second;
      if (slot.holder != -1) {
        const KvStatus st =
            op == KvOp::kTryCheckout ? KvStatus::kUnavailable : KvStatus::kProtocolViolation;
        return error_response(st, "block " + std::to_string(block_id) + " already held by worker " +
                                      std::to_string(slot.holder));
      }
      if (slot.block.version != round) {
        const KvStatus st =
            op == KvOp::kTryCheckout ? KvStatus::kUnavailable : KvStatus::kStaleRound;
        return error_response(st, "block " + std::to_string(block_id) + " is at round " +
                                      std::to_string(slot.block.version) + ", requested " +
                                      std::to_string(round));
      }
      slot.holder = worker;
      log_ledger(round, worker, block_id, true);
      std::vector<uint8_t> payload = encode_block(slot.block);
      std::vector<uint8_t> response;
      response.reserve(payload.size() + 1);
      response.push_back(static_cast<uint8_t>(KvStatus::kOk));
      response.insert(response.end(), payload.begin(), payload.end());
      meter_entries(worker, 0, slot.block.nonzero_entries(), 0, 0);
      return response;
    }

    case KvOp::kCommit: {
      ModelBlock incoming = decode_block(request.subspan(cursor));
      auto it = shard.blocks.find(incoming.block_id);
      if (it == shard.blocks.end()) {
        return error_response(KvStatus::kBadRequest,
                              "unknown block " + std::to_string(incoming.block_id));
      }
      BlockSlot& slot = it->second;
      if (slot.holder != worker) {
        return error_response(KvStatus::kProtocolViolation,
                              "worker " + std::to_string(worker) + " commits block " +
                                  std::to_string(incoming.block_id) + " held by " +
                                  std::to_string(slot.holder));
      }
      const int32_t committed_round = slot.block.version;
      meter_entries(worker, incoming.nonzero_entries(), 0, 0, 0);
      incoming.version = committed_round + 1;
      slot.block = std::move(incoming);
      slot.holder = -1;
      log_ledger(committed_round, worker, slot.block.block_id, false);
      return {static_cast<uint8_t>(KvStatus::kOk)};
    }

    case KvOp::kFetchTotals: {
      std::vector<uint8_t> response;
      response.reserve(1 + 4 + shard.totals.size() * 4);
      response.push_back(static_cast<uint8_t>(KvStatus::kOk));
      append_u32(response, static_cast<uint32_t>(shard.totals.size()));
      for (Count c : shard.totals) append_i32(response, c);
      meter_entries(worker, 0, 0, 0, static_cast<int64_t>(shard.totals.size()));
      return response;
    }

    case KvOp::kPushTotalsDelta: {
      const uint32_t n = read_u32(request, cursor);
      if (n != shard.totals.size()) {
        return error_response(KvStatus::kShape, "delta length " + std::to_string(n) +
                                                    " does not match K = " +
                                                    std::to_string(shard.totals.size()));
      }
      for (uint32_t k = 0; k < n; ++k) shard.totals[k] += read_i32(request, cursor);
      meter_entries(worker, 0, 0, static_cast<int64_t>(n), 0);
      return {static_cast<uint8_t>(KvStatus::kOk)};
    }

    case KvOp::kFetchSnapshot: {
      const int32_t block_id = read_i32(request, cursor);
      auto it = shard.blocks.find(block_id);
      if (it == shard.blocks.end()) {
        return error_response(KvStatus::kBadRequest, "unknown block " + std::to_string(block_id));
      }
      std::vector<uint8_t> payload = encode_block(it->second.block);
      std::vector<uint8_t> response;
      response.reserve(payload.size() + 1);
      response.push_back(static_cast<uint8_t>(KvStatus::kOk));
      response.insert(response.end(), payload.begin(), payload.end());
      meter_entries(worker, 0, it->second.block.nonzero_entries(), 0, 0);
      return response;
    }

    case KvOp::kPushRowDeltas: {
      const int32_t block_id = read_i32(request, cursor);
      const uint32_t n = read_u32(request, cursor);
      auto it = shard.blocks.find(block_id);
      if (it == shard.blocks.end()) {
        return error_response(KvStatus::kBadRequest, "unknown block " + std::to_string(block_id));
      }
      ModelBlock& block = it->second.block;
      for (uint32_t i = 0; i < n; ++i) {
        const TermId t = read_i32(request, cursor);
        const TopicId k = read_i32(request, cursor);
        const Count d = read_i32(request, cursor);
        WordTopicRow* row = block.find(t);
        if (row == nullptr) {
          return error_response(KvStatus::kBadRequest, "term " + std::to_string(t) +
                                                           " not in block " +
                                                           std::to_string(block_id));
        }
        if (d > 0) {
          for (Count step = 0; step < d; ++step) row->increment(k);
        } else {
          for (Count step = 0; step < -d; ++step) row->decrement(k);
        }
      }
      meter_entries(worker, static_cast<int64_t>(n), 0, 0, 0);
      return {static_cast<uint8_t>(KvStatus::kOk)};
    }
  }
  return error_response(KvStatus::kBadRequest, "unknown op");
}

KvStore::KvStore(std::vector<ModelBlock> blocks, std::vector<Count> totals, int shard_count,
                 int worker_count)
    : impl_(std::make_unique<Impl>()) {
  if (shard_count <= 0) shard_count = std::max<int>(1, static_cast<int>(blocks.size()));
  impl_->shards = std::vector<Impl::Shard>(static_cast<size_t>(shard_count));
  impl_->n_blocks = static_cast<int32_t>(blocks.size());
  impl_->k_topics = static_cast<int32_t>(totals.size());
  impl_->traffic.resize(static_cast<size_t>(std::max(worker_count, 1)));
  for (ModelBlock& block : blocks) {
    const int s = impl_->shard_of(block.block_id);
    const int32_t id = block.block_id;
    impl_->shards[static_cast<size_t>(s)].blocks.emplace(id, Impl::BlockSlot{std::move(block), -1});
  }
  impl_->shards[0].totals = std::move(totals);
}

KvStore::~KvStore() = default;

ModelBlock KvStore::checkout_block(int32_t worker, int32_t block_id, int32_t round) {
  std::vector<uint8_t> req;
  req.push_back(static_cast<uint8_t>(KvOp::kCheckout));
  append_i32(req, block_id);
  append_i32(req, round);
  std::vector<uint8_t> resp = impl_->call(worker, req, impl_->shard_of(block_id));
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
  return decode_block(std::span(resp).subspan(1));
}

std::optional<ModelBlock> KvStore::try_checkout_block(int32_t worker, int32_t block_id,
                                                      int32_t round) {
  std::vector<uint8_t> req;
  req.push_back(static_cast<uint8_t>(KvOp::kTryCheckout));
  append_i32(req, block_id);
  append_i32(req, round);
  std::vector<uint8_t> resp = impl_->call(worker, req, impl_->shard_of(block_id));
  if (resp[0] == static_cast<uint8_t>(KvStatus::kUnavailable)) return std::nullopt;
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
  return decode_block(std::span(resp).subspan(1));
}

void KvStore::commit_block(int32_t worker, const ModelBlock& block) {
  std::vector<uint8_t> req;
  req.push_back(static_cast<uint8_t>(KvOp::kCommit));
  std::vector<uint8_t> payload = encode_block(block);
  req.insert(req.end(), payload.begin(), payload.end());
  std::vector<uint8_t> resp = impl_->call(worker, req, impl_->shard_of(block.block_id));
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
}

std::vector<Count> KvStore::fetch_topic_totals(int32_t worker) {
  std::vector<uint8_t> req{static_cast<uint8_t>(KvOp::kFetchTotals)};
  std::vector<uint8_t> resp = impl_->call(worker, req, 0);
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
  size_t cursor = 1;
  const uint32_t n = read_u32(resp, cursor);
  std::vector<Count> totals(n);
  for (uint32_t k = 0; k < n; ++k) totals[k] = read_i32(resp, cursor);
  return totals;
}

void KvStore::push_topic_delta(int32_t worker, std::span<const Count> delta) {
  std::vector<uint8_t> req;
  req.reserve(1 + 4 + delta.size() * 4);
  req.push_back(static_cast<uint8_t>(KvOp::kPushTotalsDelta));
  append_u32(req, static_cast<uint32_t>(delta.size()));
  for (Count c : delta) append_i32(req, c);
  std::vector<uint8_t> resp = impl_->call(worker, req, 0);
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
}

ModelBlock KvStore::fetch_block_snapshot(int32_t worker, int32_t block_id) {
  std::vector<uint8_t> req;
  req.push_back(static_cast<uint8_t>(KvOp::kFetchSnapshot));
  append_i32(req, block_id);
  std::vector<uint8_t> resp = impl_->call(worker, req, impl_->shard_of(block_id));
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
  return decode_block(std::span(resp).subspan(1));
}

void KvStore::push_row_deltas(int32_t worker, int32_t block_id, std::span<const RowDelta> deltas) {
  std::vector<uint8_t> req;
  req.reserve(1 + 8 + deltas.size() * 12);
  req.push_back(static_cast<uint8_t>(KvOp::kPushRowDeltas));
  append_i32(req, block_id);
  append_u32(req, static_cast<uint32_t>(deltas.size()));
  for (const RowDelta& d : deltas) {
    append_i32(req, d.term);
    append_i32(req, d.topic);
    append_i32(req, d.delta);
  }
  std::vector<uint8_t> resp = impl_->call(worker, req, impl_->shard_of(block_id));
  if (resp[0] != static_cast<uint8_t>(KvStatus::kOk)) {
    throw_status(static_cast<KvStatus>(resp[0]), response_message(resp));
  }
}

int KvStore::shard_count() const { return static_cast<int>(impl_->shards.size()); }

int KvStore::shard_of(int32_t block_id) const { return impl_->shard_of(block_id); }

int32_t KvStore::block_count() const { return impl_->n_blocks; }

std::vector<Count> KvStore::totals_snapshot() const {
  std::lock_guard lock(impl_->shards[0].mu);
  return impl_->shards[0].totals;
}

std::vector<ModelBlock> KvStore::blocks_snapshot() const {
  std::vector<ModelBlock> out;
  out.reserve(static_cast<size_t>(impl_->n_blocks));
  for (const Impl::Shard& shard : impl_->shards) {
    std::lock_guard lock(shard.mu);
    for (const auto& [id, slot] : shard.blocks) out.push_back(slot.block);
  }
  std::sort(out.begin(), out.end(),
            [](const ModelBlock& a, const ModelBlock& b) { return a.block_id < b.block_id; });
  return out;
}

int64_t KvStore::stored_entries(int shard) const {
  const Impl::Shard& s = impl_->shards[static_cast<size_t>(shard)];
  std::lock_guard lock(s.mu);
  int64_t sum = 0;
  for (const auto& [id, slot] : s.blocks) {
    if (slot.holder == -1) sum += slot.block.nonzero_entries();
  }
  return sum;
}

std::vector<LedgerEvent> KvStore::ledger_log() const {
  std::lock_guard lock(impl_->meter_mu);
  return impl_->ledger;
}

void KvStore::dump_ledger(std::ostream& out) const {
  for (const LedgerEvent& e : ledger_log()) {
    out << (e.is_checkout ? "checkout" : "commit") << " round=" << e.round
        << " worker=" << e.worker << " block=" << e.block << '\n';
  }
}

TrafficCounters KvStore::traffic(int32_t worker) const {
  std::lock_guard lock(impl_->meter_mu);
  return impl_->traffic[static_cast<size_t>(worker)];
}

}  // namespace blocklda
