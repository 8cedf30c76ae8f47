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

#include <sstream>
#include <vector>

#include <doctest.h>

#include "blocklda/checkpoint.hpp"
#include "blocklda/error.hpp"
#include "blocklda/model.hpp"
#include "blocklda/rng.hpp"
#include "support/test_support.hpp"

using namespace blocklda;

namespace {

std::vector<TopicCount> entries_of(const WordTopicRow& row) {
  return {row.entries().begin(), row.entries().end()};
}

bool canonical(const WordTopicRow& row) {
  const auto e = row.entries();
  for (size_t i = 1; i < e.size(); ++i) {
    if (e[i - 1].count < e[i].count) return false;
    if (e[i - 1].count == e[i].count && e[i - 1].topic >= e[i].topic) return false;
  }
  for (const TopicCount& tc : e) {
    if (tc.count <= 0) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("hyperparameters cache the prior sums") {
  const Hyperparameters hyper = make_hyper(4, 10, 0.5, 0.01);
  CHECK(hyper.alpha_sum == doctest::Approx(2.0));
  CHECK(hyper.beta_sum == 10 * 0.01);
  CHECK_THROWS_AS(make_hyper(0, 10, 0.5, 0.01), ConfigError);
  CHECK_THROWS_AS(make_hyper(4, 10, -1.0, 0.01), ConfigError);
  CHECK_THROWS_AS(make_hyper(4, 10, 0.5, 0.0), ConfigError);
}

TEST_CASE("count-of-one entries are evicted on decrement") {
  CountModel model(1, 1, 8);
  model.increment(0, 0, 3);
  for (int i = 0; i < 4; ++i) model.increment(0, 0, 5);
  CHECK(model.word_rows[0].nonzero() == 2);

  model.decrement(0, 0, 3);
  CHECK(model.word_rows[0].nonzero() == 1);
  CHECK(model.word_rows[0].count_of(3) == 0);
  CHECK(model.doc_rows[0].count_of(3) == 0);
  CHECK(model.totals[3] == 0);
  CHECK(model.totals[5] == 4);
}

TEST_CASE("decrement keeps rows ordered by count") {
  WordTopicRow row(0);
  for (int i = 0; i < 3; ++i) row.increment(1);
  for (int i = 0; i < 2; ++i) row.increment(7);
  row.increment(4);
  CHECK(entries_of(row) == std::vector<TopicCount>{{1, 3}, {7, 2}, {4, 1}});
  row.decrement(1);
  row.decrement(1);
  CHECK(entries_of(row) == std::vector<TopicCount>{{7, 2}, {1, 1}, {4, 1}});
}

TEST_CASE("underflow is a protocol violation") {
  CountModel model(1, 1, 4);
  model.increment(0, 0, 1);
  model.decrement(0, 0, 1);
  CHECK_THROWS_AS(model.decrement(0, 0, 1), ProtocolViolationError);
  WordTopicRow row(0);
  CHECK_THROWS_AS(row.decrement(2), ProtocolViolationError);
}

// decrement-then-increment of the same triple must restore the exact state,
// including the order of tied counts; canonical ordering makes that hold for
// arbitrary interleavings.
TEST_CASE("decrement/increment round-trips bit-exactly on random states") {
  RngStream rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    testing::RandomState state = testing::make_random_state(rng);
    const int K = state.hyper.K;

    // Find a (d, t, k) present in the state; skip empty draws.
    TopicId k = -1;
    for (TopicId cand = 0; cand < K; ++cand) {
      if (state.model.doc_rows[static_cast<size_t>(state.doc)].count_of(cand) > 0 &&
          state.model.word_rows[static_cast<size_t>(state.term)].count_of(cand) > 0) {
        k = cand;
        break;
      }
    }
    if (k < 0) continue;

    const auto doc_before = state.model.doc_rows[static_cast<size_t>(state.doc)];
    const auto word_before = entries_of(state.model.word_rows[static_cast<size_t>(state.term)]);
    const auto totals_before = state.model.totals.counts;

    state.model.decrement(state.doc, state.term, k);
    state.model.increment(state.doc, state.term, k);

    CHECK(entries_of(state.model.word_rows[static_cast<size_t>(state.term)]) == word_before);
    CHECK(state.model.totals.counts == totals_before);
    for (TopicId kk = 0; kk < K; ++kk) {
      CHECK(state.model.doc_rows[static_cast<size_t>(state.doc)].count_of(kk) ==
            doc_before.count_of(kk));
    }
  }
}

TEST_CASE("rows stay canonical and conservation holds under random updates") {
  RngStream rng(7);
  CountModel model(3, 5, 12);
  std::vector<std::vector<TopicId>> assigned(3 * 5);  // multiset per (d,t)

  for (int step = 0; step < 5000; ++step) {
    const DocId d = static_cast<DocId>(rng.next_below(3));
    const TermId t = static_cast<TermId>(rng.next_below(5));
    auto& bag = assigned[static_cast<size_t>(d * 5 + t)];
    if (!bag.empty() && rng.next_below(3) == 0) {
      const size_t at = rng.next_below(static_cast<uint32_t>(bag.size()));
      model.decrement(d, t, bag[at]);
      bag.erase(bag.begin() + static_cast<ptrdiff_t>(at));
    } else {
      const TopicId k = static_cast<TopicId>(rng.next_below(12));
      model.increment(d, t, k);
      bag.push_back(k);
    }
  }

  int64_t n_tokens = 0;
  for (const auto& bag : assigned) n_tokens += static_cast<int64_t>(bag.size());
  std::vector<int32_t> doc_lengths(3, 0);
  for (DocId d = 0; d < 3; ++d) {
    for (TermId t = 0; t < 5; ++t) {
      doc_lengths[static_cast<size_t>(d)] +=
          static_cast<int32_t>(assigned[static_cast<size_t>(d * 5 + t)].size());
    }
  }
  check_conservation(model, doc_lengths, n_tokens);
  for (const WordTopicRow& row : model.word_rows) CHECK(canonical(row));
}

TEST_CASE("doc rows switch to dense past K/4 and iterate identically") {
  const int K = 40;
  DocTopicRow row(K);
  std::vector<Count> shadow(static_cast<size_t>(K), 0);
  RngStream rng(5);
  for (int i = 0; i < 400; ++i) {
    const TopicId k = static_cast<TopicId>(rng.next_below(static_cast<uint32_t>(K)));
    row.increment(k);
    ++shadow[static_cast<size_t>(k)];
  }
  CHECK(row.is_dense());
  std::vector<Count> seen(static_cast<size_t>(K), 0);
  TopicId prev = -1;
  row.for_each_nonzero([&](TopicId k, Count c) {
    CHECK(k > prev);  // ascending topic order in both representations
    prev = k;
    seen[static_cast<size_t>(k)] = c;
  });
  CHECK(seen == shadow);
  int nonzero = 0;
  for (Count c : shadow) nonzero += c > 0 ? 1 : 0;
  CHECK(row.nonzero() == nonzero);
}

TEST_CASE("contiguous two-block slice") {
  std::vector<WordTopicRow> rows(4);
  for (TermId t = 0; t < 4; ++t) {
    rows[static_cast<size_t>(t)].set_term(t);
    rows[static_cast<size_t>(t)].increment(t % 3);
  }
  const std::vector<ModelBlock> blocks = slice_blocks(rows, {{0, 1}, {2, 3}});
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].terms == std::vector<TermId>{0, 1});
  CHECK(blocks[1].terms == std::vector<TermId>{2, 3});
  CHECK(blocks[0].rows[1].count_of(1) == 1);
}

TEST_CASE("single block is the identity slice") {
  std::vector<WordTopicRow> rows(3);
  for (TermId t = 0; t < 3; ++t) {
    rows[static_cast<size_t>(t)].set_term(t);
    rows[static_cast<size_t>(t)].increment(0);
  }
  const std::vector<ModelBlock> blocks = slice_blocks(rows, {{0, 1, 2}});
  REQUIRE(blocks.size() == 1);
  const std::vector<WordTopicRow> merged = merge_blocks(blocks, 3);
  for (TermId t = 0; t < 3; ++t) CHECK(merged[static_cast<size_t>(t)] == rows[static_cast<size_t>(t)]);
}

TEST_CASE("slicing a random model into 3 blocks merges back exactly") {
  RngStream rng(11);
  testing::RandomState state = testing::make_random_state(rng, 10, 9, 30);
  const TermId V = static_cast<TermId>(state.model.word_rows.size());

  std::vector<std::vector<TermId>> block_terms(3);
  for (TermId t = 0; t < V; ++t) {
    block_terms[static_cast<size_t>(rng.next_below(3))].push_back(t);
  }
  const std::vector<ModelBlock> blocks = slice_blocks(state.model.word_rows, block_terms);
  const std::vector<WordTopicRow> merged = merge_blocks(blocks, V);
  for (TermId t = 0; t < V; ++t) {
    CHECK(merged[static_cast<size_t>(t)] == state.model.word_rows[static_cast<size_t>(t)]);
  }
}

TEST_CASE("overlapping or incomplete block partitions are rejected") {
  std::vector<WordTopicRow> rows(3);
  for (TermId t = 0; t < 3; ++t) rows[static_cast<size_t>(t)].set_term(t);
  CHECK_THROWS_AS(slice_blocks(rows, {{0, 1}, {1, 2}}), ConfigError);
  CHECK_THROWS_AS(slice_blocks(rows, {{0}, {2}}), ConfigError);
}

TEST_CASE("block serialization round-trips bit-exactly") {
  RngStream rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    testing::RandomState state = testing::make_random_state(rng, 12, 10, 25);
    const TermId V = static_cast<TermId>(state.model.word_rows.size());
    std::vector<TermId> all(static_cast<size_t>(V));
    for (TermId t = 0; t < V; ++t) all[static_cast<size_t>(t)] = t;
    ModelBlock block = slice_blocks(state.model.word_rows, {all})[0];
    block.version = static_cast<int32_t>(rng.next_below(100));

    const std::vector<uint8_t> wire = encode_block(block);
    CHECK(wire.size() == encoded_block_size(block));
    const ModelBlock decoded = decode_block(wire);
    CHECK(decoded == block);
  }
}

TEST_CASE("checkpoint file round-trips header and rows") {
  RngStream rng(17);
  testing::RandomState state = testing::make_random_state(rng, 8, 6, 15);
  std::stringstream buf;
  write_checkpoint(buf, state.model.word_rows, state.hyper);
  const Checkpoint ckpt = read_checkpoint(buf);
  CHECK(ckpt.hyper.K == state.hyper.K);
  CHECK(ckpt.hyper.V == state.hyper.V);
  CHECK(ckpt.hyper.beta == state.hyper.beta);
  CHECK(ckpt.hyper.alpha == state.hyper.alpha);
  REQUIRE(ckpt.rows.size() == state.model.word_rows.size());
  for (size_t t = 0; t < ckpt.rows.size(); ++t) CHECK(ckpt.rows[t] == state.model.word_rows[t]);
}

TEST_CASE("topic dump lists heaviest terms first") {
  std::vector<WordTopicRow> rows(3);
  for (TermId t = 0; t < 3; ++t) rows[static_cast<size_t>(t)].set_term(t);
  for (int i = 0; i < 5; ++i) rows[2].increment(0);
  for (int i = 0; i < 3; ++i) rows[0].increment(0);
  rows[1].increment(1);
  Vocabulary vocab;
  vocab.size = 3;
  vocab.terms = {"alpha", "bravo", "charlie"};
  std::ostringstream out;
  write_topic_dump(out, rows, vocab, 2, 10);
  CHECK(out.str() == "topic 0: charlie:5 alpha:3\ntopic 1: bravo:1\n");
}

TEST_SUITE_END();
