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

#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "blocklda/engine.hpp"
#include "blocklda/error.hpp"
#include "blocklda/sampler.hpp"
#include "support/test_support.hpp"

using namespace blocklda;

namespace {

// Per-topic masses of each decomposition, straight from the cached
// coefficients. These are the exact sampling distributions (up to the shared
// normalizer), summed bucket by bucket rather than estimated from draws.
std::vector<double> abc_masses(const testing::RandomState& s, const ForwardDocCaches& caches) {
  const DocTopicRow& doc = s.model.doc_rows[static_cast<size_t>(s.doc)];
  const WordTopicRow& word = s.model.word_rows[static_cast<size_t>(s.term)];
  std::vector<double> mass(static_cast<size_t>(s.hyper.K), 0.0);
  for (int32_t k = 0; k < s.hyper.K; ++k) {
    mass[static_cast<size_t>(k)] =
        s.hyper.alpha[static_cast<size_t>(k)] * caches.bcoef()[static_cast<size_t>(k)];
  }
  doc.for_each_nonzero([&](TopicId k, Count c) {
    mass[static_cast<size_t>(k)] += caches.bcoef()[static_cast<size_t>(k)] * c;
  });
  for (const TopicCount& e : word.entries()) {
    mass[static_cast<size_t>(e.topic)] += caches.q()[static_cast<size_t>(e.topic)] * e.count;
  }
  return mass;
}

std::vector<double> xy_masses(const testing::RandomState& s, const InvertedWordCache& cache) {
  const DocTopicRow& doc = s.model.doc_rows[static_cast<size_t>(s.doc)];
  std::vector<double> mass(static_cast<size_t>(s.hyper.K), 0.0);
  for (int32_t k = 0; k < s.hyper.K; ++k) {
    mass[static_cast<size_t>(k)] =
        s.hyper.alpha[static_cast<size_t>(k)] * cache.coef()[static_cast<size_t>(k)];
  }
  doc.for_each_nonzero([&](TopicId k, Count c) {
    mass[static_cast<size_t>(k)] += cache.coef()[static_cast<size_t>(k)] * c;
  });
  return mass;
}

void normalize(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
}

}  // namespace

TEST_SUITE_BEGIN("sampler");

TEST_CASE("dense conditional on the symmetric empty state is uniform") {
  const Hyperparameters hyper = make_hyper(2, 2, 1.0, 0.5);  // beta_sum = 1
  CountModel model(1, 2, 2);
  DenseWorkspace ws(2);
  DenseConditional cond;
  SamplerStats stats;
  build_dense_conditional(model.doc_rows[0], model.word_rows[0], model.totals, hyper, ws, cond,
                          stats);
  CHECK(cond.weights[0] == 0.5);
  CHECK(cond.weights[1] == 0.5);
  CHECK(cond.total == 1.0);
  CHECK(stats.dense_entries_touched == 2);
}

TEST_CASE("dense conditional matches direct formula substitution") {
  // C_d = (3,0), C^t = (2,0), C = (5,1), alpha = 0.1, beta = 0.01, V = 10.
  const Hyperparameters hyper = make_hyper(2, 10, 0.1, 0.01);
  CountModel model(2, 10, 2);
  // doc 0: three tokens at topic 0, two of them term 0
  model.increment(0, 0, 0);
  model.increment(0, 0, 0);
  model.increment(0, 2, 0);
  // other docs bring the totals to C = (5, 1) without touching term 0
  model.increment(1, 3, 0);
  model.increment(1, 4, 0);
  model.increment(1, 5, 1);

  REQUIRE(model.doc_rows[0].count_of(0) == 3);
  REQUIRE(model.word_rows[0].count_of(0) == 2);
  REQUIRE(model.totals[0] == 5);
  REQUIRE(model.totals[1] == 1);

  DenseWorkspace ws(2);
  DenseConditional cond;
  SamplerStats stats;
  build_dense_conditional(model.doc_rows[0], model.word_rows[0], model.totals, hyper, ws, cond,
                          stats);
  CHECK(cond.weights[0] == (3 + 0.1) * (2 + 0.01) / (5 + 0.1));
  CHECK(cond.weights[1] == (0 + 0.1) * (0 + 0.01) / (1 + 0.1));
}

TEST_CASE("normalized dense conditional sums to one on random states") {
  RngStream rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const testing::RandomState s = testing::make_random_state(rng);
    DenseWorkspace ws(s.hyper.K);
    DenseConditional cond;
    SamplerStats stats;
    build_dense_conditional(s.model.doc_rows[static_cast<size_t>(s.doc)],
                            s.model.word_rows[static_cast<size_t>(s.term)], s.model.totals,
                            s.hyper, ws, cond, stats);
    double norm = 0.0;
    for (double w : cond.weights) norm += w / cond.total;
    CHECK(std::abs(norm - 1.0) < 1e-12);
  }
}

TEST_CASE("point mass always returns its topic") {
  DenseConditional cond;
  cond.weights = {0.0, 0.0, 0.0, 7.5};
  cond.total = 7.5;
  RngStream rng(3);
  for (int i = 0; i < 100; ++i) CHECK(sample_dense(cond, rng) == 3);
}

TEST_CASE("uniform draws pass a chi-square check against the exact multinomial") {
  DenseConditional cond;
  cond.weights = {1.0, 1.0, 1.0, 1.0};
  cond.total = 4.0;
  RngStream rng(42);
  const int n = 100000;
  std::vector<int> freq(4, 0);
  for (int i = 0; i < n; ++i) ++freq[static_cast<size_t>(sample_dense(cond, rng))];

  const double expected = n / 4.0;
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(freq[static_cast<size_t>(k)] - expected) < 3.0 * sigma);
    chi2 += (freq[static_cast<size_t>(k)] - expected) * (freq[static_cast<size_t>(k)] - expected) /
            expected;
  }
  CHECK(chi2 < 16.27);  // dof 3, p = 0.001
}

TEST_CASE("draw sequences are identical for a fixed seed") {
  DenseConditional cond;
  cond.weights = {0.2, 0.5, 0.3};
  cond.total = 1.0;
  RngStream a(77), b(77);
  for (int i = 0; i < 1000; ++i) CHECK(sample_dense(cond, a) == sample_dense(cond, b));
}

TEST_CASE("non-finite mass is a numerical error") {
  DenseConditional cond;
  cond.weights = {1.0};
  cond.total = std::nan("");
  RngStream rng(1);
  CHECK_THROWS_AS(sample_dense(cond, rng), NumericalError);
}

// The central correctness property: per-topic bucket masses of both sparse
// decompositions equal the dense conditional termwise (they are the same
// expression, regrouped), so the exact sampling distributions coincide.
TEST_CASE("A/B/C and X/Y masses equal the dense oracle on 1000 random states") {
  RngStream rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const testing::RandomState s = testing::make_random_state(rng, 8, 6, 20);
    const DocTopicRow& doc = s.model.doc_rows[static_cast<size_t>(s.doc)];
    const WordTopicRow& word = s.model.word_rows[static_cast<size_t>(s.term)];

    DenseWorkspace ws(s.hyper.K);
    DenseConditional dense;
    SamplerStats stats;
    build_dense_conditional(doc, word, s.model.totals, s.hyper, ws, dense, stats);

    ForwardDocCaches caches;
    caches.build(doc, s.model.totals, s.hyper);
    std::vector<double> abc = abc_masses(s, caches);

    InvertedWordCache cache;
    cache.build(word, s.model.totals, s.hyper, stats);
    std::vector<double> xy = xy_masses(s, cache);

    for (int32_t k = 0; k < s.hyper.K; ++k) {
      const double w = dense.weights[static_cast<size_t>(k)];
      CHECK(std::abs(abc[static_cast<size_t>(k)] - w) <= 1e-12 * std::max(1.0, std::abs(w)));
      CHECK(std::abs(xy[static_cast<size_t>(k)] - w) <= 1e-12 * std::max(1.0, std::abs(w)));
    }

    std::vector<double> dn = dense.weights, an = abc, xn = xy;
    normalize(dn);
    normalize(an);
    normalize(xn);
    for (int32_t k = 0; k < s.hyper.K; ++k) {
      CHECK(std::abs(an[static_cast<size_t>(k)] - dn[static_cast<size_t>(k)]) <= 1e-12);
      CHECK(std::abs(xn[static_cast<size_t>(k)] - dn[static_cast<size_t>(k)]) <= 1e-12);
    }
  }
}

TEST_CASE("empty counts collapse both sparse samplers to the A/X bucket") {
  const Hyperparameters hyper = make_hyper(4, 3, 0.7, 0.2);
  CountModel model(1, 3, 4);
  SamplerStats stats;

  ForwardDocCaches caches;
  caches.build(model.doc_rows[0], model.totals, hyper);
  CHECK(caches.b_mass() == 0.0);
  RngStream rng(5);
  for (int i = 0; i < 200; ++i) {
    sample_sparse_abc(model.doc_rows[0], model.word_rows[0], caches, hyper, rng, stats);
  }
  CHECK(stats.bucket_hits[0] == 200);  // everything lands in A
  CHECK(stats.bucket_hits[1] == 0);
  CHECK(stats.bucket_hits[2] == 0);

  InvertedWordCache cache;
  cache.build(model.word_rows[0], model.totals, hyper, stats);
  SamplerStats xy_stats;
  for (int i = 0; i < 200; ++i) {
    sample_sparse_xy(model.doc_rows[0], cache, hyper, rng, xy_stats);
  }
  CHECK(xy_stats.bucket_hits[0] == 200);  // everything lands in X
  CHECK(xy_stats.bucket_hits[1] == 0);

  // On the symmetric empty state every topic is equally likely.
  std::vector<int> freq(4, 0);
  RngStream rng2(9);
  for (int i = 0; i < 40000; ++i) {
    ++freq[static_cast<size_t>(
        sample_sparse_abc(model.doc_rows[0], model.word_rows[0], caches, hyper, rng2, stats))];
  }
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(freq[static_cast<size_t>(k)] - 10000.0) <
          3.0 * std::sqrt(40000 * 0.25 * 0.75));
  }
}

TEST_CASE("sparse sampler construction touches only K_d + K_t count entries") {
  RngStream rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const testing::RandomState s = testing::make_random_state(rng);
    const DocTopicRow& doc = s.model.doc_rows[static_cast<size_t>(s.doc)];
    const WordTopicRow& word = s.model.word_rows[static_cast<size_t>(s.term)];
    const uint64_t k_d = static_cast<uint64_t>(doc.nonzero());
    const uint64_t k_t = static_cast<uint64_t>(word.nonzero());

    ForwardDocCaches caches;
    caches.build(doc, s.model.totals, s.hyper);
    InvertedWordCache cache;
    SamplerStats scratch;
    cache.build(word, s.model.totals, s.hyper, scratch);

    RngStream draw(static_cast<uint64_t>(trial));
    SamplerStats abc_stats;
    sample_sparse_abc(doc, word, caches, s.hyper, draw, abc_stats);
    CHECK(abc_stats.sparse_build_entries <= k_d + k_t);
    CHECK(abc_stats.sparse_entries_touched() <= 2 * (k_d + k_t) + 1);

    SamplerStats xy_stats;
    sample_sparse_xy(doc, cache, s.hyper, draw, xy_stats);
    CHECK(xy_stats.sparse_build_entries <= k_d + k_t);
    CHECK(xy_stats.sparse_entries_touched() <= 2 * (k_d + k_t) + 1);
  }
}

TEST_CASE("cache maintenance equals a from-scratch rebuild") {
  RngStream rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    testing::RandomState s = testing::make_random_state(rng, 12, 8, 15);
    DocTopicRow& doc = s.model.doc_rows[static_cast<size_t>(s.doc)];
    WordTopicRow& word = s.model.word_rows[static_cast<size_t>(s.term)];
    SamplerStats stats;

    InvertedWordCache cache;
    cache.build(word, s.model.totals, s.hyper, stats);
    ForwardDocCaches fwd;
    fwd.build(doc, s.model.totals, s.hyper);

    // Random walk of increments and (valid) decrements on the focus pair.
    for (int step = 0; step < 300; ++step) {
      const TopicId up = static_cast<TopicId>(rng.next_below(static_cast<uint32_t>(s.hyper.K)));
      Count c = increment_counts(doc, word, s.model.totals, up);
      cache.update_topic(up, c, s.model.totals, s.hyper);
      fwd.update_topic(up, doc, s.model.totals, s.hyper);

      if (step % 2 == 1) {
        TopicId down = -1;
        doc.for_each_nonzero([&](TopicId k, Count cc) {
          if (word.count_of(k) > 0 && cc > 0) down = k;
        });
        if (down >= 0) {
          c = decrement_counts(doc, word, s.model.totals, down);
          cache.update_topic(down, c, s.model.totals, s.hyper);
          fwd.update_topic(down, doc, s.model.totals, s.hyper);
        }
      }
    }
    cache.check_coherent(word, s.model.totals, s.hyper, 1e-10);
    fwd.check_coherent(doc, s.model.totals, s.hyper, 1e-10);
  }
}

TEST_CASE("cache desync is detected") {
  const Hyperparameters hyper = make_hyper(4, 3, 0.5, 0.1);
  CountModel model(1, 3, 4);
  model.increment(0, 0, 2);
  SamplerStats stats;
  InvertedWordCache cache;
  cache.build(model.word_rows[0], model.totals, hyper, stats);
  model.increment(0, 0, 2);  // cache not told
  CHECK_THROWS_AS(cache.check_coherent(model.word_rows[0], model.totals, hyper, 1e-10),
                  InternalError);
}

TEST_CASE("the token's own count is excluded before sampling") {
  // Constructed so the argmax flips when the token's own count is included:
  // doc0 = [t0@k0 (the token), t0@k0, t0@k1], plus one k0 token elsewhere.
  const Hyperparameters hyper = make_hyper(2, 2, 0.5, 0.5);  // beta_sum = 1
  CountModel model(2, 2, 2);
  model.increment(0, 0, 0);  // the token being resampled
  model.increment(0, 0, 0);
  model.increment(0, 0, 1);
  model.increment(1, 1, 0);

  DenseWorkspace ws(2);
  DenseConditional with_token;
  SamplerStats stats;
  build_dense_conditional(model.doc_rows[0], model.word_rows[0], model.totals, hyper, ws,
                          with_token, stats);
  CHECK(with_token.weights[0] > with_token.weights[1]);

  model.decrement(0, 0, 0);  // the exclusion the sampler performs
  DenseConditional excluded;
  build_dense_conditional(model.doc_rows[0], model.word_rows[0], model.totals, hyper, ws,
                          excluded, stats);
  CHECK(excluded.weights[0] < excluded.weights[1]);
  CHECK(excluded.weights[0] == (1 + 0.5) * (1 + 0.5) / (2 + 1.0));
  CHECK(excluded.weights[1] == (1 + 0.5) * (1 + 0.5) / (1 + 1.0));
}

TEST_CASE("a full-task-list pass equals the independent serial reference") {
  const testing::PlantedCorpus planted = testing::make_planted_corpus(40, 3, 8, 5, 20, 2, 19);
  Corpus corpus = planted.corpus;
  const Hyperparameters hyper = make_hyper(6, corpus.vocabulary.size, 0.3, 0.05);
  const uint64_t seed = 4242;
  init_assignments(corpus, hyper.K, seed);

  const std::vector<std::vector<TopicId>> expected =
      testing::reference_sweep_inverted(corpus, hyper, seed, 3);
  CountModel ref_model(corpus.num_documents(), corpus.vocabulary.size, hyper.K);
  for (const Document& doc : corpus.documents) {
    for (size_t n = 0; n < doc.tokens.size(); ++n) {
      ref_model.increment(doc.doc_id, doc.tokens[n], expected[static_cast<size_t>(doc.doc_id)][n]);
    }
  }

  SerialTrainer trainer(corpus, hyper, seed);
  for (int i = 0; i < 3; ++i) trainer.run_iteration();
  const CountModel final_model = trainer.merged_model();

  for (TermId t = 0; t < corpus.vocabulary.size; ++t) {
    CHECK(final_model.word_rows[static_cast<size_t>(t)] ==
          ref_model.word_rows[static_cast<size_t>(t)]);
  }
  CHECK(final_model.totals.counts == ref_model.totals.counts);
}

TEST_CASE("an empty task list changes nothing") {
  const testing::PlantedCorpus planted = testing::make_planted_corpus(10, 2, 5, 4, 10, 1, 3);
  Corpus corpus = planted.corpus;
  const Hyperparameters hyper = make_hyper(4, corpus.vocabulary.size, 0.5, 0.1);
  init_assignments(corpus, hyper.K, 7);

  std::vector<DataPartition> parts = partition_documents(corpus, 1);
  DataPartition& part = parts[0];
  std::vector<DocTopicRow> doc_rows(part.documents.size(), DocTopicRow(hyper.K));
  TopicTotals totals(hyper.K);
  ModelBlock block;
  block.terms.resize(static_cast<size_t>(corpus.vocabulary.size));
  std::iota(block.terms.begin(), block.terms.end(), 0);
  block.rows.resize(block.terms.size());
  for (size_t i = 0; i < block.rows.size(); ++i) block.rows[i].set_term(static_cast<TermId>(i));
  for (size_t d = 0; d < part.documents.size(); ++d) {
    const Document& doc = part.documents[d];
    for (size_t n = 0; n < doc.tokens.size(); ++n) {
      doc_rows[d].increment(doc.assignments[n]);
      block.rows[static_cast<size_t>(doc.tokens[n])].increment(doc.assignments[n]);
      ++totals.counts[static_cast<size_t>(doc.assignments[n])];
    }
  }
  const std::vector<Count> totals_before = totals.counts;
  const auto z_before = part.documents[0].assignments;

  SamplerStats stats;
  RngStream rng(1);
  gibbs_pass_inverted(part, {}, block, doc_rows, totals, hyper, rng, stats);
  CHECK(stats.tokens_sampled == 0);
  CHECK(totals.counts == totals_before);
  CHECK(part.documents[0].assignments == z_before);
}

TEST_CASE("a task term outside the held block is a protocol violation") {
  Corpus corpus;
  corpus.vocabulary.size = 3;
  Document doc;
  doc.doc_id = 0;
  doc.tokens = {0, 1, 2};
  doc.assignments = {0, 0, 1};
  corpus.total_tokens = 3;
  corpus.documents.push_back(doc);

  const Hyperparameters hyper = make_hyper(2, 3, 0.5, 0.1);
  std::vector<DataPartition> parts = partition_documents(corpus, 1);
  std::vector<DocTopicRow> doc_rows(1, DocTopicRow(2));
  TopicTotals totals(2);
  ModelBlock block;  // covers terms 0 and 1 only
  block.terms = {0, 1};
  block.rows.resize(2);
  block.rows[0].set_term(0);
  block.rows[1].set_term(1);
  for (size_t n = 0; n < 3; ++n) {
    doc_rows[0].increment(doc.assignments[n]);
    ++totals.counts[static_cast<size_t>(doc.assignments[n])];
  }
  block.rows[0].increment(0);
  block.rows[1].increment(0);

  const std::vector<TermId> bad_tasks{0, 2};
  SamplerStats stats;
  RngStream rng(1);
  CHECK_THROWS_AS(
      gibbs_pass_inverted(parts[0], bad_tasks, block, doc_rows, totals, hyper, rng, stats),
      ProtocolViolationError);
}

TEST_CASE("every token is sampled exactly once per pass") {
  const testing::PlantedCorpus planted = testing::make_planted_corpus(25, 3, 6, 5, 15, 2, 11);
  Corpus corpus = planted.corpus;
  const Hyperparameters hyper = make_hyper(5, corpus.vocabulary.size, 0.4, 0.1);
  init_assignments(corpus, hyper.K, 2);

  SerialTrainer trainer(corpus, hyper, 2);
  const uint64_t before = trainer.stats().tokens_sampled;
  trainer.run_iteration();
  CHECK(trainer.stats().tokens_sampled - before == static_cast<uint64_t>(corpus.total_tokens));
}

TEST_SUITE_END();
