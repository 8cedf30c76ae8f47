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

#include <string>
#include <vector>

#include "blocklda/corpus.hpp"
#include "blocklda/model.hpp"
#include "blocklda/rng.hpp"

namespace blocklda::testing {

// A consistent random LDA count state (built by replaying random token
// assignments, so conservation holds by construction) plus one (doc, term)
// focus pair for conditional-distribution tests.
struct RandomState {
  Hyperparameters hyper;
  CountModel model;
  DocId doc = 0;
  TermId term = 0;
};

// K <= max_k, V <= max_v, per-entry counts bounded by construction
// (<= max_count per (term, topic) pair).
RandomState make_random_state(RngStream& rng, int max_k = 16, int max_v = 12, int max_count = 20);

// Corpus with documents drawn from planted topics over disjoint vocabulary
// slices (term frequencies within a slice fall off harmonically, so the
// corpus has a realistic frequency skew). Assignments are left unassigned.
struct PlantedCorpus {
  Corpus corpus;
  std::vector<std::vector<double>> topic_term_probs;  // n_topics x V
  int n_topics = 0;
};

PlantedCorpus make_planted_corpus(int n_docs, int n_topics, int terms_per_topic, int doc_len_min,
                                  int doc_len_max, int max_topics_per_doc, uint64_t seed);

// Corpus serialized as UCI bag-of-words text.
std::string to_uci_string(const Corpus& corpus);

// Independent reference sweeps. Both reimplement the collapsed conditional
// and the single-uniform linear-scan draw directly (no sampler/kernel code),
// consume one uniform per token from the worker-0 stream of `seed`, and
// return the final per-document assignments.
//
// Inverted order: terms ascending, postings in (doc, position) order --
// the token order of the model-parallel engine and the serial trainer.
std::vector<std::vector<TopicId>> reference_sweep_inverted(const Corpus& corpus,
                                                           const Hyperparameters& hyper,
                                                           uint64_t seed, int iterations);

// Forward order: documents ascending, tokens in position order -- the token
// order of a stale-sync worker pass.
std::vector<std::vector<TopicId>> reference_sweep_forward(const Corpus& corpus,
                                                          const Hyperparameters& hyper,
                                                          uint64_t seed, int iterations);

// Cosine similarity between a learned topic's term counts and a planted
// topic's term distribution.
double topic_cosine(const std::vector<WordTopicRow>& rows, TopicId learned,
                    const std::vector<double>& planted);

}  // namespace blocklda::testing
