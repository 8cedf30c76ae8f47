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
#include <string>
#include <vector>

namespace blocklda {

using TermId = int32_t;
using DocId = int32_t;
using TopicId = int32_t;
using Count = int32_t;

// Topic id of a token that has not been assigned yet.
inline constexpr TopicId kUnassigned = -1;

// Term ids are dense integers 0..V-1. Term strings are optional (a bag-of-
// words file carries only ids); term(t) falls back to "t<id>".
struct Vocabulary {
  std::vector<std::string> terms;  // empty, or exactly size() entries
  TermId size = 0;

  std::string term(TermId t) const {
    if (t >= 0 && static_cast<size_t>(t) < terms.size()) return terms[t];
    return "t" + std::to_string(t);
  }
};

struct Document {
  DocId doc_id = 0;
  std::vector<TermId> tokens;       // w_dn
  std::vector<TopicId> assignments;  // z_dn, same length as tokens

  int32_t length() const { return static_cast<int32_t>(tokens.size()); }
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  int64_t total_tokens = 0;  // N == sum of document lengths

  int32_t num_documents() const { return static_cast<int32_t>(documents.size()); }
};

// One token occurrence: documents[doc].tokens[pos]. `doc` is an index into
// the owning partition's document vector, not a global doc id.
struct Posting {
  int32_t doc = 0;
  int32_t pos = 0;

  bool operator==(const Posting&) const = default;
};

// CSR postings over a document set: postings for term t live in
// [offsets[t], offsets[t+1]), grouped contiguously and ordered by
// (doc, pos). Iterating terms 0..V-1 visits ascending term id.
struct InvertedIndex {
  std::vector<int64_t> offsets;  // size V+1
  std::vector<Posting> postings;

  int64_t posting_count() const { return static_cast<int64_t>(postings.size()); }
  const Posting* begin_of(TermId t) const { return postings.data() + offsets[t]; }
  const Posting* end_of(TermId t) const { return postings.data() + offsets[t + 1]; }
};

// A disjoint slice of the corpus owned by one worker. Only `assignments`
// inside `documents` is mutable after construction, and only by the owner.
struct DataPartition {
  int32_t partition_id = 0;
  std::vector<Document> documents;
  InvertedIndex inverted;
  int64_t token_count = 0;
};

// UCI bag-of-words: three header lines (D, V, NNZ), then "docID wordID count"
// triples with 1-based ids. Each count is expanded into that many token
// occurrences; assignments start unassigned.
// Throws ParseError with the line number for malformed lines, BoundsError
// when an id exceeds the declared D or V.
Corpus load_bag_of_words(std::istream& in);

// Raw text: UTF-8, one document per line, whitespace tokenization, ids by
// first appearance. The only format that preserves token order, so the only
// one bigram augmentation is meaningful on.
Corpus load_raw_text(std::istream& in);

// One term per line; line number - 1 is the term id. Duplicate terms are a
// ParseError. Replaces corpus.vocabulary.terms; size must match V.
void load_vocabulary(std::istream& in, Corpus& corpus);

// Rebuilds the corpus over a vocabulary of bigram phrases occurring at least
// min_count times; each document becomes its sequence of retained bigrams.
// Documents with no retained pair stay, empty.
Corpus augment_bigrams(const Corpus& corpus, int min_count);

// Greedy balanced-by-token-count split (largest document first into the
// lightest of M bins), each partition indexed and its documents ordered by
// doc id. M > D leaves some partitions empty.
std::vector<DataPartition> partition_documents(const Corpus& corpus, int m_partitions);

InvertedIndex build_inverted_index(const std::vector<Document>& documents, TermId vocab_size);

// Per-term token frequency over the whole corpus (drives block balancing).
std::vector<int64_t> term_frequencies(const Corpus& corpus);

}  // namespace blocklda
