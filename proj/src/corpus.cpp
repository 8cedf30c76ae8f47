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

#include "blocklda/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>

#include "blocklda/error.hpp"

namespace blocklda {

namespace {

int64_t parse_int(const std::string& text, long line, const char* what) {
  int64_t value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(std::string("expected integer ") + what + ", got '" + text + "'", line);
  }
  return value;
}

// Reads one line, tolerating trailing '\r'.
bool next_line(std::istream& in, std::string& out, long& line_no) {
  if (!std::getline(in, out)) return false;
  if (!out.empty() && out.back() == '\r') out.pop_back();
  ++line_no;
  return true;
}

}  // namespace

Corpus load_bag_of_words(std::istream& in) {
  long line_no = 0;
  std::string line;

  auto read_header = [&](const char* what) {
    if (!next_line(in, line, line_no)) {
      throw ParseError(std::string("missing header line for ") + what, line_no + 1);
    }
    int64_t v = parse_int(line, line_no, what);
    if (v < 0) throw ParseError(std::string(what) + " must be non-negative", line_no);
    return v;
  };

  const int64_t num_docs = read_header("D");
  const int64_t num_terms = read_header("V");
  const int64_t nnz = read_header("NNZ");

  Corpus corpus;
  corpus.vocabulary.size = static_cast<TermId>(num_terms);
  corpus.documents.resize(static_cast<size_t>(num_docs));
  for (int64_t d = 0; d < num_docs; ++d) {
    corpus.documents[static_cast<size_t>(d)].doc_id = static_cast<DocId>(d);
  }

  int64_t triples = 0;
  while (next_line(in, line, line_no)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, c, extra;
    if (!(fields >> a >> b >> c) || (fields >> extra)) {
      throw ParseError("expected 'docID wordID count'", line_no);
    }
    const int64_t doc_id = parse_int(a, line_no, "docID");
    const int64_t word_id = parse_int(b, line_no, "wordID");
    const int64_t count = parse_int(c, line_no, "count");
    if (doc_id < 1 || doc_id > num_docs) {
      throw BoundsError("docID " + std::to_string(doc_id) + " out of range 1.." +
                        std::to_string(num_docs) + " (line " + std::to_string(line_no) + ")");
    }
    if (word_id < 1 || word_id > num_terms) {
      throw BoundsError("wordID " + std::to_string(word_id) + " out of range 1.." +
                        std::to_string(num_terms) + " (line " + std::to_string(line_no) + ")");
    }
    if (count < 1) throw ParseError("count must be positive", line_no);

    // Each occurrence is materialized individually so every token owns a z.
    Document& doc = corpus.documents[static_cast<size_t>(doc_id - 1)];
    doc.tokens.insert(doc.tokens.end(), static_cast<size_t>(count),
                      static_cast<TermId>(word_id - 1));
    corpus.total_tokens += count;
    ++triples;
  }

  if (nnz != triples) {
    throw ParseError("header declared " + std::to_string(nnz) + " entries, file has " +
                     std::to_string(triples),
                     line_no);
  }
  for (Document& doc : corpus.documents) {
    doc.assignments.assign(doc.tokens.size(), kUnassigned);
  }
  return corpus;
}

Corpus load_raw_text(std::istream& in) {
  Corpus corpus;
  std::unordered_map<std::string, TermId> ids;
  long line_no = 0;
  std::string line;
  while (next_line(in, line, line_no)) {
    Document doc;
    doc.doc_id = static_cast<DocId>(corpus.documents.size());
    std::istringstream words(line);
    std::string w;
    while (words >> w) {
      auto [it, inserted] = ids.emplace(w, static_cast<TermId>(corpus.vocabulary.terms.size()));
      if (inserted) corpus.vocabulary.terms.push_back(w);
      doc.tokens.push_back(it->second);
    }
    doc.assignments.assign(doc.tokens.size(), kUnassigned);
    corpus.total_tokens += doc.length();
    corpus.documents.push_back(std::move(doc));
  }
  corpus.vocabulary.size = static_cast<TermId>(corpus.vocabulary.terms.size());
  return corpus;
}

void load_vocabulary(std::istream& in, Corpus& corpus) {
  std::vector<std::string> terms;
  std::unordered_map<std::string, long> seen;
  long line_no = 0;
  std::string line;
  while (next_line(in, line, line_no)) {
    auto [it, inserted] = seen.emplace(line, line_no);
    if (!inserted) {
      throw ParseError("duplicate term '" + line + "' (first at line " +
                       std::to_string(it->second) + ")",
                       line_no);
    }
    terms.push_back(line);
  }
  if (static_cast<TermId>(terms.size()) != corpus.vocabulary.size) {
    throw ParseError("vocabulary has " + std::to_string(terms.size()) + " terms, corpus declares " +
                     std::to_string(corpus.vocabulary.size),
                     line_no);
  }
  corpus.vocabulary.terms = std::move(terms);
}

Corpus augment_bigrams(const Corpus& corpus, int min_count) {
  if (min_count < 1) throw ConfigError("bigram min_count must be >= 1");

  // Pair key packs two term ids; corpus term ids fit 32 bits by construction.
  auto key_of = [](TermId a, TermId b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
  };

  std::unordered_map<uint64_t, int64_t> pair_count;
  for (const Document& doc : corpus.documents) {
    for (size_t n = 0; n + 1 < doc.tokens.size(); ++n) {
      ++pair_count[key_of(doc.tokens[n], doc.tokens[n + 1])];
    }
  }

  // Retained pairs get dense ids in (first, second) term-id order, which
  // keeps the bigram vocabulary independent of hash-map iteration order.
  std::vector<uint64_t> retained;
  for (const auto& [key, count] : pair_count) {
    if (count >= min_count) retained.push_back(key);
  }
  std::sort(retained.begin(), retained.end());

  Corpus out;
  std::unordered_map<uint64_t, TermId> bigram_id;
  bigram_id.reserve(retained.size());
  for (uint64_t key : retained) {
    const TermId a = static_cast<TermId>(key >> 32);
    const TermId b = static_cast<TermId>(key & 0xffffffffu);
    bigram_id.emplace(key, static_cast<TermId>(out.vocabulary.terms.size()));
    out.vocabulary.terms.push_back(corpus.vocabulary.term(a) + "_" + corpus.vocabulary.term(b));
  }
  out.vocabulary.size = static_cast<TermId>(out.vocabulary.terms.size());

  out.documents.reserve(corpus.documents.size());
  for (const Document& doc : corpus.documents) {
    Document bdoc;
    bdoc.doc_id = doc.doc_id;
    for (size_t n = 0; n + 1 < doc.tokens.size(); ++n) {
      auto it = bigram_id.find(key_of(doc.tokens[n], doc.tokens[n + 1]));
      if (it != bigram_id.end()) bdoc.tokens.push_back(it->second);
    }
    bdoc.assignments.assign(bdoc.tokens.size(), kUnassigned);
    out.total_tokens += bdoc.length();
    out.documents.push_back(std::move(bdoc));
  }
  return out;
}

InvertedIndex build_inverted_index(const std::vector<Document>& documents, TermId vocab_size) {
  InvertedIndex index;
  index.offsets.assign(static_cast<size_t>(vocab_size) + 1, 0);

  for (const Document& doc : documents) {
    for (TermId t : doc.tokens) ++index.offsets[static_cast<size_t>(t) + 1];
  }
  std::partial_sum(index.offsets.begin(), index.offsets.end(), index.offsets.begin());

  index.postings.resize(static_cast<size_t>(index.offsets[vocab_size]));
  std::vector<int64_t> cursor(index.offsets.begin(), index.offsets.end() - 1);
  for (int32_t d = 0; d < static_cast<int32_t>(documents.size()); ++d) {
    const Document& doc = documents[static_cast<size_t>(d)];
    for (int32_t n = 0; n < doc.length(); ++n) {
      index.postings[static_cast<size_t>(cursor[doc.tokens[static_cast<size_t>(n)]]++)] = {d, n};
    }
  }
  return index;
}

std::vector<DataPartition> partition_documents(const Corpus& corpus, int m_partitions) {
  if (m_partitions < 1) throw ConfigError("partition count must be >= 1");

  // Largest-first into the lightest bin; ties go to the lowest bin id so the
  // split is deterministic.
  std::vector<DocId> order(corpus.documents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](DocId a, DocId b) {
    return corpus.documents[static_cast<size_t>(a)].length() >
           corpus.documents[static_cast<size_t>(b)].length();
  });

  std::vector<DataPartition> partitions(static_cast<size_t>(m_partitions));
  std::vector<int64_t> load(static_cast<size_t>(m_partitions), 0);
  std::vector<std::vector<DocId>> members(static_cast<size_t>(m_partitions));
  for (DocId d : order) {
    const size_t target = static_cast<size_t>(
        std::min_element(load.begin(), load.end()) - load.begin());
    members[target].push_back(d);
    load[target] += corpus.documents[static_cast<size_t>(d)].length();
  }

  for (int m = 0; m < m_partitions; ++m) {
    DataPartition& part = partitions[static_cast<size_t>(m)];
    part.partition_id = m;
    std::sort(members[static_cast<size_t>(m)].begin(), members[static_cast<size_t>(m)].end());
    part.documents.reserve(members[static_cast<size_t>(m)].size());
    for (DocId d : members[static_cast<size_t>(m)]) {
      part.documents.push_back(corpus.documents[static_cast<size_t>(d)]);
    }
    part.token_count = load[static_cast<size_t>(m)];
    part.inverted = build_inverted_index(part.documents, corpus.vocabulary.size);
  }
  return partitions;
}

std::vector<int64_t> term_frequencies(const Corpus& corpus) {
  std::vector<int64_t> freq(static_cast<size_t>(corpus.vocabulary.size), 0);
  for (const Document& doc : corpus.documents) {
    for (TermId t : doc.tokens) ++freq[static_cast<size_t>(t)];
  }
  return freq;
}

}  // namespace blocklda
