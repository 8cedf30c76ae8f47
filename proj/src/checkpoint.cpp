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

#include "blocklda/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "blocklda/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace blocklda {

namespace {
constexpr uint32_t kMagic = 0x41444C42;  // "BLDA"
constexpr uint32_t kFormatVersion = 1;
}  // namespace

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
  const size_t at = out.size();
  out.resize(at + sizeof v);
  std::memcpy(out.data() + at, &v, sizeof v);
}

void append_i32(std::vector<uint8_t>& out, int32_t v) {
  append_u32(out, static_cast<uint32_t>(v));
}

void append_f64(std::vector<uint8_t>& out, double v) {
  const size_t at = out.size();
  out.resize(at + sizeof v);
  std::memcpy(out.data() + at, &v, sizeof v);
}

uint32_t read_u32(std::span<const uint8_t> buf, size_t& cursor) {
  if (cursor + 4 > buf.size()) throw ParseError("truncated buffer reading u32", 0);
  uint32_t v;
  std::memcpy(&v, buf.data() + cursor, sizeof v);
  cursor += sizeof v;
  return v;
}

int32_t read_i32(std::span<const uint8_t> buf, size_t& cursor) {
  return static_cast<int32_t>(read_u32(buf, cursor));
}

double read_f64(std::span<const uint8_t> buf, size_t& cursor) {
  if (cursor + 8 > buf.size()) throw ParseError("truncated buffer reading f64", 0);
  double v;
  std::memcpy(&v, buf.data() + cursor, sizeof v);
  cursor += sizeof v;
  return v;
}

void encode_row(std::vector<uint8_t>& out, const WordTopicRow& row) {
  append_u32(out, static_cast<uint32_t>(row.term()));
  append_u32(out, static_cast<uint32_t>(row.nonzero()));
  for (const TopicCount& e : row.entries()) {
    append_u32(out, static_cast<uint32_t>(e.topic));
    append_i32(out, e.count);
  }
}

WordTopicRow decode_row(std::span<const uint8_t> buf, size_t& cursor) {
  WordTopicRow row(static_cast<TermId>(read_u32(buf, cursor)));
  const uint32_t k_t = read_u32(buf, cursor);
  std::vector<TopicCount> entries;
  entries.reserve(k_t);
  for (uint32_t i = 0; i < k_t; ++i) {
    const TopicId k = static_cast<TopicId>(read_u32(buf, cursor));
    const Count c = read_i32(buf, cursor);
    entries.push_back({k, c});
  }
  row.assign_entries(std::move(entries));
  return row;
}

size_t encoded_row_size(const WordTopicRow& row) {
  return 8 + static_cast<size_t>(row.nonzero()) * 8;
}

std::vector<uint8_t> encode_block(const ModelBlock& block) {
  std::vector<uint8_t> out;
  out.reserve(encoded_block_size(block));
  append_u32(out, static_cast<uint32_t>(block.block_id));
  append_u32(out, static_cast<uint32_t>(block.version));
  append_u32(out, static_cast<uint32_t>(block.terms.size()));
  for (const WordTopicRow& row : block.rows) encode_row(out, row);
  return out;
}

ModelBlock decode_block(std::span<const uint8_t> buf) {
  size_t cursor = 0;
  ModelBlock block;
  block.block_id = static_cast<int32_t>(read_u32(buf, cursor));
  block.version = static_cast<int32_t>(read_u32(buf, cursor));
  const uint32_t n_terms = read_u32(buf, cursor);
  block.terms.reserve(n_terms);
  block.rows.reserve(n_terms);
  for (uint32_t i = 0; i < n_terms; ++i) {
    WordTopicRow row = decode_row(buf, cursor);
    block.terms.push_back(row.term());
    block.rows.push_back(std::move(row));
  }
  if (cursor != buf.size()) throw ParseError("trailing bytes after block payload", 0);
  return block;
}

size_t encoded_block_size(const ModelBlock& block) {
  size_t size = 12;
  for (const WordTopicRow& row : block.rows) size += encoded_row_size(row);
  return size;
}

void write_checkpoint(std::ostream& out, const std::vector<WordTopicRow>& rows,
                      const Hyperparameters& hyper) {
  std::vector<uint8_t> buf;
  append_u32(buf, kMagic);
  append_u32(buf, kFormatVersion);
  append_u32(buf, static_cast<uint32_t>(hyper.K));
  append_u32(buf, static_cast<uint32_t>(hyper.V));
  append_f64(buf, hyper.beta);
  for (double a : hyper.alpha) append_f64(buf, a);
  for (const WordTopicRow& row : rows) encode_row(buf, row);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Checkpoint read_checkpoint(std::istream& in) {
  std::vector<uint8_t> buf(std::istreambuf_iterator<char>(in), {});
  size_t cursor = 0;
  if (read_u32(buf, cursor) != kMagic) throw ParseError("bad checkpoint magic", 0);
  if (read_u32(buf, cursor) != kFormatVersion) throw ParseError("unsupported checkpoint version", 0);
  const int32_t K = static_cast<int32_t>(read_u32(buf, cursor));
  const int32_t V = static_cast<int32_t>(read_u32(buf, cursor));
  const double beta = read_f64(buf, cursor);
  std::vector<double> alpha(static_cast<size_t>(K));
  for (double& a : alpha) a = read_f64(buf, cursor);

  Checkpoint ckpt;
  ckpt.hyper = make_hyper(K, V, std::move(alpha), beta);
  ckpt.rows.reserve(static_cast<size_t>(V));
  for (int32_t t = 0; t < V; ++t) {
    WordTopicRow row = decode_row(buf, cursor);
    if (row.term() != t) throw ParseError("checkpoint rows out of order", 0);
    ckpt.rows.push_back(std::move(row));
  }
  if (cursor != buf.size()) throw ParseError("trailing bytes after checkpoint", 0);
  return ckpt;
}

void write_topic_dump(std::ostream& out, const std::vector<WordTopicRow>& rows,
                      const Vocabulary& vocab, int32_t k_topics, int top_n) {
  // Gather per-topic (count, term) pairs, then keep the top_n heaviest.
  std::vector<std::vector<TopicCount>> by_topic(static_cast<size_t>(k_topics));
  for (const WordTopicRow& row : rows) {
    for (const TopicCount& e : row.entries()) {
      by_topic[static_cast<size_t>(e.topic)].push_back({row.term(), e.count});
    }
  }
  for (int32_t k = 0; k < k_topics; ++k) {
    auto& terms = by_topic[static_cast<size_t>(k)];
    std::sort(terms.begin(), terms.end(), [](const TopicCount& a, const TopicCount& b) {
      if (a.count != b.count) return a.count > b.count;
      return a.topic < b.topic;
    });
    if (static_cast<int>(terms.size()) > top_n) terms.resize(static_cast<size_t>(top_n));
    out << "topic " << k << ":";
    for (const TopicCount& e : terms) out << ' ' << vocab.term(e.topic) << ':' << e.count;
    out << '\n';
  }
}

}  // namespace blocklda
