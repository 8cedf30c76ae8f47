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
#include <span>
#include <string>
#include <vector>

#include "blocklda/model.hpp"

namespace blocklda {

// Little-endian binary layouts.
//
// Checkpoint file:
//   magic "BLDA", u32 format version (1), u32 K, u32 V, f64 beta, f64 alpha[K]
//   then V rows in ascending term id, each in the row layout below.
//
// Row layout (shared with the block wire format):
//   u32 term, u32 K_t, then K_t pairs (u32 topic, i32 count),
//   entries in canonical order (count descending, topic ascending).
//
// Block wire format:
//   u32 block_id, u32 version, u32 n_terms, then n_terms rows.

void append_u32(std::vector<uint8_t>& out, uint32_t v);
void append_i32(std::vector<uint8_t>& out, int32_t v);
void append_f64(std::vector<uint8_t>& out, double v);

// Cursor-based reads; throw ParseError on truncation.
uint32_t read_u32(std::span<const uint8_t> buf, size_t& cursor);
int32_t read_i32(std::span<const uint8_t> buf, size_t& cursor);
double read_f64(std::span<const uint8_t> buf, size_t& cursor);

void encode_row(std::vector<uint8_t>& out, const WordTopicRow& row);
WordTopicRow decode_row(std::span<const uint8_t> buf, size_t& cursor);
size_t encoded_row_size(const WordTopicRow& row);

std::vector<uint8_t> encode_block(const ModelBlock& block);
ModelBlock decode_block(std::span<const uint8_t> buf);
size_t encoded_block_size(const ModelBlock& block);

void write_checkpoint(std::ostream& out, const std::vector<WordTopicRow>& rows,
                      const Hyperparameters& hyper);

struct Checkpoint {
  Hyperparameters hyper;
  std::vector<WordTopicRow> rows;
};

Checkpoint read_checkpoint(std::istream& in);

// Text dump, one line per topic: "topic k: term:count term:count ...",
// top_n entries by (count descending, term id ascending).
void write_topic_dump(std::ostream& out, const std::vector<WordTopicRow>& rows,
                      const Vocabulary& vocab, int32_t k_topics, int top_n);

}  // namespace blocklda
