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

#include "blocklda/config.hpp"

#include <algorithm>
#include <charconv>
#include <istream>

#include "blocklda/error.hpp"

namespace blocklda {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kSerial:
      return "serial";
    case Mode::kModelParallel:
      return "model-parallel";
    case Mode::kStaleSync:
      return "stale-sync";
  }
  return "unknown";
}

std::vector<Diagnostic> validate(const RunConfig& config, std::optional<int32_t> vocab_size) {
  std::vector<Diagnostic> out;
  auto fatal = [&](std::string msg) { out.push_back({true, std::move(msg)}); };
  auto warn = [&](std::string msg) { out.push_back({false, std::move(msg)}); };

  if (config.corpus_path.empty()) fatal("corpus path is required");
  if (config.K < 1) fatal("K must be >= 1, got " + std::to_string(config.K));
  if (config.M < 1) fatal("M must be >= 1, got " + std::to_string(config.M));
  if (config.iterations < 0) {
    fatal("iterations must be >= 0, got " + std::to_string(config.iterations));
  }
  if (!(config.beta > 0.0)) fatal("beta must be > 0");
  if (config.alpha >= 0.0 && !(config.alpha > 0.0)) fatal("alpha must be > 0");
  if (config.top_n < 1) fatal("top-n must be >= 1");
  if (config.kernel != "auto" && config.kernel != "scalar" && config.kernel != "avx2") {
    fatal("kernel must be one of auto, scalar, avx2");
  }

  if (config.mode == Mode::kStaleSync) {
    if (config.staleness == 0 || config.staleness < -1) {
      fatal("staleness must be >= 1 tokens or -1 (sync once per pass)");
    }
    if (config.replica_budget < 1) fatal("replica budget must be >= 1");
  } else if (config.staleness != -1) {
    warn("staleness is only meaningful in stale-sync mode");
  }

  if (config.bigrams) {
    if (config.bigram_min_count < 1) fatal("bigram min-count must be >= 1");
    if (config.format == CorpusFormat::kUci) {
      warn("bag-of-words input has no token order; bigrams extracted from it "
           "reflect id order, not text order");
    }
  }
  if (!config.vocab_path.empty() && config.format == CorpusFormat::kText) {
    warn("vocabulary file is ignored for text corpora (terms come from the text)");
  }

  if (vocab_size.has_value() && config.M > *vocab_size) {
    warn("M = " + std::to_string(config.M) + " exceeds vocabulary size " +
         std::to_string(*vocab_size) + "; some blocks will be empty");
  }
  return out;
}

}  // namespace blocklda
