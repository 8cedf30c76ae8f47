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
#include <optional>
#include <string>
#include <vector>

namespace blocklda {

enum class Mode { kSerial, kModelParallel, kStaleSync };
enum class CorpusFormat { kUci, kText };

std::string to_string(Mode mode);

struct RunConfig {
  std::string corpus_path;
  CorpusFormat format = CorpusFormat::kUci;
  std::string vocab_path;  // optional term strings for UCI corpora

  int32_t K = 0;
  double alpha = -1.0;  // symmetric; negative means the 50/K default
  double beta = 0.01;
  int32_t M = 1;
  int32_t iterations = 10;
  uint64_t seed = 1;

  Mode mode = Mode::kModelParallel;
  // Stale-sync only: tokens between delta exchanges; -1 = unbounded (sync
  // once per local pass).
  int64_t staleness = -1;

  bool bigrams = false;
  int32_t bigram_min_count = 1;

  std::string output_dir = ".";
  int32_t top_n = 10;

  bool deterministic = false;
  bool prefetch = false;
  std::string kernel = "auto";  // auto | scalar | avx2
  int64_t replica_budget = 64ll << 20;
  bool audit_log = false;
};

struct Diagnostic {
  bool fatal = false;
  std::string message;
};

// Applies "key = value" lines to the config ('#' comments and blank lines
// allowed; keys are the long CLI option names). Values given on the command
// line afterwards override the file. Throws ConfigError on unknown keys or
// unparseable values.
void apply_config_file(RunConfig& config, std::istream& in);

// Returns every violation, not just the first. Warnings (fatal == false)
// do not block a run. vocab_size, when known, enables the corpus-dependent
// checks (M > V is a warning).
std::vector<Diagnostic> validate(const RunConfig& config,
                                 std::optional<int32_t> vocab_size = std::nullopt);

inline bool has_fatal(const std::vector<Diagnostic>& diagnostics) {
  for (const Diagnostic& d : diagnostics) {
    if (d.fatal) return true;
  }
  return false;
}

}  // namespace blocklda
