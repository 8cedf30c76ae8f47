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

#include "blocklda/config.hpp"

namespace blocklda {

// Executes a full training run and writes metrics.csv, checkpoint.bin,
// topics.txt, and summary.json under config.output_dir.
// Exit status: 0 on success, 2 for invalid configuration or unreadable
// input, 1 for a runtime invariant violation.
int run(const RunConfig& config);

// Full command-line entry point (subcommands: train, validate).
int run_cli(int argc, const char* const* argv);

}  // namespace blocklda
