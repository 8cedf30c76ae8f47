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

#include <stdexcept>
#include <string>

namespace blocklda {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// An id in the input exceeded the declared bounds.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration (bad flag combination, overlapping blocks, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The block-ownership protocol was violated: double checkout, commit without
// holding, count underflow, or a worker touching a term outside its blocks.
// Always indicates a scheduling bug, never a data problem.
class ProtocolViolationError : public Error {
 public:
  using Error::Error;
};

// A block was requested for a round it has not reached (or already passed).
class StaleRoundError : public Error {
 public:
  using Error::Error;
};

// A count-conservation or consistency invariant failed.
class InvariantViolationError : public Error {
 public:
  using Error::Error;
};

// Vector length mismatch in a counts exchange.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite mass or other numerical breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A cached quantity drifted from its from-scratch recomputation.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace blocklda
