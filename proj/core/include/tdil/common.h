// Copyright 2026 The tdil Authors.
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

#ifndef TDIL_COMMON_H_
#define TDIL_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace tdil {

// All stochastic components draw from explicitly seeded engines.
using Rng = std::mt19937_64;

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before log.
inline constexpr double kProbEpsilon = 1e-7;

// Independent seed for a named sub-stream of a run (splitmix64 finalizer).
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// A map whose free-cell graph does not connect every start cell to the goal.
class ConnectivityError : public Error {
 public:
  ConnectivityError(const std::string& what, int cell)
      : Error(what), cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

// Non-finite loss, gradient or target.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid data (broken trajectory chaining, header mismatch, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdil

#endif  // TDIL_COMMON_H_
