// latkit/common.h

// Copyright 2026  The latkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LATKIT_COMMON_H_
#define LATKIT_COMMON_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latkit {

// Error taxonomy shared by all modules.  The CLI maps these to exit codes:
// usage errors are caught by the argument parser (exit 1), DivergenceError
// exits 3, everything else below exits 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration or mismatched inputs (symbol table mismatch, empty
// corpus, infeasible synthesis spec, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A file that does not parse or violates its format contract.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input outside an operation's supported domain
// (epsilon cycles, cyclic graphs passed to acyclic-only algorithms).
class UnsupportedInputError : public Error {
 public:
  using Error::Error;
};

// A graph with no complete path where one is required.
class DegenerateGraphError : public Error {
 public:
  using Error::Error;
};

// Caller broke an interface contract (shape mismatch, bad span layout).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// FNV-1a over bytes; used for artifact and config hashes in run logs.
// Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hash_hex(std::string_view bytes);
std::string hash_file_hex(const std::string& path);

// Canonical 9-significant-digit float formatting used by every text format.
std::string format_g9(double value);

std::vector<std::string> split_ws(std::string_view line);
std::string trim(std::string_view s);
std::string lowercase(std::string_view s);

// Reads a whole file; throws ParseError when the file cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Runs fn(i) for i in [0, count) on up to `workers` threads and returns
// results in index order, so callers stay deterministic regardless of
// scheduling.  workers <= 1 degrades to a plain loop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace latkit

#endif  // LATKIT_COMMON_H_
