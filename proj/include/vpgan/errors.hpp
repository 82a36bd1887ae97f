// Copyright 2026 The vpgan Authors
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

#ifndef VPGAN_ERRORS_HPP
#define VPGAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vpgan {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 1, DataError -> 2, DivergenceError -> 3, EvalError -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or API misuse (bad dimensions, missing fields,
// non-scalar backward root, infeasible perplexity, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent data (corrupt corpus files, duplicate keys,
// unknown speakers in a mapping, refused overwrites, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss or gradient. Carries whatever
// diagnostics were available at the point of failure.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Evaluation cannot proceed (no target trials, zero diagonal dominance
// in the original corpus, exhausted rejection sampling, ...).
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace vpgan

#endif  // VPGAN_ERRORS_HPP
