// Copyright 2026 The palstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PALSTREAM_ERROR_H_
#define PALSTREAM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace palstream {

// Broad failure classes. The command-line tool maps each one to an exit code.
enum class ErrorKind {
  kContract,      // caller violated a precondition
  kFormat,        // malformed bytes or text input
  kNumeric,       // singular system, undefined statistic, too few rows
  kInfeasible,    // request cannot be satisfied by the data
};

constexpr std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract:
      return "contract";
    case ErrorKind::kFormat:
      return "format";
    case ErrorKind::kNumeric:
      return "numeric";
    case ErrorKind::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kFormat, what) {}
};

// Device profile text that is missing a key or carries a bad value.
class ProfileError : public FormatError {
 public:
  ProfileError(std::string key, const std::string& what)
      : FormatError("profile key '" + key + "': " + what),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Bandwidth trace that is malformed or does not cover a session.
class TraceError : public FormatError {
 public:
  explicit TraceError(const std::string& what) : FormatError(what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

// Design matrix is (numerically) rank deficient.
class SingularDesignError : public NumericError {
 public:
  SingularDesignError(int column, const std::string& what)
      : NumericError(what), column_(column) {}

  // Zero-based design column (0 is the intercept) found to be dependent.
  int column() const noexcept { return column_; }

 private:
  int column_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

// Estimation table has no row for the requested device class.
class LookupError : public InfeasibleError {
 public:
  explicit LookupError(const std::string& what) : InfeasibleError(what) {}
};

}  // namespace palstream

#endif  // PALSTREAM_ERROR_H_
