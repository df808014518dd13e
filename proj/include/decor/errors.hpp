// Copyright 2026 The decor-bench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace decor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A class label, code index or target lies outside its range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity where a finite number is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `key()` names the offending setting when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key = {})
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Operation called on incomplete or inconsistent state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// A sample id has no stored pseudo-label.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Malformed text or binary input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parsed input violates a dataset invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace decor
