// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The depcage authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing,
// software distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions
// and limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace depcage {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text; `line` is 1-based, 0 when unknown. `source` names the
/// file, if known. what() reads "source: line N: message".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, const std::string& source = "")
      : Error(compose(message, line, source)), line_(line), message_(message), source_(source) {}
  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }
  const std::string& source() const { return source_; }

 private:
  static std::string compose(const std::string& message, std::size_t line, const std::string& source) {
    std::string out = source.empty() ? "" : source + ": ";
    if (line) out += "line " + std::to_string(line) + ": ";
    return out + message;
  }
  std::size_t line_;
  std::string message_;
  std::string source_;
};

/// Well-formed input that violates a contract; `field` is a JSON-pointer-like path.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field), message_(what) {}
  const std::string& field() const { return field_; }
  /// The message without the field prefix.
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DigestMismatch : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in a state that does not allow it (e.g. untrained model).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace depcage
