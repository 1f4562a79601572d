// Copyright 2026 The PPRSF Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace pprsf {

// Root of every error raised by the library. Callers that only need to
// distinguish "our failure" from anything else can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column,
             const std::string& what)
      : Error(file + ":" + std::to_string(line) + ":" +
              std::to_string(column) + ": " + what),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

class CoverageError : public Error {
 public:
  using Error::Error;
};

class UniquenessError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class EmptyCatalogError : public Error {
 public:
  using Error::Error;
};

class EmptyBatchError : public Error {
 public:
  using Error::Error;
};

class NoParticipantsError : public Error {
 public:
  using Error::Error;
};

class RejectedUpdateError : public Error {
 public:
  RejectedUpdateError(long long client_id, const std::string& what)
      : Error(what), client_id_(client_id) {}
  long long client_id() const { return client_id_; }

 private:
  long long client_id_;
};

class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

class IncomparableReportsError : public Error {
 public:
  using Error::Error;
};

class PrivacyViolationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pprsf
