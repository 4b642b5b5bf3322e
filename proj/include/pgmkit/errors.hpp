// Copyright 2026 The pgmkit Authors. All Rights Reserved.
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

#ifndef PGMKIT_ERRORS_HPP_
#define PGMKIT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgmkit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents. Carries the byte offset where parsing failed
/// (or npos when the failure is not tied to one position).
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& what, std::size_t offset = npos)
      : Error(offset == npos ? what
                             : what + " (at byte " + std::to_string(offset) +
                                   ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A value outside its admissible range, e.g. a luminance sample > 1.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument does not hold (lambda <= 0, shape
/// mismatch, non-finite input).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Structured input (annotation JSON) does not follow the schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The request would exceed a configured resource budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace pgmkit

#endif  // PGMKIT_ERRORS_HPP_
