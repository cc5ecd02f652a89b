// Copyright 2026 The pbel Authors.
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

namespace pbel {

// Base of every error raised by the library. `category()` is a stable
// machine-readable tag used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* category() const noexcept { return "error"; }
};

#define PBEL_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(what) {}           \
    const char* category() const noexcept override { return tag; }   \
  };

PBEL_DEFINE_ERROR(DimensionError, "dimension")
PBEL_DEFINE_ERROR(DegenerateVectorError, "degenerate-vector")
PBEL_DEFINE_ERROR(NumericsError, "numerics")
PBEL_DEFINE_ERROR(InvalidArgument, "invalid-argument")
PBEL_DEFINE_ERROR(EmptyInputError, "empty-input")
PBEL_DEFINE_ERROR(FormatError, "format")
PBEL_DEFINE_ERROR(KindMismatchError, "kind-mismatch")
PBEL_DEFINE_ERROR(IndexMismatchError, "index-mismatch")
PBEL_DEFINE_ERROR(IoError, "io")
PBEL_DEFINE_ERROR(InvariantError, "invariant")

#undef PBEL_DEFINE_ERROR

// Malformed line in an input file. The message always names the file, the
// 1-based line and the violated rule.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& rule)
      : Error(file + ":" + std::to_string(line) + ": " + rule),
        file_(std::move(file)),
        line_(line) {}
  const char* category() const noexcept override { return "parse"; }
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace pbel
