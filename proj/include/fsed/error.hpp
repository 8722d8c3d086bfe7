// Copyright 2026 The fsed Authors
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

#ifndef FSED_ERROR_HPP_
#define FSED_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fsed {

// Base class for all toolkit errors. Anything derived from this is a data or
// configuration problem, not an internal bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input bytes (CSV tables, WAV containers, manifests, reports).
// Carries a 1-based line number when the source is line oriented.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(const std::string& what, int line)
      : Error(what + ", line " + std::to_string(line)), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

// A recording does not contain enough POS events of the target class to form
// the requested support set.
class InsufficientShots : public Error {
 public:
  using Error::Error;
};

}  // namespace fsed

#endif  // FSED_ERROR_HPP_
