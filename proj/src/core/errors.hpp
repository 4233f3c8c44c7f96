// Copyright 2026 The psyhide Authors
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

#ifndef PSYHIDE_CORE_ERRORS_HPP_
#define PSYHIDE_CORE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace psyhide {

// Error taxonomy shared by the whole library.  The C API maps each class
// onto a status code, so new classes need a matching enum entry there.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// File exists but its contents are not in a supported format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Caller passed an invalid value (empty input, negative rate, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Shapes of two objects do not line up, or an input is too short.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A word is missing from the lexicon or the lexicon itself is bad.
class LexiconError : public Error {
 public:
  using Error::Error;
};

// A computation produced NaN or otherwise left the numeric domain.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A request is well formed but cannot be satisfied (phone rate too high,
// target chain longer than the signal, ...).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace psyhide

#endif  // PSYHIDE_CORE_ERRORS_HPP_
