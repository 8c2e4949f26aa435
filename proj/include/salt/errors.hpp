// Copyright 2026 The Saltstore Authors
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

namespace salt {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller handed us something malformed: bad dimensions, bad parameters,
// out-of-range operands.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A byte stream could not be parsed: bad magic, truncation, corrupt payload.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Stored data is damaged beyond repair: CRC mismatch, unrecoverable stripe.
class DataError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace salt
