// Copyright 2026 The PVPIR Authors
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

#ifndef PVPIR_ERRORS_HPP_
#define PVPIR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pvpir {

// Base class for every failure raised by the library. A verification
// REJECT is not an error and never surfaces as an exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed bytes: truncated buffers, bad tags, out-of-range values.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Bounded-retry searches (prime generation, sampling) that gave up.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvpir

#endif  // PVPIR_ERRORS_HPP_
