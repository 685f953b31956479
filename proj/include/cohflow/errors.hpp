// Copyright 2026 The cohflow Authors
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

namespace cohflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matrix dims, Kraus counts, amplitude lengths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument is outside its admissible range (negative time, p > 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be a density operator (or Hermitian) is not.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A Kraus set failed completeness or complete positivity.
class InvalidChannelError : public Error {
 public:
  using Error::Error;
};

/// The requested control outcome has (numerically) zero probability.
class PostSelectionError : public Error {
 public:
  explicit PostSelectionError(double probability)
      : Error("post-selection impossible: outcome probability " +
              std::to_string(probability)),
        probability_(probability) {}

  double probability() const noexcept { return probability_; }

 private:
  double probability_;
};

}  // namespace cohflow
