// Copyright (c) 2026 The percept-tts Authors
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

#ifndef PERCEPT_COMMON_ERROR_H_
#define PERCEPT_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace percept {

// Base class for all library errors. The CLI maps each subclass to an exit
// code: UsageError -> 1, DataError/ShapeError -> 2, NumericError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data (files, manifests, ratings, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor or matrix with an unexpected shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss, degenerate statistics and similar numerical failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace percept

#endif  // PERCEPT_COMMON_ERROR_H_
