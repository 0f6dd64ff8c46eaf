/*
 * Copyright 2026 The gaussflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaussflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions or truncations do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A coefficient vector has support above the guard band |n| <= N - 2.
class GuardBandError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations and eigen solves.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A time-stepping scheme produced a non-finite state.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, std::size_t step)
      : NumericalError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaussflow
