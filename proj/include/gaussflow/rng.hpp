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

#include <array>
#include <cstdint>

namespace gaussflow {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw
// is a pure function of (key, counter), so streams can be evaluated in any
// order and on any thread.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const;

 private:
  Key key_;
};

/// Standard normal draw keyed by (seed, path_id, step, axis).
double keyed_normal(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step, std::uint32_t axis);

/// Uniform draw in (0, 1) keyed like keyed_normal but in a separate stream.
double keyed_uniform(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step, std::uint32_t axis);

}  // namespace gaussflow
