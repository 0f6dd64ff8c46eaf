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

#include "gaussflow/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace gaussflow;

namespace {

// Philox4x32 key setup takes the 64-bit seed as (lo, hi).
std::uint64_t seed_of(std::uint32_t lo, std::uint32_t hi) { return (std::uint64_t{hi} << 32) | lo; }

}  // namespace

TEST_CASE("philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32(0)(C{0, 0, 0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32(seed_of(0xffffffff, 0xffffffff))(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32(seed_of(0xa4093822, 0x299f31d0))(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed draws are pure functions of their key") {
  CHECK(keyed_normal(7, 3, 11, 0) == keyed_normal(7, 3, 11, 0));
  std::set<double> distinct{keyed_normal(7, 3, 11, 0), keyed_normal(8, 3, 11, 0), keyed_normal(7, 4, 11, 0),
                            keyed_normal(7, 3, 12, 0), keyed_normal(7, 3, 11, 1), keyed_normal(7, 1ull << 33, 11, 0)};
  CHECK(distinct.size() == 6);
  for (std::uint32_t k = 0; k < 1000; ++k) {
    const double u = keyed_uniform(1, 2, k, 0);
    CHECK((u > 0.0 && u < 1.0));
  }
}

TEST_CASE("normal draw moments") {
  constexpr int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = keyed_normal(42, static_cast<std::uint64_t>(k), 0, 0);
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  // 5-sigma bands: se(mean) = 1/sqrt(n), se(var) = sqrt(2/n), se(m4) = sqrt(96/n).
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}
