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

#include <cmath>
#include <numbers>

namespace gaussflow {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

// 53-bit uniform in (0, 1) from two 32-bit words.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) + 0.5) * 0x1.0p-53;
}

Philox4x32::Counter keyed_block(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step, std::uint32_t word) {
  const Philox4x32 gen(seed);
  return gen({step, word, static_cast<std::uint32_t>(path_id), static_cast<std::uint32_t>(path_id >> 32)});
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

double keyed_normal(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step, std::uint32_t axis) {
  // Axis words are even; odd words are reserved for keyed_uniform.
  const auto block = keyed_block(seed, path_id, step, 2 * axis);
  const double u1 = to_open_unit(block[0], block[1]);
  const double u2 = to_open_unit(block[2], block[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t path_id, std::uint32_t step, std::uint32_t axis) {
  const auto block = keyed_block(seed, path_id, step, 2 * axis + 1);
  return to_open_unit(block[0], block[1]);
}

}  // namespace gaussflow
