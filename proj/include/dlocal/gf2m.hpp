/*
 *   Copyright 2026 The dlocal Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "dlocal/errors.hpp"

namespace dlocal {

// Reduction polynomial per field size m, bit i = coefficient of x^i.
// Each entry is irreducible over GF(2); the lowest-weight choice was taken.
inline constexpr std::array<std::uint64_t, 33> kIrreducible = {
    0x0,                                                         // unused
    0x3,        0x7,        0xB,        0x13,       0x25,        // m = 1..5
    0x43,       0x83,       0x11B,      0x211,      0x409,       // m = 6..10
    0x805,      0x1053,     0x201B,     0x4443,     0x8003,      // m = 11..15
    0x1100B,    0x20009,    0x40081,    0x80027,    0x100009,    // m = 16..20
    0x200005,   0x400003,   0x800021,   0x1000087,  0x2000009,   // m = 21..25
    0x4000047,  0x8000027,  0x10000009, 0x20000005, 0x40800007,  // m = 26..30
    0x80000009, 0x100400007,                                     // m = 31..32
};

inline void check_field_size(unsigned m) {
  if (m < 1 || m > 32) throw ParameterError("field size m=" + std::to_string(m) + " outside 1..32");
}

/// Product in GF(2^m): shift-and-add with reduction after every shift.
inline std::uint32_t field_mul(std::uint32_t a, std::uint32_t b, unsigned m) {
  check_field_size(m);
  const std::uint64_t poly = kIrreducible[m];
  const std::uint64_t top = std::uint64_t{1} << m;
  const std::uint64_t mask = top - 1;
  std::uint64_t x = a & mask;
  std::uint64_t y = b & mask;
  std::uint64_t r = 0;
  while (y != 0) {
    if (y & 1U) r ^= x;
    y >>= 1U;
    x <<= 1U;
    if (x & top) x ^= poly;
  }
  return static_cast<std::uint32_t>(r);
}

}  // namespace dlocal
