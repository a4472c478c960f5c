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

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "dlocal/errors.hpp"

namespace dlocal {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt numerator_of(const Rational& r) {
  return boost::multiprecision::numerator(r);
}
inline BigInt denominator_of(const Rational& r) {
  return boost::multiprecision::denominator(r);
}

/// Always "p/q", including q == 1. Used wherever a fixed textual form matters.
inline std::string to_fraction_string(const Rational& r) {
  return numerator_of(r).str() + "/" + denominator_of(r).str();
}

/// "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& r) {
  if (denominator_of(r) == 1) return numerator_of(r).str();
  return to_fraction_string(r);
}

/// Parses "p", "-p" or "p/q" with decimal integers.
inline Rational parse_rational(std::string_view text) {
  auto parse_int = [&](std::string_view s) -> BigInt {
    if (s.empty()) throw ParameterError("malformed rational '" + std::string(text) + "'");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw ParameterError("malformed rational '" + std::string(text) + "'");
    for (std::size_t j = i; j < s.size(); ++j) {
      if (s[j] < '0' || s[j] > '9')
        throw ParameterError("malformed rational '" + std::string(text) + "'");
    }
    return BigInt(std::string(s));
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  BigInt num = parse_int(text.substr(0, slash));
  BigInt den = parse_int(text.substr(slash + 1));
  if (den == 0) throw ParameterError("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

inline Rational pow(const Rational& base, unsigned exponent) {
  Rational result = 1;
  Rational b = base;
  while (exponent != 0) {
    if (exponent & 1U) result *= b;
    b *= b;
    exponent >>= 1U;
  }
  return result;
}

/// 2^-exponent.
inline Rational dyadic(unsigned exponent) {
  return Rational(BigInt(1), BigInt(1) << exponent);
}

/// Bits of a sign-magnitude encoding: one sign bit plus the magnitude.
inline std::size_t encoded_bits(const BigInt& value) {
  if (value == 0) return 1;
  BigInt mag = value < 0 ? BigInt(-value) : value;
  return 1 + boost::multiprecision::msb(mag) + 1;
}

inline std::size_t encoded_bits(const Rational& value) {
  return encoded_bits(numerator_of(value)) + encoded_bits(denominator_of(value));
}

inline std::size_t encoded_bits(std::int64_t value) { return encoded_bits(BigInt(value)); }

/// ceil(log2(x)) for x >= 1; 0 for x <= 1.
constexpr unsigned ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0U : static_cast<unsigned>(std::bit_width(x - 1));
}

/// floor(log2(x)) for x >= 1.
constexpr unsigned floor_log2(std::uint64_t x) {
  return x == 0 ? 0U : static_cast<unsigned>(std::bit_width(x) - 1);
}

}  // namespace dlocal
