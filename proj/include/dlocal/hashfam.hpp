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

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlocal/errors.hpp"
#include "dlocal/gf2m.hpp"
#include "dlocal/rational.hpp"

namespace dlocal {

/// Polynomial hash family h: {0,1}^gamma -> {0,1}^beta of degree d-1 over
/// GF(2^m), m = max(gamma, beta). A seed holds t = d*m bits.
///
/// Seed layout: coefficient-major, low bit first. Bit k of the integer seed
/// is seed variable y_{k+1}, and coefficient a_c occupies bits [c*m, (c+1)*m).
struct FamilyParams {
  unsigned gamma = 1;
  unsigned beta = 1;
  unsigned d = 1;
  unsigned m = 1;
  unsigned t = 1;
  unsigned t_max = 26;

  static FamilyParams make(unsigned gamma, unsigned beta, unsigned d, unsigned t_max = 26) {
    if (gamma < 1) throw ParameterError("gamma must be >= 1");
    if (beta < 1) throw ParameterError("beta must be >= 1");
    if (d < 1) throw ParameterError("independence d must be >= 1");
    if (t_max > 62) throw ParameterError("t_max above 62 is not supported");
    FamilyParams p;
    p.gamma = gamma;
    p.beta = beta;
    p.d = d;
    p.m = std::max(gamma, beta);
    check_field_size(p.m);
    p.t = d * p.m;
    p.t_max = t_max;
    if (p.t > t_max)
      throw BudgetError("seed length t=" + std::to_string(p.t) + " (d=" + std::to_string(d) +
                        ", m=" + std::to_string(p.m) + ") exceeds t_max=" + std::to_string(t_max));
    return p;
  }

  std::uint64_t seed_count() const noexcept { return std::uint64_t{1} << t; }
  bool operator==(const FamilyParams&) const = default;
};

inline std::uint32_t coefficient(const FamilyParams& fp, std::uint64_t seed, unsigned c) {
  return static_cast<std::uint32_t>((seed >> (c * fp.m)) & ((std::uint64_t{1} << fp.m) - 1));
}

inline std::uint32_t eval_hash(const FamilyParams& fp, std::uint64_t seed, std::uint64_t x) {
  if (fp.t < 64 && (seed >> fp.t) != 0) throw ParameterError("seed wider than t bits");
  if ((x >> fp.gamma) != 0) throw ParameterError("input " + std::to_string(x) + " wider than gamma bits");
  const auto xx = static_cast<std::uint32_t>(x);
  std::uint32_t r = coefficient(fp, seed, fp.d - 1);
  for (unsigned c = fp.d - 1; c-- > 0;) r = field_mul(r, xx, fp.m) ^ coefficient(fp, seed, c);
  return r & static_cast<std::uint32_t>((std::uint64_t{1} << fp.beta) - 1);
}

inline void check_coin_exponent(const FamilyParams& fp, unsigned j) {
  if (j < 1 || j > fp.beta)
    throw ParameterError("coin probability 2^-" + std::to_string(j) + " not representable with beta=" +
                         std::to_string(fp.beta));
}

/// Biased coin with probability 2^-j: 1 iff h(id) < 2^(beta-j).
inline bool coin(const FamilyParams& fp, std::uint64_t seed, std::uint64_t id, unsigned j) {
  check_coin_exponent(fp, j);
  return eval_hash(fp, seed, id) < (std::uint32_t{1} << (fp.beta - j));
}

/// j with p = 2^-j, or ParameterError if p is not such a power of two.
inline unsigned coin_exponent(const Rational& p) {
  const BigInt num = numerator_of(p);
  const BigInt den = denominator_of(p);
  if (num != 1 || den < 2 || (den & (den - 1)) != 0)
    throw ParameterError("probability " + to_string(p) + " is not 2^-j with j >= 1");
  return static_cast<unsigned>(boost::multiprecision::msb(den));
}

/// A prefix y_1..y_i of the seed. Consistent seeds are prefix | (r << i) for
/// every r < 2^(t-i).
class SeedAssignment {
 public:
  SeedAssignment() = default;
  explicit SeedAssignment(const FamilyParams& fp) : params_(fp) {}
  SeedAssignment(const FamilyParams& fp, std::uint64_t prefix, unsigned fixed) : params_(fp) {
    if (fixed > fp.t) throw ParameterError("prefix longer than seed");
    if (fixed < 64 && (prefix >> fixed) != 0) throw ParameterError("prefix has bits above its length");
    prefix_ = prefix;
    fixed_ = fixed;
  }

  const FamilyParams& params() const noexcept { return params_; }
  unsigned fixed() const noexcept { return fixed_; }
  unsigned free_bits() const noexcept { return params_.t - fixed_; }
  std::uint64_t prefix() const noexcept { return prefix_; }
  bool is_complete() const noexcept { return fixed_ == params_.t; }
  std::uint64_t consistent_count() const noexcept { return std::uint64_t{1} << free_bits(); }
  std::uint64_t consistent_seed(std::uint64_t r) const noexcept { return prefix_ | (r << fixed_); }

  SeedAssignment extend(bool bit) const { return extend_block(bit ? 1 : 0, 1); }

  /// Fixes the next z bits; bit 0 of value becomes y_{i+1}.
  SeedAssignment extend_block(std::uint64_t value, unsigned z) const {
    if (z > free_bits()) throw ParameterError("block of " + std::to_string(z) + " bits exceeds free bits");
    if (z < 64 && (value >> z) != 0) throw ParameterError("block value wider than block");
    return SeedAssignment(params_, prefix_ | (value << fixed_), fixed_ + z);
  }

  std::uint64_t seed() const {
    if (!is_complete()) throw ParameterError("seed requested from incomplete assignment");
    return prefix_;
  }

  /// "i:hex", hex of the prefix value.
  std::string to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(prefix_));
    return std::to_string(fixed_) + ":" + buf;
  }

  static SeedAssignment parse(const FamilyParams& fp, std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
      throw ParameterError("malformed seed assignment '" + std::string(text) + "'");
    unsigned fixed = 0;
    std::uint64_t prefix = 0;
    try {
      fixed = static_cast<unsigned>(std::stoul(std::string(text.substr(0, colon))));
      std::size_t used = 0;
      std::string hex(text.substr(colon + 1));
      prefix = std::stoull(hex, &used, 16);
      if (used != hex.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ParameterError("malformed seed assignment '" + std::string(text) + "'");
    }
    return SeedAssignment(fp, prefix, fixed);
  }

  bool operator==(const SeedAssignment&) const = default;

 private:
  FamilyParams params_;
  std::uint64_t prefix_ = 0;
  unsigned fixed_ = 0;
};

inline void check_enumeration_budget(const SeedAssignment& a) {
  if (a.free_bits() > a.params().t_max)
    throw BudgetError(std::to_string(a.free_bits()) + " free seed bits exceed t_max=" +
                      std::to_string(a.params().t_max));
}

struct ConditionalCount {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  Rational probability() const { return Rational(BigInt(numerator), BigInt(denominator)); }
};

/// Counts consistent seeds satisfying pred.
template <class Pred>
ConditionalCount conditional_count(const SeedAssignment& a, Pred&& pred) {
  check_enumeration_budget(a);
  ConditionalCount c;
  c.denominator = a.consistent_count();
  for (std::uint64_t r = 0; r < c.denominator; ++r) {
    if (pred(a.consistent_seed(r))) ++c.numerator;
  }
  return c;
}

/// Sums an integer-valued function over consistent seeds.
template <class Fn>
std::pair<std::int64_t, std::uint64_t> conditional_sum(const SeedAssignment& a, Fn&& fn) {
  check_enumeration_budget(a);
  const std::uint64_t count = a.consistent_count();
  std::int64_t total = 0;
  for (std::uint64_t r = 0; r < count; ++r) total += static_cast<std::int64_t>(fn(a.consistent_seed(r)));
  return {total, count};
}

/// Coins of a fixed set of (id, exponent) pairs for every seed. Rows are
/// cached as bit words while 2^t * n stays under the memory cap, and
/// recomputed on demand otherwise.
class CoinMatrix {
 public:
  static constexpr std::uint64_t kDefaultCapBits = std::uint64_t{1} << 28;

  struct Entry {
    std::uint64_t id = 0;
    unsigned exponent = 1;
  };

  CoinMatrix(const FamilyParams& fp, std::vector<Entry> entries, std::uint64_t cap_bits = kDefaultCapBits)
      : params_(fp), entries_(std::move(entries)) {
    for (const auto& e : entries_) check_coin_exponent(fp, e.exponent);
    words_ = (entries_.size() + 63) / 64;
    if (words_ == 0) words_ = 1;
    const std::uint64_t bits = fp.seed_count() * words_ * 64;
    cached_ = fp.seed_count() <= (cap_bits / (words_ * 64)) && bits <= cap_bits;
    if (cached_) {
      table_.assign(fp.seed_count() * words_, 0);
      for (std::uint64_t s = 0; s < fp.seed_count(); ++s) compute(s, &table_[s * words_]);
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t words() const noexcept { return words_; }
  bool cached() const noexcept { return cached_; }
  const FamilyParams& params() const noexcept { return params_; }

  /// Fills out[0..words) with the coin bits of seed; index = entry position.
  void row(std::uint64_t seed, std::uint64_t* out) const {
    if (cached_) {
      std::copy_n(&table_[seed * words_], words_, out);
      return;
    }
    compute(seed, out);
  }

  bool entry(std::uint64_t seed, std::size_t idx) const {
    if (cached_) return ((table_[seed * words_ + idx / 64] >> (idx % 64)) & 1U) != 0;
    const auto& e = entries_.at(idx);
    return coin(params_, seed, e.id, e.exponent);
  }

 private:
  void compute(std::uint64_t seed, std::uint64_t* out) const {
    std::fill_n(out, words_, 0);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (coin(params_, seed, entries_[i].id, entries_[i].exponent)) out[i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }

  FamilyParams params_;
  std::vector<Entry> entries_;
  std::size_t words_ = 1;
  bool cached_ = false;
  std::vector<std::uint64_t> table_;
};

}  // namespace dlocal
