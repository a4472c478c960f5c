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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlocal/errors.hpp"
#include "dlocal/hashfam.hpp"
#include "dlocal/rational.hpp"

namespace dlocal {

enum class Direction { maximize, minimize };

/// Pessimistic estimator over partial seeds. evaluate must satisfy the
/// averaging law value(Y) = mean of value over Y's one-bit extensions; the
/// engine checks this on every step.
struct Estimator {
  Direction direction = Direction::maximize;
  std::function<Rational(const SeedAssignment&)> evaluate;
  // maximize: value must stay >= threshold; minimize: value must stay < threshold.
  std::optional<Rational> threshold;
  // Optional secondary score, larger is better, consulted only between
  // candidates whose primary values are equal.
  std::function<Rational(const SeedAssignment&)> tiebreak;

  bool better(const Rational& a, const Rational& b) const {
    return direction == Direction::maximize ? a > b : a < b;
  }
  bool feasible(const Rational& v) const {
    if (!threshold) return true;
    return direction == Direction::maximize ? v >= *threshold : v < *threshold;
  }
};

struct DerandStep {
  SeedAssignment next;
  unsigned block = 1;
  std::vector<Rational> candidates;  // indexed by block value
  std::uint64_t chosen = 0;
};

namespace detail {

// Block value whose bits, read y_{i+1} first, spell rank in binary.
inline std::uint64_t lex_candidate(std::uint64_t rank, unsigned z) {
  std::uint64_t v = 0;
  for (unsigned b = 0; b < z; ++b) {
    if ((rank >> (z - 1 - b)) & 1U) v |= std::uint64_t{1} << b;
  }
  return v;
}

inline DerandStep choose(const Estimator& est, const SeedAssignment& a, unsigned z) {
  DerandStep step;
  step.block = z;
  const std::uint64_t count = std::uint64_t{1} << z;
  step.candidates.resize(count);
  for (std::uint64_t c = 0; c < count; ++c) step.candidates[c] = est.evaluate(a.extend_block(c, z));
  // Remaining ties go to the lexicographically smallest extension y_{i+1} y_{i+2} ...
  std::uint64_t best = lex_candidate(0, z);
  std::optional<Rational> best_tb;
  for (std::uint64_t rank = 1; rank < count; ++rank) {
    const std::uint64_t c = lex_candidate(rank, z);
    if (est.better(step.candidates[c], step.candidates[best])) {
      best = c;
      best_tb.reset();
    } else if (est.tiebreak && step.candidates[c] == step.candidates[best]) {
      if (!best_tb) best_tb = est.tiebreak(a.extend_block(best, z));
      Rational tb = est.tiebreak(a.extend_block(c, z));
      if (tb > *best_tb) {
        best = c;
        best_tb = std::move(tb);
      }
    }
  }
  step.chosen = best;
  step.next = a.extend_block(best, z);
  return step;
}

}  // namespace detail

inline DerandStep fix_next_bit(const Estimator& est, const SeedAssignment& a) {
  if (a.is_complete()) throw ParameterError("assignment is already complete");
  return detail::choose(est, a, 1);
}

/// One step over z bits at once. Candidate tau is evaluated by node tau, so
/// 2^z may not exceed the number of evaluators. The last block shrinks to
/// the remaining free bits.
inline DerandStep fix_next_block(const Estimator& est, const SeedAssignment& a, unsigned z,
                                 std::size_t evaluators) {
  if (z < 1) throw ParameterError("block size must be >= 1");
  if (z >= 63 || (std::uint64_t{1} << z) > evaluators)
    throw ParameterError("block of " + std::to_string(z) + " bits needs 2^z <= " + std::to_string(evaluators) +
                         " evaluator nodes");
  if (a.is_complete()) throw ParameterError("assignment is already complete");
  return detail::choose(est, a, std::min(z, a.free_bits()));
}

/// The assignment a step started from.
inline SeedAssignment parent_assignment(const DerandStep& step) {
  const unsigned fixed = step.next.fixed() - step.block;
  const std::uint64_t mask = fixed == 0 ? 0 : ((std::uint64_t{1} << fixed) - 1);
  return SeedAssignment(step.next.params(), step.next.prefix() & mask, fixed);
}

struct Schedule {
  unsigned block = 1;  // 1 = bitwise
  std::size_t evaluators = 2;

  static Schedule bitwise() { return {}; }
  static Schedule blockwise(unsigned z, std::size_t evaluators) { return {z, evaluators}; }
};

struct DerandRun {
  Schedule schedule;
  SeedAssignment chosen;
  Rational initial_value;
  Rational final_value;
  std::vector<DerandStep> trace;

  nlohmann::ordered_json trace_json() const {
    auto out = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < trace.size(); ++s) {
      nlohmann::ordered_json j;
      j["step"] = s;
      auto vals = nlohmann::ordered_json::array();
      for (const auto& v : trace[s].candidates) vals.push_back(to_fraction_string(v));
      j["candidate_values"] = std::move(vals);
      j["chosen"] = trace[s].chosen;
      out.push_back(std::move(j));
    }
    return out;
  }
};

/// Fixes every seed bit. Checks, exactly and on every step, the averaging
/// law, monotonicity per direction, and the feasibility threshold.
/// on_step runs after each step so callers can charge communication.
inline DerandRun run_to_completion(const Estimator& est, const FamilyParams& fp,
                                   Schedule schedule = Schedule::bitwise(),
                                   const std::function<void(const DerandStep&)>& on_step = {}) {
  DerandRun run;
  run.schedule = schedule;
  SeedAssignment a(fp);
  Rational value = est.evaluate(a);
  run.initial_value = value;
  if (!est.feasible(value))
    throw InfeasibleError(to_fraction_string(value), "unconditioned estimator value " + to_string(value) +
                                                         " violates threshold " + to_string(*est.threshold));
  while (!a.is_complete()) {
    DerandStep step = schedule.block == 1 ? fix_next_bit(est, a)
                                          : fix_next_block(est, a, schedule.block, schedule.evaluators);
    Rational sum = 0;
    for (const auto& c : step.candidates) sum += c;
    if (sum != value * Rational(static_cast<long long>(step.candidates.size())))
      throw InvariantError("averaging law fails at prefix " + a.to_string() + ": parent " + to_string(value) +
                           ", children mean " + to_string(sum / step.candidates.size()));
    const Rational& next = step.candidates[step.chosen];
    if (est.better(value, next)) throw InvariantError("estimator moved against its direction");
    if (!est.feasible(next)) throw InvariantError("estimator left its feasible region");
    value = next;
    a = step.next;
    if (on_step) on_step(step);
    run.trace.push_back(std::move(step));
  }
  run.chosen = a;
  run.final_value = value;
  return run;
}

}  // namespace dlocal
