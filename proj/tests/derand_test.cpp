#include <random>

#include <gtest/gtest.h>

#include "dlocal/derand.hpp"

namespace dlocal {
namespace {

// Estimator that is the exact conditional mean of a per-seed table.
Estimator table_estimator(std::vector<Rational> table, Direction dir, std::optional<Rational> threshold = {}) {
  Estimator e;
  e.direction = dir;
  e.threshold = std::move(threshold);
  e.evaluate = [table = std::move(table)](const SeedAssignment& a) {
    Rational sum = 0;
    for (std::uint64_t r = 0; r < a.consistent_count(); ++r) sum += table[a.consistent_seed(r)];
    return sum / Rational(static_cast<long long>(a.consistent_count()));
  };
  return e;
}

Rational brute_average(const std::vector<Rational>& table) {
  Rational sum = 0;
  for (const auto& v : table) sum += v;
  return sum / Rational(static_cast<long long>(table.size()));
}

TEST(FixNextBit, PointMassPredicate) {
  auto fp = FamilyParams::make(3, 3, 2);
  std::vector<Rational> table(fp.seed_count(), 0);
  table[45] = 1;
  auto est = table_estimator(table, Direction::maximize);
  auto run = run_to_completion(est, fp);
  EXPECT_EQ(run.chosen.seed(), 45u);
  EXPECT_EQ(run.final_value, Rational(1));
}

TEST(FixNextBit, TieGoesToZero) {
  auto fp = FamilyParams::make(2, 2, 1);
  auto est = table_estimator({1, 1, 1, 1}, Direction::maximize);
  auto step = fix_next_bit(est, SeedAssignment(fp));
  EXPECT_EQ(step.chosen, 0u);
  EXPECT_EQ(step.next.prefix(), 0u);
}

TEST(FixNextBit, TiebreakOnlyBetweenEqualValues) {
  auto fp = FamilyParams::make(2, 2, 1);
  auto est = table_estimator({1, 1, 1, 1}, Direction::maximize);
  est.tiebreak = [](const SeedAssignment& a) { return Rational(static_cast<long long>(a.prefix())); };
  EXPECT_EQ(fix_next_bit(est, SeedAssignment(fp)).chosen, 1u);
  auto strict = table_estimator({2, 0, 2, 0}, Direction::maximize);
  strict.tiebreak = est.tiebreak;
  EXPECT_EQ(fix_next_bit(strict, SeedAssignment(fp)).chosen, 0u);
}

TEST(FixNextBit, MaximizeNeverDecreases) {
  auto fp = FamilyParams::make(3, 3, 2);
  std::mt19937_64 rng(1);
  std::vector<Rational> table;
  for (std::uint64_t s = 0; s < fp.seed_count(); ++s) table.emplace_back(static_cast<long long>(rng() % 7));
  auto est = table_estimator(table, Direction::maximize);
  SeedAssignment a(fp);
  Rational value = est.evaluate(a);
  while (!a.is_complete()) {
    auto step = fix_next_bit(est, a);
    EXPECT_GE(step.candidates[step.chosen], value);
    value = step.candidates[step.chosen];
    a = step.next;
  }
}

TEST(FixNextBit, CompleteAssignmentRejected) {
  auto fp = FamilyParams::make(1, 1, 1);
  auto est = table_estimator({0, 1}, Direction::maximize);
  EXPECT_THROW(fix_next_bit(est, SeedAssignment(fp, 1, 1)), ParameterError);
}

TEST(FixNextBlock, SingleBitMatchesBitwise) {
  auto fp = FamilyParams::make(3, 3, 2);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rational> table;
    for (std::uint64_t s = 0; s < fp.seed_count(); ++s) table.emplace_back(static_cast<long long>(rng() % 5));
    auto est = table_estimator(table, trial % 2 ? Direction::maximize : Direction::minimize);
    auto bitwise = run_to_completion(est, fp);
    auto block = run_to_completion(est, fp, Schedule::blockwise(1, 2));
    EXPECT_EQ(bitwise.chosen, block.chosen);
  }
}

TEST(FixNextBlock, ArgminOfFour) {
  auto fp = FamilyParams::make(1, 1, 2);  // t = 2
  auto est = table_estimator({3, 1, 2, 2}, Direction::minimize);
  auto step = fix_next_block(est, SeedAssignment(fp), 2, 4);
  EXPECT_EQ(step.chosen, 1u);
  EXPECT_EQ(step.candidates[step.chosen], Rational(1));
}

TEST(FixNextBlock, TieGoesToLexicographicallySmallest) {
  auto fp = FamilyParams::make(1, 1, 2);
  // Values for block values 1 (y1=1,y2=0) and 2 (y1=0,y2=1) tie; 2 reads "01".
  auto est = table_estimator({5, 1, 1, 5}, Direction::minimize);
  EXPECT_EQ(fix_next_block(est, SeedAssignment(fp), 2, 4).chosen, 2u);
}

TEST(FixNextBlock, NeedsEnoughEvaluators) {
  auto fp = FamilyParams::make(1, 1, 2);
  auto est = table_estimator({3, 1, 2, 2}, Direction::minimize);
  EXPECT_THROW(fix_next_block(est, SeedAssignment(fp), 2, 3), ParameterError);
}

TEST(FixNextBlock, LastBlockShrinks) {
  auto fp = FamilyParams::make(5, 5, 1);  // t = 5, blocks of 2
  std::vector<Rational> table(fp.seed_count(), 1);
  table[31] = 0;
  auto run = run_to_completion(table_estimator(table, Direction::minimize), fp, Schedule::blockwise(2, 4));
  EXPECT_EQ(run.trace.size(), 3u);
  EXPECT_EQ(run.trace.back().block, 1u);
  EXPECT_EQ(run.chosen.seed(), 31u);
}

TEST(RunToCompletion, BothSchedulesStayBelowThreshold) {
  auto fp = FamilyParams::make(3, 3, 3);  // t = 9
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rational> table;
    for (std::uint64_t s = 0; s < fp.seed_count(); ++s) table.emplace_back(static_cast<long long>(rng() % 3), 2);
    const Rational avg = brute_average(table);
    auto est = table_estimator(table, Direction::minimize, avg + Rational(1, 1000));
    for (auto sched : {Schedule::bitwise(), Schedule::blockwise(3, 8)}) {
      auto run = run_to_completion(est, fp, sched);
      EXPECT_LT(run.final_value, avg + Rational(1, 1000));
      EXPECT_LE(run.final_value, avg);
    }
  }
}

TEST(RunToCompletion, ConstantEstimator) {
  auto fp = FamilyParams::make(2, 2, 2);
  auto run = run_to_completion(table_estimator(std::vector<Rational>(16, Rational(7, 3)), Direction::maximize), fp);
  EXPECT_EQ(run.final_value, run.initial_value);
  EXPECT_EQ(run.chosen.seed(), 0u);
}

TEST(RunToCompletion, CountOfOnesBeatsHalfAndMatchesExhaustiveBound) {
  const unsigned n = 8;
  auto fp = FamilyParams::make(3, 3, 2);  // t = 6, pairwise coins with p = 1/2
  std::vector<Rational> table;
  for (std::uint64_t s = 0; s < fp.seed_count(); ++s) {
    long long ones = 0;
    for (unsigned v = 0; v < n; ++v) ones += coin(fp, s, v, 1);
    table.emplace_back(ones);
  }
  auto run = run_to_completion(table_estimator(table, Direction::maximize), fp);
  EXPECT_GE(run.final_value, Rational(n, 2));
  EXPECT_EQ(run.initial_value, Rational(n, 2));
  EXPECT_EQ(run.final_value, table[run.chosen.seed()]);
  const Rational best = *std::max_element(table.begin(), table.end());
  EXPECT_LE(run.final_value, best);
}

TEST(RunToCompletion, InfeasibleStart) {
  auto fp = FamilyParams::make(1, 1, 1);
  auto est = table_estimator({Rational(6, 5), Rational(6, 5)}, Direction::minimize, Rational(1));
  try {
    run_to_completion(est, fp);
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.value(), "6/5");
  }
}

TEST(RunToCompletion, DetectsBrokenAveragingLaw) {
  auto fp = FamilyParams::make(2, 2, 1);
  Estimator e;
  e.direction = Direction::maximize;
  e.evaluate = [](const SeedAssignment& a) { return Rational(static_cast<long long>(a.fixed())); };
  EXPECT_THROW(run_to_completion(e, fp), InvariantError);
}

TEST(RunToCompletion, TraceJson) {
  auto fp = FamilyParams::make(1, 1, 2);
  auto run = run_to_completion(table_estimator({3, 1, 2, 2}, Direction::minimize), fp);
  auto j = run.trace_json();
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["step"], 0);
  EXPECT_EQ(j[0]["candidate_values"][0], "5/2");
  EXPECT_EQ(j[0]["candidate_values"][1], "3/2");
  EXPECT_EQ(j[0]["chosen"], 1);
  EXPECT_EQ(j[1]["candidate_values"][0], "1/1");
}

TEST(RunToCompletion, OnStepHookSeesEveryStep) {
  auto fp = FamilyParams::make(2, 2, 2);
  int calls = 0;
  run_to_completion(table_estimator(std::vector<Rational>(16, 0), Direction::maximize), fp, Schedule::bitwise(),
                    [&](const DerandStep&) { ++calls; });
  EXPECT_EQ(calls, 4);
}

}  // namespace
}  // namespace dlocal
