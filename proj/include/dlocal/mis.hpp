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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dlocal/derand.hpp"
#include "dlocal/graph.hpp"
#include "dlocal/hashfam.hpp"
#include "dlocal/rational.hpp"
#include "dlocal/sim.hpp"

namespace dlocal {

/// Fixed constants of the modified probability dynamics and of the golden
/// phase definitions.
struct MisConstants {
  static constexpr unsigned p0_exponent = 2;  // p0 = 1/4, also the cap
  static Rational halve_threshold() { return {1, 2}; }
  static Rational type1_degree() { return {1, 2}; }
  static Rational light_threshold() { return {1, 4}; }
  static Rational type2_degree() { return {1, 4}; }
  static Rational light_fraction() { return {1, 10}; }
  static Rational w_low() { return {1, 40}; }
  static Rational w_high() { return {1, 4}; }
  static Rational alpha() { return {1, 160}; }
  /// 1 / (1 - alpha).
  static Rational age_base() { return {160, 159}; }
};

enum class MisStatus { undecided, in_mis, removed };

struct NodeMisState {
  unsigned p_exp = MisConstants::p0_exponent;  // p = 2^-p_exp
  unsigned age = 0;
  MisStatus status = MisStatus::undecided;

  Rational p() const { return dyadic(p_exp); }
  bool live() const noexcept { return status == MisStatus::undecided; }
};

/// p <- p/2 if d >= 1/2, else min(2p, 1/4). Exponents beyond max_exp are
/// not representable by the hash family and are rejected.
inline unsigned update_probability(const NodeMisState& s, const Rational& d, unsigned max_exp) {
  if (!s.live()) throw ParameterError("probability update on a decided node");
  if (d >= MisConstants::halve_threshold()) {
    if (s.p_exp + 1 > max_exp)
      throw ParameterError("p would fall below 2^-" + std::to_string(max_exp) + "; raise t_max");
    return s.p_exp + 1;
  }
  return std::max(MisConstants::p0_exponent, s.p_exp - 1);
}

/// Effective degrees over live neighbors; zero for decided nodes.
inline std::vector<Rational> effective_degrees(const Graph& g, const std::vector<NodeMisState>& st) {
  std::vector<Rational> d(g.size(), Rational(0));
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!st[v].live()) continue;
    for (NodeId u : g.neighbors(v))
      if (st[u].live()) d[v] += st[u].p();
  }
  return d;
}

enum class GoldenType { not_golden, type1, type2 };

inline std::string to_string(GoldenType t) {
  switch (t) {
    case GoldenType::type1: return "type1";
    case GoldenType::type2: return "type2";
    case GoldenType::not_golden: return "not_golden";
  }
  return "unknown";
}

/// A node meeting both conditions is type-1.
inline GoldenType classify_golden(const Rational& p, const Rational& d, const Rational& light_contribution) {
  if (p == dyadic(MisConstants::p0_exponent) && d <= MisConstants::type1_degree()) return GoldenType::type1;
  if (d > MisConstants::type2_degree() && light_contribution >= d * MisConstants::light_fraction())
    return GoldenType::type2;
  return GoldenType::not_golden;
}

/// Sum of p over live light neighbors (effective degree below 1/4).
inline Rational light_contribution(const Graph& g, const std::vector<NodeMisState>& st,
                                   const std::vector<Rational>& d, NodeId v) {
  Rational sum = 0;
  for (NodeId u : g.neighbors(v))
    if (st[u].live() && d[u] < MisConstants::light_threshold()) sum += st[u].p();
  return sum;
}

inline GoldenType classify_golden(const Graph& g, const std::vector<NodeMisState>& st,
                                  const std::vector<Rational>& d, NodeId v) {
  if (!st[v].live()) return GoldenType::not_golden;
  return classify_golden(st[v].p(), d[v], light_contribution(g, st, d, v));
}

/// Light neighbors in ascending ID order until their p-sum reaches 1/40; if
/// that overshoots 1/4 the last one alone is used (its p then exceeds 9/40).
inline std::vector<NodeId> select_W(std::vector<std::pair<NodeId, Rational>> light) {
  std::sort(light.begin(), light.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<NodeId> w;
  Rational sum = 0;
  for (const auto& [u, p] : light) {
    w.push_back(u);
    sum += p;
    if (sum >= MisConstants::w_low()) break;
  }
  if (sum < MisConstants::w_low()) throw InvariantError("light contribution below 1/40 for a type-2 node");
  if (sum > MisConstants::w_high()) {
    const auto& last = *std::find_if(light.begin(), light.end(), [&](const auto& e) { return e.first == w.back(); });
    if (last.second < MisConstants::w_low() || last.second > MisConstants::w_high())
      throw InvariantError("W fallback outside [1/40, 1/4]");
    return {w.back()};
  }
  return w;
}

struct GoldenNode {
  NodeId v = 0;
  GoldenType type = GoldenType::not_golden;
  std::vector<NodeId> w;  // type-2 only
  unsigned age = 0;       // before this phase
  Rational weight = 1;    // (1/(1-alpha))^age
};

/// Per-golden-node numerators of the conditional estimator over a shared
/// denominator (the number of consistent seeds).
struct ChiTerms {
  std::vector<std::int64_t> chi;
  // Seeds summed: live nodes marked with no marked live neighbor.
  std::int64_t joiners = 0;
  std::uint64_t denominator = 1;
};

/// One phase of the pairwise-independent MIS: golden classification, W
/// selection, and the age-weighted pessimistic estimator over seeds.
///
/// Per seed, a type-1 node v scores [m_v](1 - #marked N(v)); a type-2 node
/// scores the sum over u in W(v) of [m_u](1 - #marked N(u) - #marked W(v)\u).
/// Averaging over consistent seeds gives exactly the conditional form of the
/// joint-probability estimator, so the averaging law holds by linearity.
class MisPhase {
 public:
  MisPhase(const Graph& g, const std::vector<NodeMisState>& st, const std::vector<std::uint64_t>& hash_ids,
           const FamilyParams& fp, std::uint64_t matrix_cap_bits = CoinMatrix::kDefaultCapBits)
      : g_(&g), fp_(fp) {
    if (hash_ids.size() != g.size()) throw ParameterError("one hash id per node required");
    d_ = effective_degrees(g, st);
    index_.assign(g.size(), -1);
    std::vector<CoinMatrix::Entry> entries;
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!st[v].live()) continue;
      index_[v] = static_cast<int>(live_.size());
      live_.push_back(v);
      entries.push_back({hash_ids[v], st[v].p_exp});
    }
    coins_ = CoinMatrix(fp, entries, matrix_cap_bits);
    words_ = coins_.words();
    nbr_.assign(live_.size() * words_, 0);
    for (std::size_t i = 0; i < live_.size(); ++i)
      for (NodeId u : g.neighbors(live_[i]))
        if (index_[u] >= 0) set_bit(&nbr_[i * words_], static_cast<std::size_t>(index_[u]));

    for (NodeId v : live_) {
      const Rational lc = light_contribution(g, st, d_, v);
      GoldenType type = classify_golden(st[v].p(), d_[v], lc);
      if (type == GoldenType::not_golden) continue;
      GoldenNode gn;
      gn.v = v;
      gn.type = type;
      gn.age = st[v].age;
      gn.weight = pow(MisConstants::age_base(), st[v].age);
      if (type == GoldenType::type2) {
        std::vector<std::pair<NodeId, Rational>> light;
        for (NodeId u : g.neighbors(v))
          if (st[u].live() && d_[u] < MisConstants::light_threshold()) light.emplace_back(u, st[u].p());
        gn.w = select_W(std::move(light));
      }
      golden_.push_back(std::move(gn));
    }
    wmask_.assign(golden_.size() * words_, 0);
    for (std::size_t k = 0; k < golden_.size(); ++k)
      for (NodeId u : golden_[k].w) set_bit(&wmask_[k * words_], static_cast<std::size_t>(index_[u]));
    for (const auto& gn : golden_) weight_sum_ += gn.weight;
  }

  const FamilyParams& params() const noexcept { return fp_; }
  const std::vector<GoldenNode>& golden() const noexcept { return golden_; }
  const std::vector<NodeId>& live() const noexcept { return live_; }
  const std::vector<Rational>& degrees() const noexcept { return d_; }
  const Rational& weight_sum() const noexcept { return weight_sum_; }
  /// alpha * sum of weights: the certified lower bound on the unconditioned value.
  Rational certified_bound() const { return MisConstants::alpha() * weight_sum_; }

  bool marked(std::uint64_t seed, NodeId v) const {
    if (index_[v] < 0) return false;
    return coins_.entry(seed, static_cast<std::size_t>(index_[v]));
  }

  /// Unweighted per-golden-node scores at one seed.
  std::vector<std::int64_t> psi_at(std::uint64_t seed) const {
    std::vector<std::uint64_t> row(words_);
    coins_.row(seed, row.data());
    std::vector<std::int64_t> out(golden_.size());
    for (std::size_t k = 0; k < golden_.size(); ++k) out[k] = psi(row.data(), k);
    return out;
  }

  const ChiTerms& chi(const SeedAssignment& a) {
    const auto key = std::make_pair(a.prefix(), a.fixed());
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    ChiTerms terms;
    terms.chi.assign(golden_.size(), 0);
    terms.denominator = a.consistent_count();
    check_enumeration_budget(a);
    std::vector<std::uint64_t> row(words_);
    for (std::uint64_t r = 0; r < terms.denominator; ++r) {
      coins_.row(a.consistent_seed(r), row.data());
      for (std::size_t k = 0; k < golden_.size(); ++k) terms.chi[k] += psi(row.data(), k);
      for (std::size_t i = 0; i < live_.size(); ++i)
        if (get_bit(row.data(), i) && marked_in(row.data(), &nbr_[i * words_]) == 0) ++terms.joiners;
    }
    return memo_.emplace(key, std::move(terms)).first->second;
  }

  /// Conditional value of a single golden node's weighted term.
  Rational weighted_term(const SeedAssignment& a, std::size_t k) {
    const auto& t = chi(a);
    return golden_[k].weight * Rational(t.chi[k]) / Rational(BigInt(t.denominator));
  }

  Rational value(const SeedAssignment& a) {
    const auto& t = chi(a);
    Rational sum = 0;
    for (std::size_t k = 0; k < golden_.size(); ++k) {
      if (t.chi[k] != 0) sum += golden_[k].weight * Rational(t.chi[k]);
    }
    return sum / Rational(BigInt(t.denominator));
  }

  /// Conditional expected number of nodes that join.
  Rational expected_joiners(const SeedAssignment& a) {
    const auto& t = chi(a);
    return Rational(t.joiners) / Rational(BigInt(t.denominator));
  }

  /// Maximizing estimator; the threshold alpha * sum(weights) doubles as the
  /// per-phase certification. Exact ties are broken by expected joiners so
  /// phases without golden nodes still make progress.
  Estimator estimator() {
    Estimator e;
    e.direction = Direction::maximize;
    e.threshold = certified_bound();
    e.evaluate = [this](const SeedAssignment& a) { return value(a); };
    e.tiebreak = [this](const SeedAssignment& a) { return expected_joiners(a); };
    return e;
  }

 private:
  static void set_bit(std::uint64_t* words, std::size_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }
  static bool get_bit(const std::uint64_t* words, std::size_t i) { return ((words[i / 64] >> (i % 64)) & 1U) != 0; }

  std::int64_t marked_in(const std::uint64_t* row, const std::uint64_t* mask) const {
    std::int64_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += std::popcount(row[w] & mask[w]);
    return c;
  }

  std::int64_t psi(const std::uint64_t* row, std::size_t k) const {
    const auto& gn = golden_[k];
    if (gn.type == GoldenType::type1) {
      const auto i = static_cast<std::size_t>(index_[gn.v]);
      if (!get_bit(row, i)) return 0;
      return 1 - marked_in(row, &nbr_[i * words_]);
    }
    const std::int64_t in_w = marked_in(row, &wmask_[k * words_]);
    std::int64_t s = 0;
    for (NodeId u : gn.w) {
      const auto i = static_cast<std::size_t>(index_[u]);
      if (!get_bit(row, i)) continue;
      s += 1 - marked_in(row, &nbr_[i * words_]) - (in_w - 1);
    }
    return s;
  }

  const Graph* g_;
  FamilyParams fp_;
  std::vector<Rational> d_;
  std::vector<int> index_;
  std::vector<NodeId> live_;
  CoinMatrix coins_{FamilyParams{}, {}};
  std::size_t words_ = 1;
  std::vector<std::uint64_t> nbr_;
  std::vector<std::uint64_t> wmask_;
  std::vector<GoldenNode> golden_;
  Rational weight_sum_ = 0;
  std::map<std::pair<std::uint64_t, unsigned>, ChiTerms> memo_;
};

struct PhaseOutcome {
  std::vector<NodeId> joined;
  std::vector<NodeId> removed;
};

/// Applies one phase given the marks: a marked node with no marked live
/// neighbor joins, its live neighbors are removed, and survivors update p
/// from the phase's effective degree. Charges the mark exchange and the
/// join notification when a network is supplied.
inline PhaseOutcome simulate_phase(const Graph& g, std::vector<NodeMisState>& st, const std::vector<bool>& marks,
                                   unsigned max_exp, Network* net = nullptr) {
  const auto d = effective_degrees(g, st);
  PhaseOutcome out;
  if (net != nullptr) {
    std::vector<Message> msgs;
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!st[v].live()) continue;
      for (NodeId u : g.neighbors(v))
        if (st[u].live()) msgs.push_back({v, u, Payload::of_uint(marks[v] ? 1 : 0, 1)});
    }
    net->exchange(std::move(msgs));
  }
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!st[v].live() || !marks[v]) continue;
    auto nb = g.neighbors(v);
    if (std::none_of(nb.begin(), nb.end(), [&](NodeId u) { return st[u].live() && marks[u]; }))
      out.joined.push_back(v);
  }
  std::vector<Message> notes;
  for (NodeId v : out.joined) {
    st[v].status = MisStatus::in_mis;
    for (NodeId u : g.neighbors(v)) {
      if (net != nullptr) notes.push_back({v, u, Payload::of_uint(1, 1)});
    }
  }
  if (net != nullptr) {
    // Only live neighbors listen; decided ones already left the computation.
    std::erase_if(notes, [&](const Message& m) { return st[m.to].status != MisStatus::undecided; });
    net->exchange(std::move(notes));
  }
  for (NodeId v : out.joined) {
    for (NodeId u : g.neighbors(v)) {
      if (st[u].status == MisStatus::undecided) {
        st[u].status = MisStatus::removed;
        out.removed.push_back(u);
      }
    }
  }
  std::sort(out.removed.begin(), out.removed.end());
  for (NodeId v = 0; v < g.size(); ++v)
    if (st[v].live()) st[v].p_exp = update_probability(st[v], d[v], max_exp);
  return out;
}

/// Marks of live nodes under a fully fixed seed.
inline std::vector<bool> marks_from_seed(const FamilyParams& fp, std::uint64_t seed,
                                         const std::vector<NodeMisState>& st,
                                         const std::vector<std::uint64_t>& hash_ids) {
  std::vector<bool> m(st.size(), false);
  for (std::size_t v = 0; v < st.size(); ++v)
    if (st[v].live()) m[v] = coin(fp, seed, hash_ids[v], st[v].p_exp);
  return m;
}

}  // namespace dlocal
