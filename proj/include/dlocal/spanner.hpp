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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dlocal/derand.hpp"
#include "dlocal/errors.hpp"
#include "dlocal/graph.hpp"
#include "dlocal/hashfam.hpp"
#include "dlocal/rational.hpp"
#include "dlocal/sim.hpp"

namespace dlocal {

/// Natural log rounded up to four decimals.
inline Rational ln_upper(double x) {
  return Rational(static_cast<long long>(std::ceil(std::log(x) * 10000.0)), 10000);
}

/// Thresholds of the two bad events. Cluster-count limits are exact: the
/// event |C_i| >= X * n^{1-i/k} is tested as |C_i|^k >= X^k * n^{k-i}.
struct SpannerConstants {
  std::size_t n = 1;
  unsigned k = 1;
  Rational xi = 0;
  unsigned cluster_exp = 0;        // clusters survive with probability 2^-cluster_exp
  std::uint64_t edge_cap = 0;      // ceil(2 n^{1/k} log2 n), scaled by cap_factor
  std::vector<std::uint64_t> limit;  // limit[i]: smallest |C_i| that is a bad event

  static SpannerConstants make(std::size_t n, unsigned k, const Rational& xi_factor = 1,
                               const Rational& cap_factor = 1) {
    if (k < 1) throw ParameterError("stretch parameter k must be >= 1");
    if (n < 1) throw ParameterError("graph must have at least one node");
    if (xi_factor <= 0 || cap_factor <= 0) throw ParameterError("threshold factors must be positive");
    SpannerConstants c;
    c.n = n;
    c.k = k;
    c.xi = Rational(279, 200) * 2 * ln_upper(2.0 * static_cast<double>(n));
    while ((std::uint64_t{1} << (c.cluster_exp * k)) < n) ++c.cluster_exp;
    const long double cap = static_cast<long double>(cap_factor.convert_to<double>()) * 2.0L *
                            std::pow(static_cast<long double>(n), 1.0L / k) * std::log2(static_cast<long double>(n));
    c.edge_cap = static_cast<std::uint64_t>(std::ceil(cap));
    c.limit.assign(k, n + 1);
    for (unsigned i = 1; i < k; ++i) {
      const Rational x = c.xi * xi_factor * c.alpha(i);
      const Rational rhs = pow(x, k) * pow(Rational(static_cast<long long>(n)), k - i);
      for (std::uint64_t cnt = 0; cnt <= n; ++cnt) {
        if (pow(Rational(static_cast<long long>(cnt)), k) >= rhs) {
          c.limit[i] = cnt;
          break;
        }
      }
    }
    return c;
  }

  /// prod_{j=1}^{i} (1 + 1/(k-j)); defined for i < k.
  Rational alpha(unsigned i) const {
    if (i >= k) throw ParameterError("alpha_i needs i < k");
    Rational a = 1;
    for (unsigned j = 1; j <= i; ++j) a *= 1 + Rational(1, static_cast<long long>(k - j));
    return a;
  }

  bool too_many_clusters(std::uint64_t count, unsigned i) const { return i < k && count >= limit.at(i); }
};

/// Clustering at the start of an iteration plus the growing spanner.
/// Cluster IDs are leader IDs.
struct SpannerState {
  unsigned i = 0;
  std::vector<std::optional<NodeId>> cluster;
  std::vector<bool> residual;  // E' by edge index
  std::vector<bool> in_h;
  std::vector<std::size_t> added;  // per-node additions in the last iteration

  static SpannerState initial(const Graph& g) {
    SpannerState s;
    s.cluster.resize(g.size());
    for (NodeId v = 0; v < g.size(); ++v) s.cluster[v] = v;
    s.residual.assign(g.edge_count(), true);
    s.in_h.assign(g.edge_count(), false);
    s.added.assign(g.size(), 0);
    return s;
  }

  /// Sorted IDs of the current clusters.
  std::vector<NodeId> clusters() const {
    std::vector<NodeId> out;
    for (const auto& c : cluster)
      if (c) out.push_back(*c);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  SpannerEdges spanner(const Graph& g) const { return SpannerEdges::from_mask(g, in_h); }
};

/// v's lightest residual edge into each current cluster, ordered by
/// (weight, cluster ID). Entries are (cluster, edge index).
inline std::vector<std::pair<NodeId, std::size_t>> lightest_edges(const Graph& g, const SpannerState& s, NodeId v) {
  std::map<NodeId, std::size_t> best;
  for (std::size_t ei : g.incident_edges(v)) {
    if (!s.residual[ei]) continue;
    const auto& e = g.edge(ei);
    const NodeId u = e.u == v ? e.v : e.u;
    if (!s.cluster[u]) continue;
    auto [it, fresh] = best.emplace(*s.cluster[u], ei);
    if (!fresh) {
      const auto& cur = g.edge(it->second);
      const NodeId cu = cur.u == v ? cur.v : cur.u;
      if (e.w < cur.w || (e.w == cur.w && u < cu)) it->second = ei;
    }
  }
  std::vector<std::pair<NodeId, std::size_t>> out(best.begin(), best.end());
  std::stable_sort(out.begin(), out.end(),
                   [&](const auto& a, const auto& b) { return g.edge(a.second).w < g.edge(b.second).w; });
  return out;
}

/// Survival of each current cluster, indexed by cluster ID. The last
/// iteration keeps nothing whatever the coins say.
template <class CoinFn>
std::vector<bool> sample_clusters(const SpannerState& s, unsigned k, CoinFn&& coin_of) {
  if (s.i >= k) throw ParameterError("all " + std::to_string(k) + " iterations already ran");
  std::vector<bool> sampled(s.cluster.size(), false);
  if (s.i + 1 == k) return sampled;
  for (NodeId c : s.clusters()) sampled[c] = coin_of(c);
  return sampled;
}

/// One clustering iteration. Every node whose cluster was not sampled walks
/// its lightest edges in ascending order, adds each one, drops the residual
/// edges into that cluster, and stops at the first sampled cluster, which it
/// joins. All lists are taken from the state at the start of the iteration.
inline void bs_iteration(const Graph& g, SpannerState& s, const std::vector<bool>& sampled) {
  const SpannerState before = s;
  std::fill(s.added.begin(), s.added.end(), 0);
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!before.cluster[v]) continue;
    if (sampled[*before.cluster[v]]) continue;
    s.cluster[v].reset();
    for (const auto& [c, ei] : lightest_edges(g, before, v)) {
      s.in_h[ei] = true;
      s.added[v] += 1;
      for (std::size_t ej : g.incident_edges(v)) {
        const auto& e = g.edge(ej);
        const NodeId u = e.u == v ? e.v : e.u;
        if (before.cluster[u] == c) s.residual[ej] = false;
      }
      if (sampled[c]) {
        s.cluster[v] = c;
        break;
      }
    }
  }
  s.i += 1;
}

/// Psi = [too many clusters survive] + sum_v [v adds more than edge_cap
/// edges], averaged over the seeds consistent with a partial assignment.
class SpannerEstimator {
 public:
  SpannerEstimator(const Graph& g, const SpannerState& s, const SpannerConstants& sc, const FamilyParams& fp,
                   std::uint64_t matrix_cap_bits = CoinMatrix::kDefaultCapBits)
      : fp_(fp), iteration_(s.i + 1), cap_(sc.edge_cap), cluster_exp_(sc.cluster_exp) {
    if (iteration_ >= sc.k) throw ParameterError("the last iteration has no randomness to fix");
    limit_ = sc.limit[iteration_];
    clusters_ = s.clusters();
    std::vector<int> pos(g.size(), -1);
    std::vector<CoinMatrix::Entry> entries;
    for (std::size_t q = 0; q < clusters_.size(); ++q) {
      pos[clusters_[q]] = static_cast<int>(q);
      entries.push_back({clusters_[q], sc.cluster_exp});
    }
    coins_ = CoinMatrix(fp, entries, matrix_cap_bits);
    words_ = coins_.words();
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!s.cluster[v]) continue;
      const auto l = lightest_edges(g, s, v);
      if (l.size() <= cap_) continue;  // v can never add more than cap edges
      Walker w;
      w.v = v;
      w.own = static_cast<std::size_t>(pos[*s.cluster[v]]);
      for (const auto& [c, ei] : l) w.order.push_back(static_cast<std::size_t>(pos[c]));
      walkers_.push_back(std::move(w));
    }
  }

  unsigned iteration() const noexcept { return iteration_; }
  const std::vector<NodeId>& clusters() const noexcept { return clusters_; }
  const FamilyParams& params() const noexcept { return fp_; }

  /// Number of clusters that survive under a full seed.
  std::uint64_t survivors(std::uint64_t seed) const {
    std::vector<std::uint64_t> row(words_);
    coins_.row(seed, row.data());
    std::uint64_t c = 0;
    for (auto w : row) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  /// Psi at a full seed; walker contributions are reported in node order.
  std::int64_t psi_at(std::uint64_t seed, std::vector<std::pair<NodeId, bool>>* per_node = nullptr) const {
    std::vector<std::uint64_t> row(words_);
    coins_.row(seed, row.data());
    return psi(row.data(), per_node);
  }

  struct Terms {
    std::int64_t bad_a = 0;
    std::vector<std::int64_t> bad_v;  // by walker
    std::int64_t spread = 0;          // sum of (survivors * 2^j - q)^2
    std::uint64_t denominator = 1;
  };

  const Terms& terms(const SeedAssignment& a) {
    const auto key = std::make_pair(a.prefix(), a.fixed());
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    check_enumeration_budget(a);
    Terms t;
    t.bad_v.assign(walkers_.size(), 0);
    t.denominator = a.consistent_count();
    std::vector<std::uint64_t> row(words_);
    const auto q = static_cast<std::int64_t>(clusters_.size());
    for (std::uint64_t r = 0; r < t.denominator; ++r) {
      coins_.row(a.consistent_seed(r), row.data());
      std::int64_t alive = 0;
      for (auto w : row) alive += std::popcount(w);
      if (static_cast<std::uint64_t>(alive) >= limit_) ++t.bad_a;
      for (std::size_t k = 0; k < walkers_.size(); ++k) t.bad_v[k] += walker_bad(row.data(), walkers_[k]);
      const std::int64_t dev = alive * (std::int64_t{1} << cluster_exp_) - q;
      t.spread += dev * dev;
    }
    return memo_.emplace(key, std::move(t)).first->second;
  }

  Rational value(const SeedAssignment& a) {
    const auto& t = terms(a);
    std::int64_t sum = t.bad_a;
    for (auto b : t.bad_v) sum += b;
    return Rational(sum) / Rational(BigInt(t.denominator));
  }

  /// Conditional mean squared distance of the survivor count from its
  /// expectation, in units of 2^-j.
  Rational spread(const SeedAssignment& a) {
    const auto& t = terms(a);
    return Rational(t.spread) / Rational(BigInt(t.denominator));
  }

  /// Conditional probability numerators of each node's bad event (nodes that
  /// can never exceed the cap are omitted).
  std::vector<std::pair<NodeId, std::int64_t>> node_terms(const SeedAssignment& a) {
    const auto& t = terms(a);
    std::vector<std::pair<NodeId, std::int64_t>> out;
    for (std::size_t k = 0; k < walkers_.size(); ++k) out.emplace_back(walkers_[k].v, t.bad_v[k]);
    return out;
  }

  /// Minimizing estimator that must stay below 1. Exact ties prefer a
  /// survivor count close to its mean.
  Estimator estimator() {
    Estimator e;
    e.direction = Direction::minimize;
    e.threshold = Rational(1);
    e.evaluate = [this](const SeedAssignment& a) { return value(a); };
    e.tiebreak = [this](const SeedAssignment& a) { return -spread(a); };
    return e;
  }

 private:
  struct Walker {
    NodeId v = 0;
    std::size_t own = 0;
    std::vector<std::size_t> order;
  };

  static bool bit(const std::uint64_t* row, std::size_t i) { return ((row[i / 64] >> (i % 64)) & 1U) != 0; }

  std::int64_t walker_bad(const std::uint64_t* row, const Walker& w) const {
    if (bit(row, w.own)) return 0;
    std::uint64_t adds = 0;
    for (std::size_t c : w.order) {
      ++adds;
      if (bit(row, c)) break;
    }
    return adds > cap_ ? 1 : 0;
  }

  std::int64_t psi(const std::uint64_t* row, std::vector<std::pair<NodeId, bool>>* per_node) const {
    std::int64_t alive = 0;
    for (std::size_t w = 0; w < words_; ++w) alive += std::popcount(row[w]);
    std::int64_t sum = static_cast<std::uint64_t>(alive) >= limit_ ? 1 : 0;
    for (const auto& w : walkers_) {
      const auto b = walker_bad(row, w);
      if (per_node) per_node->emplace_back(w.v, b != 0);
      sum += b;
    }
    return sum;
  }

  FamilyParams fp_;
  unsigned iteration_ = 1;
  std::uint64_t limit_ = 0;
  std::uint64_t cap_ = 0;
  unsigned cluster_exp_ = 0;
  std::vector<NodeId> clusters_;
  CoinMatrix coins_{FamilyParams{}, {}};
  std::size_t words_ = 1;
  std::vector<Walker> walkers_;
  std::map<std::pair<std::uint64_t, unsigned>, Terms> memo_;
};

struct SpannerConfig {
  unsigned k = 2;
  std::optional<unsigned> d;  // independence; default 2*ceil(log2 2n) capped to fit t_max
  unsigned t_max = 18;
  bool strict_k = true;        // require k <= 0.5 * log2 n
  Rational xi_factor = 1;      // scales the cluster-count threshold
  Rational cap_factor = 1;     // scales the per-node edge cap
  std::optional<Rational> c_size;  // when set, |H| <= c_size * k * n^{1+1/k} * log2 n is asserted
  unsigned c_bandwidth = 8;
  std::uint64_t rng_seed = 1;
  bool record_traces = false;
};

struct SpannerIterationRecord {
  unsigned iteration = 0;
  std::size_t clusters_before = 0;
  std::size_t clusters_after = 0;
  std::uint64_t cluster_limit = 0;
  std::size_t max_additions = 0;
  std::uint64_t edge_cap = 0;
  std::size_t edges_after = 0;
  std::optional<Rational> initial_psi;
  std::optional<Rational> final_psi;
  std::string seed;
  nlohmann::ordered_json trace;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["iteration"] = iteration;
    j["clusters_before"] = clusters_before;
    j["clusters_after"] = clusters_after;
    j["cluster_limit"] = cluster_limit;
    j["max_additions"] = max_additions;
    j["edge_cap"] = edge_cap;
    j["edges_after"] = edges_after;
    if (initial_psi) j["initial_psi"] = to_fraction_string(*initial_psi);
    if (final_psi) j["final_psi"] = to_fraction_string(*final_psi);
    if (!seed.empty()) j["seed"] = seed;
    if (!trace.is_null()) j["trace"] = trace;
    return j;
  }
};

struct SpannerResult {
  SpannerEdges edges;
  RunMetrics metrics;
  SpannerConstants constants;
  unsigned d = 0;
  std::vector<SpannerIterationRecord> iterations;
};

namespace detail {

inline void check_spanner_k(const Graph& g, const SpannerConfig& cfg) {
  if (cfg.k < 1) throw ParameterError("stretch parameter k must be >= 1");
  if (cfg.strict_k && cfg.k > 1) {
    // k <= 0.5 log2 n  <=>  4^k <= n
    if (2 * cfg.k >= 64 || (std::uint64_t{1} << (2 * cfg.k)) > g.size())
      throw ParameterError("k=" + std::to_string(cfg.k) + " exceeds 0.5*log2(n) for n=" + std::to_string(g.size()) +
                           "; pass a smaller k or disable the strict k check");
  }
}

inline unsigned spanner_gamma(std::size_t n) { return std::max(1U, ceil_log2(n)); }

inline unsigned default_spanner_d(std::size_t n, unsigned m, unsigned t_max) {
  const unsigned by_n = 2 * std::max(1U, ceil_log2(2 * n));
  return std::max(2U, std::min(by_n, t_max / m));
}

inline FamilyParams spanner_family(std::size_t n, const SpannerConstants& sc, const SpannerConfig& cfg, unsigned* d_out) {
  const unsigned gamma = spanner_gamma(n);
  const unsigned beta = std::max(1U, sc.cluster_exp);
  const unsigned m = std::max(gamma, beta);
  const unsigned d = cfg.d ? *cfg.d : default_spanner_d(n, m, cfg.t_max);
  *d_out = d;
  return FamilyParams::make(gamma, beta, d, cfg.t_max);
}

// Every node tells its neighbors which cluster it belongs to.
inline void exchange_clusters(Network& net, const Graph& g, const SpannerState& s) {
  const unsigned bits = spanner_gamma(g.size()) + 1;
  std::vector<Message> msgs;
  for (NodeId v = 0; v < g.size(); ++v) {
    Payload pl = Payload::of_uint(s.cluster[v] ? 1 : 0, 1);
    pl.append_uint(s.cluster[v].value_or(0), bits - 1);
    for (NodeId u : g.neighbors(v)) msgs.push_back({v, u, pl});
  }
  net.exchange(std::move(msgs));
}

// Leaders tell their members whether the cluster survived; movers tell
// their new leader and the neighbors whose edges they dropped.
inline void exchange_outcome(Network& net, const Graph& g, const SpannerState& before, const SpannerState& after,
                             const std::vector<bool>& sampled) {
  std::vector<Message> notify;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!before.cluster[v] || *before.cluster[v] == v) continue;
    notify.push_back({*before.cluster[v], v, Payload::of_uint(sampled[*before.cluster[v]] ? 1 : 0, 1)});
  }
  net.exchange(std::move(notify));
  std::vector<Message> moves;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!before.cluster[v] || sampled[*before.cluster[v]]) continue;
    std::vector<bool> told(g.size(), false);
    if (after.cluster[v] && *after.cluster[v] != v) {
      moves.push_back({v, *after.cluster[v], Payload::of_uint(1, 1)});
      told[*after.cluster[v]] = true;
    }
    for (std::size_t ei : g.incident_edges(v)) {
      const auto& e = g.edge(ei);
      const NodeId u = e.u == v ? e.v : e.u;
      if (before.residual[ei] && !after.residual[ei] && !told[u]) {
        moves.push_back({v, u, Payload::of_uint(0, 1)});
        told[u] = true;
      }
    }
  }
  net.exchange(std::move(moves));
}

inline SpannerIterationRecord iteration_record(const Graph& g, const SpannerState& before, const SpannerState& after,
                                               const SpannerConstants& sc) {
  SpannerIterationRecord r;
  r.iteration = after.i;
  r.clusters_before = before.clusters().size();
  r.clusters_after = after.clusters().size();
  r.cluster_limit = after.i < sc.k ? sc.limit[after.i] : 0;
  r.max_additions = after.added.empty() ? 0 : *std::max_element(after.added.begin(), after.added.end());
  r.edge_cap = sc.edge_cap;
  r.edges_after = static_cast<std::size_t>(std::count(after.in_h.begin(), after.in_h.end(), true));
  (void)g;
  return r;
}

inline void check_size(const Graph& g, const SpannerConfig& cfg, std::size_t edges) {
  if (!cfg.c_size) return;
  const long double n = static_cast<long double>(g.size());
  const long double bound = static_cast<long double>(cfg.c_size->convert_to<double>()) * cfg.k *
                            std::pow(n, 1.0L + 1.0L / cfg.k) * std::max(1.0L, std::log2(n));
  if (static_cast<long double>(edges) > bound)
    throw BoundViolation("spanner has " + std::to_string(edges) + " edges, above the size bound " +
                         std::to_string(static_cast<double>(bound)));
}

}  // namespace detail

/// Randomized clustering spanner: clusters survive on independent coins.
inline SpannerResult rand_spanner(const Graph& g, const SpannerConfig& cfg = {}) {
  detail::check_spanner_k(g, cfg);
  SpannerResult res;
  res.constants = SpannerConstants::make(g.size(), cfg.k, cfg.xi_factor, cfg.cap_factor);
  Network net(g, CostModel::make(ModelKind::clique, g.size(), cfg.c_bandwidth));
  std::mt19937_64 rng(cfg.rng_seed);
  const unsigned j = res.constants.cluster_exp;
  auto s = SpannerState::initial(g);
  while (s.i < cfg.k) {
    detail::exchange_clusters(net, g, s);
    auto sampled = sample_clusters(s, cfg.k, [&](NodeId) { return j == 0 || (rng() >> (64 - j)) == 0; });
    const SpannerState before = s;
    bs_iteration(g, s, sampled);
    detail::exchange_outcome(net, g, before, s, sampled);
    res.iterations.push_back(detail::iteration_record(g, before, s, res.constants));
  }
  res.edges = s.spanner(g);
  res.metrics = net.metrics();
  return res;
}

/// Deterministic spanner in the congested clique. Iterations 1..k-1 fix a
/// d-wise independent seed in blocks of floor(log2 n) bits, keeping Psi < 1,
/// so neither bad event happens; the last iteration is forced.
inline SpannerResult det_spanner(const Graph& g, const SpannerConfig& cfg = {}) {
  detail::check_spanner_k(g, cfg);
  SpannerResult res;
  const auto& sc = res.constants = SpannerConstants::make(g.size(), cfg.k, cfg.xi_factor, cfg.cap_factor);
  Network net(g, CostModel::make(ModelKind::clique, g.size(), cfg.c_bandwidth));
  const NodeId leader = 0;
  const unsigned z = std::max(1U, floor_log2(g.size()));
  const std::size_t evaluators = std::max<std::size_t>(2, g.size());
  auto s = SpannerState::initial(g);
  std::optional<FamilyParams> fp;
  if (cfg.k > 1 && g.size() > 1) fp = detail::spanner_family(g.size(), sc, cfg, &res.d);

  while (s.i < cfg.k) {
    detail::exchange_clusters(net, g, s);
    const SpannerState before = s;
    SpannerIterationRecord rec;
    std::vector<bool> sampled;
    if (s.i + 1 < cfg.k && fp) {
      SpannerEstimator est(g, s, sc, *fp);
      // Leaders announce their clusters so every evaluator knows the clustering.
      std::vector<Message> announce;
      for (NodeId c : est.clusters())
        for (NodeId u = 0; u < g.size(); ++u)
          if (u != c) announce.push_back({c, u, Payload::of_uint(1, 1)});
      net.exchange(std::move(announce));

      auto run = run_to_completion(est.estimator(), *fp, Schedule::blockwise(z, evaluators), [&](const DerandStep& step) {
        const auto parent = parent_assignment(step);
        const std::uint64_t cands = std::uint64_t{1} << step.block;
        std::vector<Message> fan;
        std::vector<std::vector<std::pair<NodeId, std::int64_t>>> per_cand;
        for (std::uint64_t tau = 0; tau < cands; ++tau)
          per_cand.push_back(est.node_terms(parent.extend_block(tau, step.block)));
        for (std::size_t w = 0; w < (per_cand.empty() ? 0 : per_cand[0].size()); ++w) {
          const NodeId v = per_cand[0][w].first;
          for (std::uint64_t tau = 0; tau < cands; ++tau) {
            if (tau == v) continue;
            Payload pl;
            pl.append_int(per_cand[tau][w].second);
            fan.push_back({v, static_cast<NodeId>(tau), std::move(pl)});
          }
        }
        net.exchange(std::move(fan));
        std::vector<Message> report;
        for (std::uint64_t tau = 0; tau < cands; ++tau) {
          if (tau == leader) continue;
          Payload pl;
          pl.append_rational(step.candidates[tau]);
          report.push_back({static_cast<NodeId>(tau), leader, std::move(pl)});
        }
        net.exchange(std::move(report));
        net.broadcast_from_leader(leader, Payload::of_uint(step.chosen, step.block));
      });
      const std::uint64_t seed = run.chosen.seed();
      sampled = sample_clusters(s, cfg.k, [&](NodeId c) { return coin(*fp, seed, c, sc.cluster_exp); });
      bs_iteration(g, s, sampled);
      rec = detail::iteration_record(g, before, s, sc);
      rec.initial_psi = run.initial_value;
      rec.final_psi = run.final_value;
      rec.seed = run.chosen.to_string();
      if (cfg.record_traces) rec.trace = run.trace_json();
      if (sc.too_many_clusters(rec.clusters_after, s.i))
        throw InvariantError("iteration " + std::to_string(s.i) + " kept " + std::to_string(rec.clusters_after) +
                             " clusters despite Psi < 1");
      if (rec.max_additions > sc.edge_cap)
        throw InvariantError("a node added " + std::to_string(rec.max_additions) + " edges despite Psi < 1");
    } else {
      sampled = sample_clusters(s, cfg.k, [](NodeId) { return true; });
      bs_iteration(g, s, sampled);
      rec = detail::iteration_record(g, before, s, sc);
    }
    detail::exchange_outcome(net, g, before, s, sampled);
    res.iterations.push_back(std::move(rec));
  }
  res.edges = s.spanner(g);
  detail::check_size(g, cfg, res.edges.size());
  res.metrics = net.metrics();
  return res;
}

}  // namespace dlocal
