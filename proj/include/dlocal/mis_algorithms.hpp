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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlocal/derand.hpp"
#include "dlocal/graph.hpp"
#include "dlocal/mis.hpp"
#include "dlocal/sim.hpp"

namespace dlocal {

struct MisConfig {
  double c_prime = 50;     // phase budget factor
  double c_gold = 1;       // age-bound threshold factor on ceil(log2 Delta)
  double c_edge = 4;       // residual edges allowed at handoff, per node
  double c_delta = 1;      // bounded-degree gate: Delta^3 <= c_delta * n
  unsigned t_max = 26;     // largest enumerable seed
  unsigned c_bandwidth = 8;
  std::uint64_t route_rounds = 2;
  ModelKind model = ModelKind::clique;
  std::uint64_t rng_seed = 1;
  bool record_traces = false;
};

struct MisPhaseRecord {
  std::size_t phase = 0;
  std::size_t undecided = 0;
  std::size_t type1 = 0;
  std::size_t type2 = 0;
  unsigned seed_bits = 0;
  std::string seed;
  Rational initial_value = 0;
  Rational final_value = 0;
  Rational certified_bound = 0;
  std::size_t joined = 0;
  std::size_t removed = 0;
  nlohmann::ordered_json trace;

  bool certified() const { return initial_value >= certified_bound; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["phase"] = phase;
    j["undecided"] = undecided;
    j["golden_type1"] = type1;
    j["golden_type2"] = type2;
    j["seed_bits"] = seed_bits;
    j["seed"] = seed;
    j["initial_value"] = to_fraction_string(initial_value);
    j["final_value"] = to_fraction_string(final_value);
    j["certified_bound"] = to_fraction_string(certified_bound);
    j["certified"] = certified();
    j["joined"] = joined;
    j["removed"] = removed;
    if (!trace.is_null()) j["trace"] = trace;
    return j;
  }
};

struct MisResult {
  NodeSet mis;
  RunMetrics metrics;
  std::vector<MisPhaseRecord> phases;
  std::size_t phase_budget = 0;
  std::size_t undecided_at_handoff = 0;
  std::size_t residual_edges = 0;
  std::vector<std::string> violations;
};

namespace detail {

inline unsigned log_delta(const Graph& g) { return std::max(1U, ceil_log2(g.max_degree())); }

inline std::size_t clique_phase_budget(const Graph& g, const MisConfig& cfg) {
  return static_cast<std::size_t>(std::ceil(cfg.c_prime * log_delta(g)));
}

inline unsigned max_exponent(const MisConfig& cfg) { return cfg.t_max / 2; }

/// Pairwise family for one phase: gamma covers the IDs, beta the smallest
/// live probability.
inline FamilyParams phase_family(std::size_t id_space, const std::vector<NodeMisState>& st, unsigned t_max) {
  unsigned beta = MisConstants::p0_exponent;
  for (const auto& s : st)
    if (s.live()) beta = std::max(beta, s.p_exp);
  return FamilyParams::make(std::max(1U, ceil_log2(id_space)), beta, 2, t_max);
}

inline void exchange_state(Network& net, const Graph& g, const std::vector<NodeMisState>& st, unsigned max_exp) {
  const unsigned width = std::max(1U, ceil_log2(max_exp + 1));
  std::vector<Message> p_msgs;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!st[v].live()) continue;
    for (NodeId u : g.neighbors(v))
      if (st[u].live()) p_msgs.push_back({v, u, Payload::of_uint(st[v].p_exp, width)});
  }
  net.exchange(std::move(p_msgs));
}

inline void exchange_degrees(Network& net, const Graph& g, const std::vector<NodeMisState>& st,
                             const std::vector<Rational>& d) {
  std::vector<Message> msgs;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!st[v].live()) continue;
    Payload pl;
    pl.append_rational(d[v]);
    for (NodeId u : g.neighbors(v))
      if (st[u].live()) msgs.push_back({v, u, pl});
  }
  net.exchange(std::move(msgs));
}

inline std::size_t live_degree(const Graph& g, const std::vector<NodeMisState>& st, NodeId v) {
  std::size_t c = 0;
  for (NodeId u : g.neighbors(v)) c += st[u].live() ? 1 : 0;
  return c;
}

/// Every live node sends its (m, M) counts for both candidate bits to its
/// live neighbors, sized for the worst case of the remaining free bits.
inline void exchange_counts(Network& net, const Graph& g, const std::vector<NodeMisState>& st, unsigned free_bits) {
  std::vector<Message> msgs;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!st[v].live()) continue;
    const std::size_t width = free_bits + 1 + ceil_log2(live_degree(g, st, v) + 1);
    for (NodeId u : g.neighbors(v))
      if (st[u].live()) msgs.push_back({v, u, Payload::of_bits(4 * width)});
  }
  net.exchange(std::move(msgs));
}

inline Payload chi_payload(std::int64_t chi0, std::int64_t chi1, unsigned age) {
  Payload pl;
  pl.append_int(chi0).append_int(chi1).append_uint(age, std::max(1U, ceil_log2(age + 1)));
  return pl;
}

inline void termination_check(Network& net, const std::vector<NodeMisState>& st, NodeId leader) {
  std::vector<std::pair<NodeId, Rational>> flags;
  for (NodeId v = 0; v < st.size(); ++v) flags.emplace_back(v, st[v].live() ? 1 : 0);
  net.convergecast_sum(leader, flags);
}

inline std::size_t residual_edges(const Graph& g, const std::vector<NodeMisState>& st) {
  std::size_t c = 0;
  for (const auto& e : g.edges()) c += (st[e.u].live() && st[e.v].live()) ? 1 : 0;
  return c;
}

inline unsigned age_threshold(const Graph& g, const MisConfig& cfg) {
  return static_cast<unsigned>(std::ceil(cfg.c_gold * ceil_log2(g.max_degree())));
}

/// Leader collection: undecided IDs and residual edges go to node 0, which
/// runs greedy ascending-ID MIS on them and returns the membership.
inline void leader_finish(Network& net, const Graph& g, std::vector<NodeMisState>& st, const MisConfig& cfg,
                          MisResult& res) {
  const NodeId leader = 0;
  std::vector<NodeId> undecided;
  for (NodeId v = 0; v < g.size(); ++v)
    if (st[v].live()) undecided.push_back(v);
  res.undecided_at_handoff = undecided.size();
  res.residual_edges = residual_edges(g, st);
  if (undecided.empty()) return;

  const unsigned gate = age_threshold(g, cfg);
  for (NodeId v : undecided) {
    if (st[v].age < gate) {
      res.violations.push_back("age bound: node " + std::to_string(v) + " undecided with age " +
                               std::to_string(st[v].age) + " < " + std::to_string(gate));
      break;
    }
  }
  const double edge_cap = cfg.c_edge * static_cast<double>(g.size());
  if (static_cast<double>(res.residual_edges) > edge_cap)
    res.violations.push_back("handoff bound: " + std::to_string(res.residual_edges) + " residual edges > " +
                             std::to_string(cfg.c_edge) + "*n");

  const unsigned id_bits = std::max(1U, ceil_log2(g.size()));
  // Each node reports its own ID (if undecided) and residual edges it owns
  // as the lower endpoint.
  std::vector<std::vector<Payload>> outbox(g.size());
  for (NodeId v : undecided)
    if (v != leader) outbox[v].push_back(Payload::of_uint(v, id_bits));
  for (const auto& e : g.edges()) {
    if (!st[e.u].live() || !st[e.v].live() || e.u == leader) continue;
    Payload pl = Payload::of_uint(e.u, id_bits);
    pl.append_uint(e.v, id_bits);
    outbox[e.u].push_back(pl);
  }
  if (net.model().kind == ModelKind::clique) {
    std::vector<Message> demands;
    for (NodeId v = 0; v < g.size(); ++v)
      for (auto& pl : outbox[v]) demands.push_back({v, leader, std::move(pl)});
    net.lenzen_route_batched(demands);
  } else {
    // Broadcast clique: one item per node per round.
    for (std::size_t r = 0;; ++r) {
      std::vector<Message> round;
      for (NodeId v = 0; v < g.size(); ++v)
        if (r < outbox[v].size()) round.push_back({v, leader, outbox[v][r]});
      if (round.empty()) break;
      net.exchange(std::move(round));
    }
  }

  std::vector<bool> joined(g.size(), false);
  for (NodeId v : undecided) {
    auto nb = g.neighbors(v);
    if (std::none_of(nb.begin(), nb.end(), [&](NodeId u) { return joined[u]; })) joined[v] = true;
  }
  if (net.model().kind == ModelKind::clique) {
    std::vector<Message> notes;
    for (NodeId v : undecided)
      if (v != leader) notes.push_back({leader, v, Payload::of_uint(joined[v] ? 1 : 0, 1)});
    net.exchange(std::move(notes));
  } else {
    net.broadcast_from_leader(leader, Payload::of_bits(g.size()));
  }
  for (NodeId v : undecided) st[v].status = joined[v] ? MisStatus::in_mis : MisStatus::removed;
}

inline NodeSet collect_mis(const std::vector<NodeMisState>& st) {
  std::vector<NodeId> ids;
  for (NodeId v = 0; v < st.size(); ++v)
    if (st[v].status == MisStatus::in_mis) ids.push_back(v);
  return NodeSet(st.size(), std::move(ids));
}

inline MisPhaseRecord make_record(std::size_t phase, const MisPhase& mp, const DerandRun& run,
                                  const PhaseOutcome& out, bool traces) {
  MisPhaseRecord r;
  r.phase = phase;
  r.undecided = mp.live().size();
  for (const auto& gn : mp.golden()) (gn.type == GoldenType::type1 ? r.type1 : r.type2) += 1;
  r.seed_bits = mp.params().t;
  r.seed = run.chosen.to_string();
  r.initial_value = run.initial_value;
  r.final_value = run.final_value;
  r.certified_bound = mp.certified_bound();
  r.joined = out.joined.size();
  r.removed = out.removed.size();
  if (traces) r.trace = run.trace_json();
  return r;
}

/// Runs derandomized phases until every node decides or the budget is
/// spent. derandomize(phase, fp) returns the DerandRun and charges its own
/// communication.
template <class Derandomize>
void run_det_phases(Network& net, const Graph& g, std::vector<NodeMisState>& st,
                    const std::vector<std::uint64_t>& hash_ids, std::size_t id_space, NodeId leader,
                    std::size_t budget, const MisConfig& cfg, MisResult& res, Derandomize&& derandomize) {
  const unsigned max_exp = max_exponent(cfg);
  for (std::size_t phase = 0; phase < budget; ++phase) {
    if (std::none_of(st.begin(), st.end(), [](const NodeMisState& s) { return s.live(); })) break;
    exchange_state(net, g, st, max_exp);
    exchange_degrees(net, g, st, effective_degrees(g, st));
    const FamilyParams fp = phase_family(id_space, st, cfg.t_max);
    MisPhase mp(g, st, hash_ids, fp);
    for (const auto& gn : mp.golden()) st[gn.v].age += 1;
    DerandRun run = derandomize(mp, fp);
    auto marks = marks_from_seed(fp, run.chosen.seed(), st, hash_ids);
    auto out = simulate_phase(g, st, marks, max_exp, &net);
    res.phases.push_back(make_record(phase, mp, run, out, cfg.record_traces));
    termination_check(net, st, leader);
  }
}

}  // namespace detail

/// Randomized variant with fully independent marks, then leader collection.
inline MisResult rand_mis_clique(const Graph& g, const MisConfig& cfg = {}) {
  MisResult res;
  Network net(g, CostModel::make(ModelKind::clique, g.size(), cfg.c_bandwidth));
  std::vector<NodeMisState> st(g.size());
  std::mt19937_64 rng(cfg.rng_seed);
  const unsigned max_exp = detail::max_exponent(cfg);
  res.phase_budget = detail::clique_phase_budget(g, cfg);
  for (std::size_t phase = 0; phase < res.phase_budget; ++phase) {
    if (std::none_of(st.begin(), st.end(), [](const NodeMisState& s) { return s.live(); })) break;
    detail::exchange_state(net, g, st, max_exp);
    const auto d = effective_degrees(g, st);
    std::vector<bool> marks(g.size(), false);
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!st[v].live()) continue;
      marks[v] = (rng() >> (64 - st[v].p_exp)) == 0;
      if (classify_golden(g, st, d, v) != GoldenType::not_golden) st[v].age += 1;
    }
    auto out = simulate_phase(g, st, marks, max_exp, &net);
    MisPhaseRecord r;
    r.phase = phase;
    r.joined = out.joined.size();
    r.removed = out.removed.size();
    res.phases.push_back(std::move(r));
    detail::termination_check(net, st, 0);
  }
  detail::leader_finish(net, g, st, cfg, res);
  res.mis = detail::collect_mis(st);
  res.metrics = net.metrics();
  return res;
}

/// Deterministic congested-clique MIS: each phase fixes a pairwise seed bit
/// by bit at a leader, then hands the residual graph to the leader.
inline MisResult det_mis_clique(const Graph& g, const MisConfig& cfg = {}) {
  if (cfg.model != ModelKind::clique && cfg.model != ModelKind::broadcast_clique)
    throw ParameterError("det-mis runs in CLIQUE or BROADCAST_CLIQUE, not " + to_string(cfg.model));
  MisResult res;
  Network net(g, CostModel::make(cfg.model, g.size(), cfg.c_bandwidth));
  std::vector<NodeMisState> st(g.size());
  std::vector<std::uint64_t> ids(g.size());
  for (NodeId v = 0; v < g.size(); ++v) ids[v] = v;
  const NodeId leader = 0;
  res.phase_budget = detail::clique_phase_budget(g, cfg);

  detail::run_det_phases(net, g, st, ids, g.size(), leader, res.phase_budget, cfg, res,
                         [&](MisPhase& mp, const FamilyParams& fp) {
                           return run_to_completion(mp.estimator(), fp, Schedule::bitwise(), [&](const DerandStep& step) {
                             const auto parent = parent_assignment(step);
                             detail::exchange_counts(net, g, st, fp.t - step.next.fixed());
                             const auto& c0 = mp.chi(parent.extend(false));
                             const auto& c1 = mp.chi(parent.extend(true));
                             std::vector<Message> gather;
                             for (std::size_t k = 0; k < mp.golden().size(); ++k) {
                               const auto& gn = mp.golden()[k];
                               if (gn.v != leader)
                                 gather.push_back({gn.v, leader, detail::chi_payload(c0.chi[k], c1.chi[k], gn.age)});
                             }
                             net.exchange(std::move(gather));
                             net.broadcast_from_leader(leader, Payload::of_uint(step.chosen, 1));
                           });
                         });
  detail::leader_finish(net, g, st, cfg, res);
  res.mis = detail::collect_mis(st);
  res.metrics = net.metrics();
  return res;
}

/// Deterministic MIS for Delta^3 <= c_delta * n: nodes learn their
/// 2-neighborhoods, then every block of floor(log2 n) seed bits is fixed in
/// O(1) rounds with node tau evaluating candidate tau.
inline MisResult det_mis_bounded_delta(const Graph& g, const MisConfig& cfg = {}) {
  const double delta = static_cast<double>(g.max_degree());
  if (g.size() < 2) throw ParameterError("det-mis-bounded needs n >= 2");
  if (delta * delta * delta > cfg.c_delta * static_cast<double>(g.size()))
    throw ParameterError("degree gate: Delta^3 = " + std::to_string(g.max_degree() * g.max_degree() * g.max_degree()) +
                         " exceeds " + std::to_string(cfg.c_delta) + "*n = " +
                         std::to_string(cfg.c_delta * static_cast<double>(g.size())) + "; use det-mis instead");
  MisResult res;
  Network net(g, CostModel::make(ModelKind::clique, g.size(), cfg.c_bandwidth));
  std::vector<NodeMisState> st(g.size());
  std::vector<std::uint64_t> ids(g.size());
  for (NodeId v = 0; v < g.size(); ++v) ids[v] = v;
  const NodeId leader = 0;
  const unsigned z = floor_log2(g.size());
  const unsigned id_bits = std::max(1U, ceil_log2(g.size()));
  res.phase_budget = detail::clique_phase_budget(g, cfg);

  detail::run_det_phases(net, g, st, ids, g.size(), leader, res.phase_budget, cfg, res,
                         [&](MisPhase& mp, const FamilyParams& fp) {
                           // 2-neighborhood: v forwards each live neighbor's ID and p to every live neighbor.
                           std::vector<Message> demands;
                           for (NodeId v = 0; v < g.size(); ++v) {
                             if (!st[v].live()) continue;
                             for (NodeId u : g.neighbors(v)) {
                               if (!st[u].live()) continue;
                               for (NodeId w : g.neighbors(v)) {
                                 if (w == u || !st[w].live()) continue;
                                 Payload pl = Payload::of_uint(w, id_bits);
                                 pl.append_uint(st[w].p_exp, std::max(1U, ceil_log2(detail::max_exponent(cfg) + 1)));
                                 demands.push_back({v, u, std::move(pl)});
                               }
                             }
                           }
                           net.lenzen_route_batched(demands);
                           return run_to_completion(
                               mp.estimator(), fp, Schedule::blockwise(z, g.size()), [&](const DerandStep& step) {
                                 const auto parent = parent_assignment(step);
                                 const std::uint64_t cands = std::uint64_t{1} << step.block;
                                 std::vector<const ChiTerms*> terms;
                                 for (std::uint64_t tau = 0; tau < cands; ++tau)
                                   terms.push_back(&mp.chi(parent.extend_block(tau, step.block)));
                                 std::vector<Message> fan;
                                 for (std::size_t k = 0; k < mp.golden().size(); ++k) {
                                   const auto& gn = mp.golden()[k];
                                   for (std::uint64_t tau = 0; tau < cands; ++tau) {
                                     if (tau == gn.v) continue;
                                     Payload pl;
                                     pl.append_int(terms[tau]->chi[k]).append_uint(gn.age, std::max(1U, ceil_log2(gn.age + 1)));
                                     fan.push_back({gn.v, static_cast<NodeId>(tau), std::move(pl)});
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
                         });
  detail::leader_finish(net, g, st, cfg, res);
  res.mis = detail::collect_mis(st);
  res.metrics = net.metrics();
  return res;
}

/// Deterministic CONGEST MIS. Each connected component runs on its own with
/// its smallest ID as leader; seed bits are decided by convergecast and
/// broadcast over a BFS tree. There is no leader finish: every node must
/// decide within the phase budget.
inline MisResult det_mis_congest(const Graph& g, const MisConfig& cfg = {}) {
  MisResult res;
  std::vector<NodeMisState> global(g.size());
  res.phase_budget = static_cast<std::size_t>(std::ceil(cfg.c_prime * std::max(1U, ceil_log2(g.size()))));
  bool first = true;
  std::vector<std::vector<NodeId>> comps(g.size());
  for (NodeId v = 0; v < g.size(); ++v) comps[g.components()[v]].push_back(v);
  for (const auto& members : comps) {
    if (members.empty()) continue;
    Graph sub = g.induced(members);
    Network net(sub, CostModel::make(ModelKind::congest, g.size(), cfg.c_bandwidth));
    std::vector<NodeMisState> st(sub.size());
    std::vector<std::uint64_t> ids(members.begin(), members.end());
    const NodeId leader = 0;
    MisResult part;
    detail::run_det_phases(net, sub, st, ids, g.size(), leader, res.phase_budget, cfg, part,
                           [&](MisPhase& mp, const FamilyParams& fp) {
                             return run_to_completion(mp.estimator(), fp, Schedule::bitwise(), [&](const DerandStep& step) {
                               const auto parent = parent_assignment(step);
                               detail::exchange_counts(net, sub, st, fp.t - step.next.fixed());
                               std::vector<Network::Contribution> contrib;
                               for (std::size_t k = 0; k < mp.golden().size(); ++k) {
                                 contrib.push_back({mp.golden()[k].v,
                                                    {mp.weighted_term(parent.extend(false), k),
                                                     mp.weighted_term(parent.extend(true), k)}});
                               }
                               net.convergecast_sums(leader, contrib, 2);
                               net.broadcast_from_leader(leader, Payload::of_uint(step.chosen, 1));
                             });
                           });
    for (std::size_t i = 0; i < members.size(); ++i) global[members[i]] = st[i];
    for (auto& r : part.phases) res.phases.push_back(std::move(r));
    if (first) {
      res.metrics = net.metrics();
      first = false;
    } else {
      res.metrics.merge_parallel(net.metrics());
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (st[i].live())
        throw BoundViolation("det-mis-congest: node " + std::to_string(members[i]) + " undecided after " +
                             std::to_string(res.phase_budget) + " phases");
    }
  }
  res.mis = detail::collect_mis(global);
  return res;
}

struct ColoringResult {
  std::vector<unsigned> colors;
  std::size_t palette = 1;
  bool used_bounded = false;
  std::size_t blowup_nodes = 0;
  MisResult inner;
};

/// (Delta+1)-coloring via MIS on the blow-up graph: node v becomes a clique
/// of copies (v, 0..Delta), and copies with equal index are matched across
/// every edge. The color of v is the index of its copy in the MIS.
inline ColoringResult color_via_mis(const Graph& g, const MisConfig& cfg = {}) {
  const std::size_t c = g.max_degree() + 1;
  std::vector<Edge> edges;
  for (NodeId v = 0; v < g.size(); ++v)
    for (std::size_t a = 0; a < c; ++a)
      for (std::size_t b = a + 1; b < c; ++b)
        edges.push_back({static_cast<NodeId>(v * c + a), static_cast<NodeId>(v * c + b), 1});
  for (const auto& e : g.edges())
    for (std::size_t j = 0; j < c; ++j)
      edges.push_back({static_cast<NodeId>(e.u * c + j), static_cast<NodeId>(e.v * c + j), 1});
  Graph blow(g.size() * c, std::move(edges));

  ColoringResult res;
  res.palette = c;
  res.blowup_nodes = blow.size();
  const double bd = static_cast<double>(blow.max_degree());
  res.used_bounded = blow.size() >= 2 && bd * bd * bd <= cfg.c_delta * static_cast<double>(blow.size());
  MisConfig inner = cfg;
  inner.model = ModelKind::clique;
  res.inner = res.used_bounded ? det_mis_bounded_delta(blow, inner) : det_mis_clique(blow, inner);
  res.colors.assign(g.size(), 0);
  std::vector<std::size_t> hits(g.size(), 0);
  for (NodeId x : res.inner.mis.members) {
    res.colors[x / c] = static_cast<unsigned>(x % c);
    hits[x / c] += 1;
  }
  for (NodeId v = 0; v < g.size(); ++v) {
    if (hits[v] != 1)
      throw InvariantError("node " + std::to_string(v) + " has " + std::to_string(hits[v]) + " copies in the MIS");
  }
  return res;
}

}  // namespace dlocal
