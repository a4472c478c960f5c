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
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dlocal/errors.hpp"
#include "dlocal/graph.hpp"
#include "dlocal/rational.hpp"

namespace dlocal {

enum class ModelKind { local, congest, clique, broadcast_clique };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::local: return "LOCAL";
    case ModelKind::congest: return "CONGEST";
    case ModelKind::clique: return "CLIQUE";
    case ModelKind::broadcast_clique: return "BROADCAST_CLIQUE";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "LOCAL" || s == "local") return ModelKind::local;
  if (s == "CONGEST" || s == "congest") return ModelKind::congest;
  if (s == "CLIQUE" || s == "clique") return ModelKind::clique;
  if (s == "BROADCAST_CLIQUE" || s == "broadcast_clique") return ModelKind::broadcast_clique;
  throw ParameterError("unknown model '" + std::string(s) + "'");
}

/// Communication graph plus bandwidth rule.
struct CostModel {
  ModelKind kind = ModelKind::clique;
  std::size_t bandwidth = 8;       // bits per message per round
  std::uint64_t route_rounds = 2;  // charged per Lenzen routing call

  /// B = c_B * ceil(log2 n), at least c_B.
  static CostModel make(ModelKind kind, std::size_t n, unsigned c_bandwidth = 8) {
    if (c_bandwidth == 0) throw ParameterError("bandwidth factor must be positive");
    CostModel m;
    m.kind = kind;
    m.bandwidth = static_cast<std::size_t>(c_bandwidth) * std::max(1U, ceil_log2(n));
    return m;
  }

  bool is_clique() const noexcept { return kind == ModelKind::clique || kind == ModelKind::broadcast_clique; }
};

struct RunMetrics {
  std::uint64_t rounds = 0;
  std::uint64_t messages = 0;
  std::uint64_t max_message_bits = 0;
  std::uint64_t oversized_charges = 0;
  // BFS tree construction, charged once per (graph, leader).
  std::uint64_t tree_build_rounds = 0;
  std::uint64_t tree_builds = 0;

  std::uint64_t total_rounds() const noexcept { return rounds + tree_build_rounds; }

  /// Combines metrics of executions that ran side by side (disjoint components).
  void merge_parallel(const RunMetrics& o) {
    rounds = std::max(rounds, o.rounds);
    tree_build_rounds = std::max(tree_build_rounds, o.tree_build_rounds);
    messages += o.messages;
    max_message_bits = std::max(max_message_bits, o.max_message_bits);
    oversized_charges += o.oversized_charges;
    tree_builds += o.tree_builds;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["rounds"] = rounds;
    j["messages"] = messages;
    j["max_message_bits"] = max_message_bits;
    j["oversized_charges"] = oversized_charges;
    j["tree_build_rounds"] = tree_build_rounds;
    j["tree_builds"] = tree_builds;
    return j;
  }
};

/// A bit string. Only its length matters to the cost model, but contents are
/// kept so delivery and broadcast-identity can be checked.
class Payload {
 public:
  Payload() = default;

  static Payload of_bits(std::size_t bits) {
    Payload p;
    p.bits_.assign(bits, false);
    return p;
  }
  static Payload of_uint(std::uint64_t value, unsigned width) {
    Payload p;
    p.append_uint(value, width);
    return p;
  }

  Payload& append_uint(std::uint64_t value, unsigned width) {
    for (unsigned i = 0; i < width; ++i) bits_.push_back(((value >> i) & 1U) != 0);
    return *this;
  }
  /// Sign bit, 16-bit length, then the magnitude, low bit first.
  Payload& append_int(const BigInt& value) {
    BigInt mag = value < 0 ? BigInt(-value) : value;
    std::size_t len = mag == 0 ? 0 : boost::multiprecision::msb(mag) + 1;
    bits_.push_back(value < 0);
    append_uint(len, 16);
    for (std::size_t i = 0; i < len; ++i) bits_.push_back(boost::multiprecision::bit_test(mag, static_cast<unsigned>(i)));
    return *this;
  }
  Payload& append_rational(const Rational& r) {
    append_int(numerator_of(r));
    return append_int(denominator_of(r));
  }
  Payload& append(const Payload& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
    return *this;
  }

  std::size_t bits() const noexcept { return bits_.size(); }
  std::uint64_t read_uint(std::size_t offset, unsigned width) const {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bits_.at(offset + i)) << i;
    return v;
  }
  bool operator==(const Payload&) const = default;

 private:
  std::vector<bool> bits_;
};

struct Message {
  NodeId from = 0;
  NodeId to = 0;
  Payload payload;
};

/// Synchronous network over a fixed input graph. Every primitive charges
/// rounds to the run's metrics; the model's rules are enforced, never assumed.
class Network {
 public:
  Network(const Graph& g, CostModel model) : g_(&g), model_(model) {}

  const CostModel& model() const noexcept { return model_; }
  const RunMetrics& metrics() const noexcept { return metrics_; }
  RunMetrics& metrics() noexcept { return metrics_; }
  const Graph& graph() const noexcept { return *g_; }

  /// Delivers all messages in one synchronous step. The step costs
  /// max ceil(bits/B) rounds over the messages (one round minimum when any
  /// message is sent). Returns messages sorted by (to, from).
  std::vector<Message> exchange(std::vector<Message> msgs) {
    if (msgs.empty()) return msgs;
    const auto n = g_->size();
    std::sort(msgs.begin(), msgs.end(),
              [](const Message& a, const Message& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      const auto& m = msgs[i];
      if (m.from >= n || m.to >= n) throw ModelViolation("message endpoint out of range");
      if (m.from == m.to) throw ModelViolation("node " + std::to_string(m.from) + " messaging itself");
      if (i > 0 && msgs[i - 1].from == m.from && msgs[i - 1].to == m.to)
        throw ModelViolation("two messages on ordered pair " + std::to_string(m.from) + "->" + std::to_string(m.to));
      if ((model_.kind == ModelKind::congest || model_.kind == ModelKind::local) && !g_->adjacent(m.from, m.to))
        throw ModelViolation(to_string(model_.kind) + ": " + std::to_string(m.from) + "->" + std::to_string(m.to) +
                             " is not a graph edge");
      if (model_.kind == ModelKind::broadcast_clique && i > 0 && msgs[i - 1].from == m.from &&
          !(msgs[i - 1].payload == m.payload))
        throw ModelViolation("BROADCAST_CLIQUE: node " + std::to_string(m.from) + " sent differing payloads");
    }
    std::uint64_t charge = 1;
    for (const auto& m : msgs) {
      metrics_.max_message_bits = std::max<std::uint64_t>(metrics_.max_message_bits, m.payload.bits());
      charge = std::max(charge, charge_for(m.payload.bits()));
    }
    metrics_.rounds += charge;
    metrics_.oversized_charges += charge - 1;
    metrics_.messages += msgs.size();
    std::sort(msgs.begin(), msgs.end(),
              [](const Message& a, const Message& b) { return std::tie(a.to, a.from) < std::tie(b.to, b.from); });
    return msgs;
  }

  struct Contribution {
    NodeId node = 0;
    std::vector<Rational> values;
  };

  /// Sums vector-valued contributions at the leader. CONGEST/LOCAL forward
  /// partial sums up a BFS tree and pay depth * ceil(bits/B) rounds, where
  /// bits is the largest forwarded partial-sum encoding; the clique models
  /// pay ceil(bits/B) for one direct step.
  std::vector<Rational> convergecast_sums(NodeId leader, const std::vector<Contribution>& contributions,
                                          std::size_t width) {
    if (leader >= g_->size()) throw ParameterError("leader out of range");
    std::vector<std::vector<Rational>> acc(g_->size());
    std::vector<bool> has(g_->size(), false);
    for (const auto& c : contributions) {
      if (c.node >= g_->size()) throw ParameterError("contributor out of range");
      if (c.values.size() != width) throw ParameterError("contribution width mismatch");
      if (!has[c.node]) acc[c.node].assign(width, Rational(0));
      has[c.node] = true;
      for (std::size_t i = 0; i < width; ++i) acc[c.node][i] += c.values[i];
    }
    auto encoded = [](const std::vector<Rational>& vals) {
      std::size_t bits = 0;
      for (const auto& v : vals) bits += encoded_bits(v);
      return bits;
    };

    std::vector<Rational> total(width, Rational(0));
    if (model_.is_clique()) {
      std::size_t max_bits = 0;
      std::uint64_t sent = 0;
      for (NodeId v = 0; v < g_->size(); ++v) {
        if (!has[v]) continue;
        for (std::size_t i = 0; i < width; ++i) total[i] += acc[v][i];
        if (v != leader) {
          max_bits = std::max(max_bits, encoded(acc[v]));
          ++sent;
        }
      }
      if (sent > 0) charge_hops(1, max_bits, sent);
      return total;
    }

    const auto& tree = tree_for(leader);
    for (NodeId v = 0; v < g_->size(); ++v) {
      if (has[v] && tree.depth[v] < 0)
        throw ModelViolation("contributor " + std::to_string(v) + " is disconnected from leader " +
                             std::to_string(leader));
    }
    // Children before parents: process nodes by decreasing depth.
    std::vector<NodeId> order = tree.order;
    std::reverse(order.begin(), order.end());
    std::size_t max_bits = 0;
    std::uint64_t sent = 0;
    for (NodeId v : order) {
      if (!has[v]) continue;
      if (v == leader) continue;
      max_bits = std::max(max_bits, encoded(acc[v]));
      ++sent;
      NodeId p = tree.parent[v];
      if (!has[p]) acc[p].assign(width, Rational(0));
      has[p] = true;
      for (std::size_t i = 0; i < width; ++i) acc[p][i] += acc[v][i];
    }
    if (has[leader]) total = acc[leader];
    if (sent > 0) charge_hops(tree.height, max_bits, sent);
    return total;
  }

  Rational convergecast_sum(NodeId leader, const std::vector<std::pair<NodeId, Rational>>& values) {
    std::vector<Contribution> c;
    c.reserve(values.size());
    for (const auto& [v, x] : values) c.push_back({v, {x}});
    return convergecast_sums(leader, c, 1)[0];
  }

  /// Delivers payload from leader to every node.
  void broadcast_from_leader(NodeId leader, const Payload& payload) {
    if (leader >= g_->size()) throw ParameterError("leader out of range");
    if (g_->size() <= 1) return;
    if (model_.is_clique()) {
      charge_hops(1, payload.bits(), g_->size() - 1);
      return;
    }
    const auto& tree = tree_for(leader);
    if (tree.order.size() != g_->size())
      throw ModelViolation("broadcast from " + std::to_string(leader) + " cannot reach every node");
    charge_hops(tree.height, payload.bits(), g_->size() - 1);
  }

  /// Quota-checked routing oracle: each node sources and sinks at most n
  /// payloads of at most B bits; costs route_rounds.
  void lenzen_route(const std::vector<Message>& demands) {
    if (model_.kind != ModelKind::clique) throw ModelViolation("Lenzen routing requires the CLIQUE model");
    if (demands.empty()) return;
    const auto n = g_->size();
    std::vector<std::size_t> out(n, 0);
    std::vector<std::size_t> in(n, 0);
    for (const auto& d : demands) {
      if (d.from >= n || d.to >= n) throw ParameterError("routing endpoint out of range");
      if (d.payload.bits() > model_.bandwidth)
        throw ParameterError("routing payload of " + std::to_string(d.payload.bits()) + " bits exceeds B=" +
                             std::to_string(model_.bandwidth));
      ++out[d.from];
      ++in[d.to];
      metrics_.max_message_bits = std::max<std::uint64_t>(metrics_.max_message_bits, d.payload.bits());
    }
    for (NodeId v = 0; v < n; ++v) {
      if (out[v] > n)
        throw QuotaError(v, "node " + std::to_string(v) + " sources " + std::to_string(out[v]) + " > n payloads");
      if (in[v] > n)
        throw QuotaError(v, "node " + std::to_string(v) + " sinks " + std::to_string(in[v]) + " > n payloads");
    }
    metrics_.rounds += model_.route_rounds;
    metrics_.messages += demands.size();
  }

  /// Splits demands into quota-respecting batches (greedy, input order) and
  /// routes each batch.
  std::size_t lenzen_route_batched(const std::vector<Message>& demands) {
    const auto n = g_->size();
    std::vector<std::vector<Message>> batches;
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::vector<std::size_t>> in;
    for (const auto& d : demands) {
      std::size_t b = 0;
      while (b < batches.size() && (out[b][d.from] >= n || in[b][d.to] >= n)) ++b;
      if (b == batches.size()) {
        batches.emplace_back();
        out.emplace_back(n, 0);
        in.emplace_back(n, 0);
      }
      batches[b].push_back(d);
      ++out[b][d.from];
      ++in[b][d.to];
    }
    for (const auto& batch : batches) lenzen_route(batch);
    return batches.size();
  }

  /// Height of the BFS tree rooted at leader (builds and charges it if new).
  std::size_t tree_height(NodeId leader) { return tree_for(leader).height; }

 private:
  struct Tree {
    std::vector<NodeId> parent;
    std::vector<std::int64_t> depth;
    std::vector<NodeId> order;  // BFS order, leader first
    std::size_t height = 0;
  };

  std::uint64_t charge_for(std::size_t bits) const {
    if (model_.kind == ModelKind::local) return 1;
    return std::max<std::uint64_t>(1, (bits + model_.bandwidth - 1) / model_.bandwidth);
  }

  void charge_hops(std::size_t hops, std::size_t bits, std::uint64_t messages) {
    const std::uint64_t per_hop = charge_for(bits);
    metrics_.rounds += hops * per_hop;
    metrics_.oversized_charges += hops * (per_hop - 1);
    metrics_.messages += messages;
    metrics_.max_message_bits = std::max<std::uint64_t>(metrics_.max_message_bits, bits);
  }

  // Parent ties go to the smallest ID: BFS scans neighbors in ascending order
  // and the queue is FIFO, so the first discoverer is the smallest-ID node of
  // the previous layer.
  const Tree& tree_for(NodeId leader) {
    auto it = trees_.find(leader);
    if (it != trees_.end()) return it->second;
    Tree t;
    t.parent.assign(g_->size(), leader);
    t.depth.assign(g_->size(), -1);
    std::queue<NodeId> q;
    t.depth[leader] = 0;
    q.push(leader);
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      t.order.push_back(x);
      t.height = std::max<std::size_t>(t.height, static_cast<std::size_t>(t.depth[x]));
      for (NodeId y : g_->neighbors(x)) {
        if (t.depth[y] < 0) {
          t.depth[y] = t.depth[x] + 1;
          t.parent[y] = x;
          q.push(y);
        }
      }
    }
    metrics_.tree_build_rounds += t.height;
    metrics_.tree_builds += 1;
    return trees_.emplace(leader, std::move(t)).first->second;
  }

  const Graph* g_;
  CostModel model_;
  RunMetrics metrics_;
  std::map<NodeId, Tree> trees_;
};

}  // namespace dlocal
