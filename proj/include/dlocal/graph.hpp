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
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dlocal/errors.hpp"
#include "dlocal/rational.hpp"

namespace dlocal {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  Rational w = 1;
};

/// Undirected weighted graph on nodes 0..n-1.
///
/// Edges are stored canonically (u < v, sorted by (u, v)); the adjacency
/// index lists neighbors in ascending ID order. Max degree and hop diameter
/// are computed once at construction.
class Graph {
 public:
  Graph() = default;

  explicit Graph(std::size_t n, std::vector<Edge> edges = {}) : n_(n) {
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n)
        throw ParameterError("edge endpoint out of range: " + std::to_string(e.u) + "-" +
                             std::to_string(e.v));
      if (e.u == e.v) throw ParameterError("self-loop at node " + std::to_string(e.u));
      if (e.w <= 0) throw ParameterError("edge weight must be positive");
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v)
        throw ParameterError("parallel edge " + std::to_string(edges[i].u) + "-" +
                             std::to_string(edges[i].v));
    }
    edges_ = std::move(edges);
    build_index();
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t index) const { return edges_.at(index); }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  /// Edge indices aligned with neighbors(v).
  std::span<const std::size_t> incident_edges(NodeId v) const {
    return {adj_edges_.data() + offsets_[v], adj_edges_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::optional<std::size_t> edge_index(NodeId u, NodeId v) const {
    if (u >= n_ || v >= n_) return std::nullopt;
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return std::nullopt;
    return incident_edges(u)[static_cast<std::size_t>(it - nb.begin())];
  }
  bool adjacent(NodeId u, NodeId v) const { return edge_index(u, v).has_value(); }

  std::size_t max_degree() const noexcept { return max_degree_; }
  /// Largest hop eccentricity over all connected components.
  std::size_t diameter() const noexcept { return diameter_; }
  bool unweighted() const noexcept {
    return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.w == 1; });
  }

  /// Component label per node; the label is the smallest node ID in the component.
  const std::vector<NodeId>& components() const noexcept { return component_; }

  /// Hop distances from src; -1 for unreachable nodes.
  std::vector<std::int64_t> bfs(NodeId src) const {
    std::vector<std::int64_t> dist(n_, -1);
    std::queue<NodeId> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop();
      for (NodeId y : neighbors(x)) {
        if (dist[y] < 0) {
          dist[y] = dist[x] + 1;
          q.push(y);
        }
      }
    }
    return dist;
  }

  /// Subgraph induced by `nodes` (ascending), relabelled 0..k-1 in the same order.
  Graph induced(std::span<const NodeId> nodes) const {
    std::vector<std::int64_t> local(n_, -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::int64_t>(i);
    std::vector<Edge> sub;
    for (const auto& e : edges_) {
      if (local[e.u] >= 0 && local[e.v] >= 0)
        sub.push_back({static_cast<NodeId>(local[e.u]), static_cast<NodeId>(local[e.v]), e.w});
    }
    return Graph(nodes.size(), std::move(sub));
  }

 private:
  void build_index() {
    std::vector<std::size_t> deg(n_, 0);
    for (const auto& e : edges_) {
      ++deg[e.u];
      ++deg[e.v];
    }
    offsets_.assign(n_ + 1, 0);
    for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
    adj_.assign(offsets_[n_], 0);
    adj_edges_.assign(offsets_[n_], 0);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      adj_[fill[e.u]] = e.v;
      adj_edges_[fill[e.u]++] = i;
      adj_[fill[e.v]] = e.u;
      adj_edges_[fill[e.v]++] = i;
    }
    for (std::size_t v = 0; v < n_; ++v) {
      // edges_ is sorted by (u, v), so entries where v is the larger endpoint
      // arrive in ascending order too, but the two runs interleave.
      std::vector<std::pair<NodeId, std::size_t>> row;
      for (std::size_t j = offsets_[v]; j < offsets_[v + 1]; ++j) row.emplace_back(adj_[j], adj_edges_[j]);
      std::sort(row.begin(), row.end());
      for (std::size_t j = 0; j < row.size(); ++j) {
        adj_[offsets_[v] + j] = row[j].first;
        adj_edges_[offsets_[v] + j] = row[j].second;
      }
      max_degree_ = std::max(max_degree_, deg[v]);
    }
    component_.assign(n_, 0);
    std::vector<bool> seen(n_, false);
    for (NodeId s = 0; s < n_; ++s) {
      if (seen[s]) continue;
      auto dist = bfs(s);
      for (NodeId x = 0; x < n_; ++x) {
        if (dist[x] >= 0) {
          seen[x] = true;
          component_[x] = s;
        }
      }
    }
    diameter_ = 0;
    for (NodeId s = 0; s < n_; ++s) {
      for (auto d : bfs(s)) diameter_ = std::max<std::size_t>(diameter_, d < 0 ? 0 : static_cast<std::size_t>(d));
    }
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adj_;
  std::vector<std::size_t> adj_edges_;
  std::vector<NodeId> component_;
  std::size_t max_degree_ = 0;
  std::size_t diameter_ = 0;
};

/// A subset of nodes, kept sorted.
struct NodeSet {
  std::size_t universe = 0;
  std::vector<NodeId> members;

  NodeSet() = default;
  NodeSet(std::size_t n, std::vector<NodeId> ids) : universe(n), members(std::move(ids)) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (!members.empty() && members.back() >= n)
      throw ParameterError("node " + std::to_string(members.back()) + " outside universe");
  }
  bool contains(NodeId v) const { return std::binary_search(members.begin(), members.end(), v); }
  std::size_t size() const noexcept { return members.size(); }
  std::vector<bool> mask() const {
    std::vector<bool> m(universe, false);
    for (auto v : members) m[v] = true;
    return m;
  }
};

/// Edges of a spanner candidate, always a subset of the source graph's edges.
class SpannerEdges {
 public:
  SpannerEdges() = default;

  static SpannerEdges from_pairs(const Graph& g, std::vector<std::pair<NodeId, NodeId>> pairs) {
    SpannerEdges h;
    for (auto& [u, v] : pairs) {
      if (u > v) std::swap(u, v);
      if (!g.adjacent(u, v))
        throw ParameterError("spanner edge " + std::to_string(u) + "-" + std::to_string(v) +
                             " is not an edge of the graph");
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    h.pairs_ = std::move(pairs);
    return h;
  }

  static SpannerEdges from_mask(const Graph& g, const std::vector<bool>& in_spanner) {
    SpannerEdges h;
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
      if (in_spanner.at(i)) h.pairs_.emplace_back(g.edge(i).u, g.edge(i).v);
    }
    return h;
  }

  static SpannerEdges all(const Graph& g) { return from_mask(g, std::vector<bool>(g.edge_count(), true)); }

  std::span<const std::pair<NodeId, NodeId>> pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  std::vector<bool> mask(const Graph& g) const {
    std::vector<bool> m(g.edge_count(), false);
    for (auto [u, v] : pairs_) {
      auto idx = g.edge_index(u, v);
      if (!idx) throw ParameterError("spanner edge not in graph");
      m[*idx] = true;
    }
    return m;
  }

 private:
  std::vector<std::pair<NodeId, NodeId>> pairs_;
};

// ---------------------------------------------------------------------------
// Shortest paths

/// Weighted single-source distances over the edges selected by `allowed`
/// (empty selects every edge). nullopt marks unreachable nodes.
inline std::vector<std::optional<Rational>> distances_from(const Graph& g, const std::vector<bool>& allowed,
                                                           NodeId src) {
  std::vector<std::optional<Rational>> dist(g.size());
  std::vector<bool> done(g.size(), false);
  using Item = std::pair<Rational, NodeId>;
  auto cmp = [](const Item& a, const Item& b) { return a.first > b.first || (a.first == b.first && a.second > b.second); };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  dist[src] = Rational(0);
  pq.emplace(Rational(0), src);
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (done[x]) continue;
    done[x] = true;
    auto nb = g.neighbors(x);
    auto inc = g.incident_edges(x);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      if (!allowed.empty() && !allowed[inc[j]]) continue;
      Rational nd = d + g.edge(inc[j]).w;
      NodeId y = nb[j];
      if (!dist[y] || nd < *dist[y]) {
        dist[y] = nd;
        pq.emplace(nd, y);
      }
    }
  }
  return dist;
}

/// Exact weighted distance from u to v, optionally restricted to spanner
/// edges. nullopt means infinity (disconnected).
inline std::optional<Rational> shortest_dist(const Graph& g, const SpannerEdges* restrict_to, NodeId u,
                                             NodeId v) {
  if (u >= g.size() || v >= g.size()) throw ParameterError("node id out of range");
  // mask() has one entry per graph edge, so it is only empty when g has no edges.
  std::vector<bool> allowed;
  if (restrict_to != nullptr) allowed = restrict_to->mask(g);
  return distances_from(g, allowed, u)[v];
}

// ---------------------------------------------------------------------------
// Verifiers

struct MisVerdict {
  enum class Kind { valid, not_independent, not_maximal };
  Kind kind = Kind::valid;
  std::pair<NodeId, NodeId> witness_edge{0, 0};
  NodeId witness_node = 0;

  bool valid() const noexcept { return kind == Kind::valid; }
  std::string str() const {
    switch (kind) {
      case Kind::valid:
        return "valid";
      case Kind::not_independent:
        return "not_independent(" + std::to_string(witness_edge.first) + "," +
               std::to_string(witness_edge.second) + ")";
      case Kind::not_maximal:
        return "not_maximal(" + std::to_string(witness_node) + ")";
    }
    return "unknown";
  }
};

inline MisVerdict check_mis(const Graph& g, const NodeSet& s) {
  if (s.universe != g.size()) throw ParameterError("node set universe does not match graph");
  auto in = s.mask();
  for (const auto& e : g.edges()) {
    if (in[e.u] && in[e.v]) return {MisVerdict::Kind::not_independent, {e.u, e.v}, 0};
  }
  for (NodeId v = 0; v < g.size(); ++v) {
    if (in[v]) continue;
    auto nb = g.neighbors(v);
    if (std::none_of(nb.begin(), nb.end(), [&](NodeId u) { return in[u]; }))
      return {MisVerdict::Kind::not_maximal, {0, 0}, v};
  }
  return {};
}

struct SpannerVerdict {
  bool valid = true;
  Rational max_stretch = 1;
  std::pair<NodeId, NodeId> witness_edge{0, 0};
  /// Stretch of the witness edge; nullopt when its endpoints are disconnected in H.
  std::optional<Rational> witness_stretch;

  std::string str() const {
    if (valid) return "valid";
    return "violated(" + std::to_string(witness_edge.first) + "," + std::to_string(witness_edge.second) +
           "," + (witness_stretch ? to_string(*witness_stretch) : std::string("inf")) + ")";
  }
};

/// Checks dist_H(u,v) <= (2k-1) w(u,v) for every edge of g. On success
/// reports the largest observed ratio; otherwise the first violating edge in
/// canonical order.
inline SpannerVerdict check_spanner(const Graph& g, const SpannerEdges& h, unsigned k) {
  if (k < 1) throw ParameterError("stretch parameter k must be >= 1");
  auto allowed = h.mask(g);
  const Rational bound = 2 * static_cast<int>(k) - 1;
  SpannerVerdict verdict;
  verdict.max_stretch = g.edge_count() == 0 ? Rational(1) : Rational(0);
  NodeId cached_src = std::numeric_limits<NodeId>::max();
  std::vector<std::optional<Rational>> dist;
  for (const auto& e : g.edges()) {
    if (e.u != cached_src) {
      dist = distances_from(g, allowed, e.u);
      cached_src = e.u;
    }
    const auto& d = dist[e.v];
    if (!d) return {false, verdict.max_stretch, {e.u, e.v}, std::nullopt};
    Rational ratio = *d / e.w;
    if (ratio > bound) return {false, verdict.max_stretch, {e.u, e.v}, ratio};
    verdict.max_stretch = std::max(verdict.max_stretch, ratio);
  }
  return verdict;
}

/// True iff colors is a proper coloring of g using values in [0, palette).
inline bool check_coloring(const Graph& g, const std::vector<unsigned>& colors, std::size_t palette) {
  if (colors.size() != g.size()) return false;
  for (auto c : colors) {
    if (c >= palette) return false;
  }
  for (const auto& e : g.edges()) {
    if (colors[e.u] == colors[e.v]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generators

enum class GenKind { gnp, grid, clique, random_regular, weighted_gnp, path, cycle, star };

inline GenKind parse_gen_kind(std::string_view s) {
  if (s == "gnp") return GenKind::gnp;
  if (s == "grid") return GenKind::grid;
  if (s == "clique") return GenKind::clique;
  if (s == "random_regular") return GenKind::random_regular;
  if (s == "weighted_gnp") return GenKind::weighted_gnp;
  if (s == "path") return GenKind::path;
  if (s == "cycle") return GenKind::cycle;
  if (s == "star") return GenKind::star;
  throw ParameterError("unknown generator '" + std::string(s) + "'");
}

inline std::string to_string(GenKind k) {
  switch (k) {
    case GenKind::gnp: return "gnp";
    case GenKind::grid: return "grid";
    case GenKind::clique: return "clique";
    case GenKind::random_regular: return "random_regular";
    case GenKind::weighted_gnp: return "weighted_gnp";
    case GenKind::path: return "path";
    case GenKind::cycle: return "cycle";
    case GenKind::star: return "star";
  }
  return "unknown";
}

struct GenParams {
  double p = 0.0;            // gnp, weighted_gnp
  unsigned degree = 0;       // random_regular
  unsigned width = 0;        // grid; 0 picks floor(sqrt(n))
  unsigned max_weight = 10;  // weighted_gnp: integer weights in [1, max_weight]
};

namespace detail {

// std::uniform_*_distribution is implementation-defined; these are not, so
// generated graphs are identical across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

inline bool bernoulli(std::mt19937_64& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  const double u = static_cast<double>(rng() >> 11U);
  return u < p * 9007199254740992.0;  // 2^53
}

}  // namespace detail

/// Deterministic graph generator; identical (kind, n, params, seed) give
/// identical graphs.
inline Graph generate(GenKind kind, std::size_t n, const GenParams& params, std::uint64_t seed) {
  if (n < 1) throw ParameterError("n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  switch (kind) {
    case GenKind::gnp:
    case GenKind::weighted_gnp: {
      if (!(params.p >= 0.0 && params.p <= 1.0)) throw ParameterError("p must lie in [0,1]");
      if (kind == GenKind::weighted_gnp && params.max_weight < 1)
        throw ParameterError("max_weight must be >= 1");
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
          if (!detail::bernoulli(rng, params.p)) continue;
          Rational w = 1;
          if (kind == GenKind::weighted_gnp) w = 1 + static_cast<long long>(detail::uniform_below(rng, params.max_weight));
          edges.push_back({u, v, w});
        }
      }
      break;
    }
    case GenKind::grid: {
      std::size_t width = params.width;
      if (width == 0) width = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
      while (width > 1 && width * width > n) --width;
      if (width == 0 || n % width != 0)
        throw ParameterError("grid width " + std::to_string(width) + " does not divide n=" + std::to_string(n));
      for (NodeId v = 0; v < n; ++v) {
        if ((v % width) + 1 < width) edges.push_back({v, static_cast<NodeId>(v + 1), 1});
        if (v + width < n) edges.push_back({v, static_cast<NodeId>(v + width), 1});
      }
      break;
    }
    case GenKind::clique:
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v, 1});
      break;
    case GenKind::path:
      for (NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, static_cast<NodeId>(v + 1), 1});
      break;
    case GenKind::cycle:
      if (n < 3) throw ParameterError("cycle needs n >= 3");
      for (NodeId v = 0; v < n; ++v) edges.push_back({v, static_cast<NodeId>((v + 1) % n), 1});
      break;
    case GenKind::star:
      for (NodeId v = 1; v < n; ++v) edges.push_back({0, v, 1});
      break;
    case GenKind::random_regular: {
      const std::size_t d = params.degree;
      if (d >= n || (n * d) % 2 != 0)
        throw ParameterError("random_regular infeasible for n=" + std::to_string(n) + ", d=" + std::to_string(d));
      // Pairing model with restarts until the pairing is simple.
      for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<NodeId> stubs;
        for (NodeId v = 0; v < n; ++v)
          for (std::size_t j = 0; j < d; ++j) stubs.push_back(v);
        for (std::size_t i = stubs.size(); i > 1; --i)
          std::swap(stubs[i - 1], stubs[detail::uniform_below(rng, i)]);
        std::vector<std::pair<NodeId, NodeId>> pairs;
        bool simple = true;
        for (std::size_t i = 0; i < stubs.size(); i += 2) {
          NodeId a = std::min(stubs[i], stubs[i + 1]);
          NodeId b = std::max(stubs[i], stubs[i + 1]);
          if (a == b) {
            simple = false;
            break;
          }
          pairs.emplace_back(a, b);
        }
        if (!simple) continue;
        std::sort(pairs.begin(), pairs.end());
        if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) continue;
        for (auto [a, b] : pairs) edges.push_back({a, b, 1});
        return Graph(n, std::move(edges));
      }
      throw ParameterError("random_regular: no simple pairing found");
    }
  }
  return Graph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Text format: "n m" followed by m lines "u v w", w an integer or "p/q".

inline Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](std::string& out) -> bool {
    while (std::getline(in, out)) {
      ++lineno;
      auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line(line)) throw ParameterError("graph file: missing header line");
  std::istringstream header(line);
  long long n = -1;
  long long m = -1;
  if (!(header >> n >> m) || n < 1 || m < 0) throw ParameterError("graph file: bad header '" + line + "'");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    if (!next_line(line)) throw ParameterError("graph file: expected " + std::to_string(m) + " edges");
    std::istringstream row(line);
    long long u = -1;
    long long v = -1;
    std::string w = "1";
    if (!(row >> u >> v)) throw ParameterError("graph file line " + std::to_string(lineno) + ": bad edge");
    row >> w;
    if (u < 0 || v < 0) throw ParameterError("graph file line " + std::to_string(lineno) + ": negative id");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), parse_rational(w)});
  }
  return Graph(static_cast<std::size_t>(n), std::move(edges));
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << g.size() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << to_string(e.w) << '\n';
}

}  // namespace dlocal
