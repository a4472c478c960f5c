#include <sstream>

#include <gtest/gtest.h>

#include "dlocal/graph.hpp"

namespace dlocal {
namespace {

Graph path(std::size_t n) { return generate(GenKind::path, n, {}, 0); }
Graph cycle(std::size_t n) { return generate(GenKind::cycle, n, {}, 0); }

// Reference: greedy ascending-ID MIS.
NodeSet greedy_mis(const Graph& g) {
  std::vector<bool> blocked(g.size(), false);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (blocked[v]) continue;
    out.push_back(v);
    for (NodeId u : g.neighbors(v)) blocked[u] = true;
  }
  return NodeSet(g.size(), out);
}

// Reference: Floyd-Warshall over the allowed edges.
std::vector<std::vector<std::optional<Rational>>> all_pairs(const Graph& g, const std::vector<bool>& allowed) {
  const auto n = g.size();
  std::vector<std::vector<std::optional<Rational>>> d(n, std::vector<std::optional<Rational>>(n));
  for (NodeId v = 0; v < n; ++v) d[v][v] = Rational(0);
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    if (!allowed.empty() && !allowed[i]) continue;
    const auto& e = g.edge(i);
    d[e.u][e.v] = e.w;
    d[e.v][e.u] = e.w;
  }
  for (NodeId k = 0; k < n; ++k)
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j)
        if (d[i][k] && d[k][j] && (!d[i][j] || *d[i][k] + *d[k][j] < *d[i][j])) d[i][j] = *d[i][k] + *d[k][j];
  return d;
}

TEST(Generate, CliqueOfFour) {
  auto g = generate(GenKind::clique, 4, {}, 0);
  EXPECT_EQ(g.edge_count(), 6u);
  EXPECT_EQ(g.max_degree(), 3u);
  EXPECT_EQ(g.diameter(), 1u);
}

TEST(Generate, GnpZeroHasNoEdges) {
  GenParams p;
  p.p = 0.0;
  EXPECT_EQ(generate(GenKind::gnp, 10, p, 7).edge_count(), 0u);
}

TEST(Generate, GnpIsDeterministic) {
  GenParams p;
  p.p = 0.5;
  auto a = generate(GenKind::gnp, 10, p, 7);
  auto b = generate(GenKind::gnp, 10, p, 7);
  ASSERT_EQ(a.edge_count(), b.edge_count());
  for (std::size_t i = 0; i < a.edge_count(); ++i) {
    EXPECT_EQ(a.edge(i).u, b.edge(i).u);
    EXPECT_EQ(a.edge(i).v, b.edge(i).v);
  }
}

TEST(Generate, RejectsInfeasibleParameters) {
  GenParams p;
  p.degree = 3;
  EXPECT_THROW(generate(GenKind::random_regular, 5, p, 1), ParameterError);
  p.p = 1.5;
  EXPECT_THROW(generate(GenKind::gnp, 5, p, 1), ParameterError);
  EXPECT_THROW(generate(GenKind::clique, 0, {}, 1), ParameterError);
}

TEST(Generate, RandomRegularIsRegular) {
  GenParams p;
  p.degree = 3;
  auto g = generate(GenKind::random_regular, 12, p, 5);
  for (NodeId v = 0; v < g.size(); ++v) EXPECT_EQ(g.degree(v), 3u);
}

TEST(Generate, GridShape) {
  auto g = generate(GenKind::grid, 64, {}, 0);
  EXPECT_EQ(g.max_degree(), 4u);
  EXPECT_EQ(g.edge_count(), 2u * 8u * 7u);
  EXPECT_EQ(g.diameter(), 14u);
}

TEST(GraphType, RejectsBadEdges) {
  EXPECT_THROW(Graph(3, {{0, 0, 1}}), ParameterError);
  EXPECT_THROW(Graph(3, {{0, 3, 1}}), ParameterError);
  EXPECT_THROW(Graph(3, {{0, 1, 1}, {1, 0, 2}}), ParameterError);
  EXPECT_THROW(Graph(3, {{0, 1, 0}}), ParameterError);
}

TEST(GraphType, CanonicalStorage) {
  Graph g(3, {{2, 1, 1}, {1, 0, 1}});
  EXPECT_EQ(g.edge(0).u, 0u);
  EXPECT_EQ(g.edge(1).u, 1u);
  EXPECT_EQ(g.edge(1).v, 2u);
}

TEST(GraphType, DiameterOfDisconnectedGraph) {
  Graph g(5, {{0, 1, 1}, {2, 3, 1}, {3, 4, 1}});
  EXPECT_EQ(g.diameter(), 2u);
  EXPECT_EQ(g.components()[4], 2u);
}

TEST(ShortestDist, PathOfThree) {
  auto g = path(3);
  EXPECT_EQ(*shortest_dist(g, nullptr, 0, 2), Rational(2));
  EXPECT_EQ(*shortest_dist(g, nullptr, 1, 1), Rational(0));
}

TEST(ShortestDist, ForcedDetourOnFourCycle) {
  auto g = cycle(4);
  auto h = SpannerEdges::from_pairs(g, {{1, 2}, {2, 3}, {0, 3}});
  EXPECT_EQ(*shortest_dist(g, &h, 0, 1), Rational(3));
}

TEST(ShortestDist, InfinityWhenDisconnected) {
  Graph g(3, {{0, 1, 1}});
  EXPECT_FALSE(shortest_dist(g, nullptr, 0, 2).has_value());
}

TEST(ShortestDist, AgreesWithFloydWarshall) {
  GenParams p;
  p.p = 0.3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = generate(GenKind::weighted_gnp, 12, p, seed);
    auto ref = all_pairs(g, {});
    for (NodeId u = 0; u < g.size(); ++u) {
      auto d = distances_from(g, {}, u);
      for (NodeId v = 0; v < g.size(); ++v) {
        ASSERT_EQ(d[v].has_value(), ref[u][v].has_value());
        if (d[v]) {
          EXPECT_EQ(*d[v], *ref[u][v]);
          EXPECT_EQ(*d[v], *shortest_dist(g, nullptr, v, u));  // symmetry
        }
      }
    }
  }
}

TEST(ShortestDist, RationalWeights) {
  Graph g(3, {{0, 1, Rational(1, 3)}, {1, 2, Rational(1, 6)}, {0, 2, 1}});
  EXPECT_EQ(*shortest_dist(g, nullptr, 0, 2), Rational(1, 2));
}

TEST(CheckMis, Examples) {
  Graph tri(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
  EXPECT_TRUE(check_mis(tri, NodeSet(3, {0})).valid());
  auto p3 = path(3);
  auto v1 = check_mis(p3, NodeSet(3, {0}));
  EXPECT_EQ(v1.kind, MisVerdict::Kind::not_maximal);
  EXPECT_EQ(v1.witness_node, 2u);
  auto v2 = check_mis(p3, NodeSet(3, {0, 1}));
  EXPECT_EQ(v2.kind, MisVerdict::Kind::not_independent);
  EXPECT_EQ(v2.witness_edge, (std::pair<NodeId, NodeId>{0, 1}));
  EXPECT_EQ(v2.str(), "not_independent(0,1)");
}

TEST(CheckMis, GreedyOracleIsValid) {
  for (double p : {0.1, 0.3, 0.6}) {
    GenParams gp;
    gp.p = p;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto g = generate(GenKind::gnp, 20, gp, seed);
      EXPECT_TRUE(check_mis(g, greedy_mis(g)).valid());
    }
  }
}

TEST(CheckSpanner, WholeGraph) {
  GenParams gp;
  gp.p = 0.4;
  auto g = generate(GenKind::weighted_gnp, 10, gp, 3);
  auto v = check_spanner(g, SpannerEdges::all(g), 2);
  EXPECT_TRUE(v.valid);
  EXPECT_EQ(v.max_stretch, Rational(1));
}

TEST(CheckSpanner, FourCycleMinusEdge) {
  auto g = cycle(4);
  auto h = SpannerEdges::from_pairs(g, {{1, 2}, {2, 3}, {0, 3}});
  auto v = check_spanner(g, h, 2);
  EXPECT_TRUE(v.valid);
  EXPECT_EQ(v.max_stretch, Rational(3));
}

TEST(CheckSpanner, FiveCycleMinusEdge) {
  auto g = cycle(5);
  auto h = SpannerEdges::from_pairs(g, {{1, 2}, {2, 3}, {3, 4}, {0, 4}});
  auto v = check_spanner(g, h, 2);
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.witness_edge, (std::pair<NodeId, NodeId>{0, 1}));
  EXPECT_EQ(*v.witness_stretch, Rational(4));
}

TEST(CheckSpanner, Monotone) {
  auto g = cycle(6);
  auto h = SpannerEdges::from_pairs(g, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  ASSERT_TRUE(check_spanner(g, h, 3).valid);
  auto bigger = SpannerEdges::from_pairs(g, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  EXPECT_TRUE(check_spanner(g, bigger, 3).valid);
}

TEST(CheckSpanner, RejectsForeignEdges) {
  auto g = path(3);
  EXPECT_THROW(SpannerEdges::from_pairs(g, {{0, 2}}), ParameterError);
}

TEST(GraphFile, RoundTrip) {
  std::istringstream in("# comment\n3 2\n0 1 1/2\n2 1\n");
  auto g = read_graph(in);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.edge(0).w, Rational(1, 2));
  EXPECT_EQ(g.edge(1).w, Rational(1));
  std::ostringstream out;
  write_graph(out, g);
  EXPECT_EQ(out.str(), "3 2\n0 1 1/2\n1 2 1\n");
}

TEST(GraphFile, RejectsMalformed) {
  std::istringstream missing("3 2\n0 1\n");
  EXPECT_THROW(read_graph(missing), ParameterError);
  std::istringstream bad_weight("2 1\n0 1 x\n");
  EXPECT_THROW(read_graph(bad_weight), ParameterError);
}

TEST(Coloring, Checker) {
  auto g = path(3);
  EXPECT_TRUE(check_coloring(g, {0, 1, 0}, 2));
  EXPECT_FALSE(check_coloring(g, {0, 0, 1}, 2));
  EXPECT_FALSE(check_coloring(g, {0, 2, 0}, 2));
}

}  // namespace
}  // namespace dlocal
