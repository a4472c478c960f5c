#include <gtest/gtest.h>

#include "dlocal/sim.hpp"

namespace dlocal {
namespace {

Graph path(std::size_t n) { return generate(GenKind::path, n, {}, 0); }

TEST(CostModel, Bandwidth) {
  EXPECT_EQ(CostModel::make(ModelKind::congest, 16).bandwidth, 32u);
  EXPECT_EQ(CostModel::make(ModelKind::congest, 17).bandwidth, 40u);
  EXPECT_EQ(CostModel::make(ModelKind::clique, 1).bandwidth, 8u);
  EXPECT_THROW(CostModel::make(ModelKind::clique, 4, 0), ParameterError);
}

TEST(Exchange, WithinBudgetCostsOneRound) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::congest, 4));
  auto got = net.exchange({{0, 1, Payload::of_uint(3, 4)}, {2, 1, Payload::of_uint(1, 4)}});
  EXPECT_EQ(net.metrics().rounds, 1u);
  EXPECT_EQ(net.metrics().messages, 2u);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].from, 0u);
  EXPECT_EQ(got[0].payload.read_uint(0, 4), 3u);
}

TEST(Exchange, OversizedPayloadChargesCeiling) {
  auto g = path(4);
  auto model = CostModel::make(ModelKind::congest, 4);
  Network net(g, model);
  net.exchange({{0, 1, Payload::of_bits(3 * model.bandwidth)}});
  EXPECT_EQ(net.metrics().rounds, 3u);
  EXPECT_EQ(net.metrics().oversized_charges, 2u);
  EXPECT_EQ(net.metrics().max_message_bits, 3 * model.bandwidth);
}

TEST(Exchange, EmptyIsFree) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::congest, 4));
  net.exchange({});
  EXPECT_EQ(net.metrics().rounds, 0u);
}

TEST(Exchange, CongestRejectsNonNeighbors) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::congest, 4));
  EXPECT_THROW(net.exchange({{0, 2, Payload::of_bits(1)}}), ModelViolation);
  Network clique(g, CostModel::make(ModelKind::clique, 4));
  EXPECT_NO_THROW(clique.exchange({{0, 2, Payload::of_bits(1)}}));
}

TEST(Exchange, OneMessagePerOrderedPair) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::clique, 4));
  EXPECT_THROW(net.exchange({{0, 2, Payload::of_bits(1)}, {0, 2, Payload::of_bits(1)}}), ModelViolation);
}

TEST(Exchange, BroadcastCliqueNeedsIdenticalPayloads) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::broadcast_clique, 4));
  EXPECT_NO_THROW(net.exchange({{0, 1, Payload::of_uint(5, 3)}, {0, 3, Payload::of_uint(5, 3)}}));
  EXPECT_THROW(net.exchange({{0, 1, Payload::of_uint(5, 3)}, {0, 3, Payload::of_uint(4, 3)}}), ModelViolation);
}

TEST(Exchange, LocalIgnoresBandwidth) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::local, 4));
  net.exchange({{0, 1, Payload::of_bits(1000)}});
  EXPECT_EQ(net.metrics().rounds, 1u);
}

TEST(Convergecast, StarCenter) {
  auto g = generate(GenKind::star, 5, {}, 0);
  Network net(g, CostModel::make(ModelKind::congest, 5));
  std::vector<std::pair<NodeId, Rational>> values;
  for (NodeId v = 0; v < 5; ++v) values.emplace_back(v, 1);
  EXPECT_EQ(net.convergecast_sum(0, values), Rational(5));
  EXPECT_EQ(net.metrics().rounds, 1u);
  EXPECT_EQ(net.metrics().tree_build_rounds, 1u);
}

TEST(Convergecast, PathFromEnd) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::congest, 4));
  std::vector<std::pair<NodeId, Rational>> values;
  for (NodeId v = 0; v < 4; ++v) values.emplace_back(v, Rational(1, v + 1));
  EXPECT_EQ(net.convergecast_sum(0, values), Rational(25, 12));
  EXPECT_EQ(net.metrics().rounds, 3u);
  // The tree is built once per leader.
  net.convergecast_sum(0, values);
  EXPECT_EQ(net.metrics().tree_builds, 1u);
  EXPECT_EQ(net.metrics().tree_build_rounds, 3u);
}

TEST(Convergecast, CliqueIsOneRound) {
  auto g = path(6);
  Network net(g, CostModel::make(ModelKind::clique, 6));
  EXPECT_EQ(net.convergecast_sum(0, {{3, 2}, {5, Rational(-1, 2)}}), Rational(3, 2));
  EXPECT_EQ(net.metrics().rounds, 1u);
}

TEST(Convergecast, DisconnectedContributor) {
  Graph g(4, {{0, 1, 1}, {2, 3, 1}});
  Network net(g, CostModel::make(ModelKind::congest, 4));
  EXPECT_THROW(net.convergecast_sum(0, {{3, 1}}), ModelViolation);
}

TEST(Convergecast, VectorSumsAndOversize) {
  auto g = path(3);
  auto model = CostModel::make(ModelKind::congest, 3);  // B = 16
  Network net(g, model);
  std::vector<Network::Contribution> c{{1, {Rational(1, 3), Rational(7)}}, {2, {Rational(1, 5), Rational(1)}}};
  auto sums = net.convergecast_sums(0, c, 2);
  EXPECT_EQ(sums[0], Rational(8, 15));
  EXPECT_EQ(sums[1], Rational(8));
  // Node 1 forwards (8/15, 8): 5 + 5 + 5 + 2 = 17 bits > 16.
  EXPECT_EQ(net.metrics().rounds, 4u);
  EXPECT_EQ(net.metrics().oversized_charges, 2u);
}

TEST(Broadcast, Examples) {
  auto g = path(8);
  Network clique(g, CostModel::make(ModelKind::clique, 8));
  clique.broadcast_from_leader(0, Payload::of_bits(1));
  EXPECT_EQ(clique.metrics().rounds, 1u);

  Network congest(g, CostModel::make(ModelKind::congest, 8));
  congest.broadcast_from_leader(0, Payload::of_bits(1));
  EXPECT_EQ(congest.metrics().rounds, 7u);

  auto p3 = path(3);
  auto model = CostModel::make(ModelKind::congest, 3);
  Network mid(p3, model);
  mid.broadcast_from_leader(0, Payload::of_bits(2 * model.bandwidth));
  EXPECT_EQ(mid.metrics().rounds, 4u);
}

TEST(Lenzen, WithinQuota) {
  auto g = path(8);
  Network net(g, CostModel::make(ModelKind::clique, 8));
  std::vector<Message> d;
  for (NodeId v = 0; v < 8; ++v) d.push_back({0, v, Payload::of_bits(4)});
  net.lenzen_route(d);
  EXPECT_EQ(net.metrics().rounds, 2u);
}

TEST(Lenzen, ReceiveQuota) {
  auto g = path(8);
  Network net(g, CostModel::make(ModelKind::clique, 8));
  std::vector<Message> d;
  for (NodeId i = 0; i < 9; ++i) d.push_back({i % 8, 0, Payload::of_bits(4)});
  try {
    net.lenzen_route(d);
    FAIL() << "expected quota error";
  } catch (const QuotaError& e) {
    EXPECT_EQ(e.node(), 0u);
  }
}

TEST(Lenzen, EmptyAndModelChecks) {
  auto g = path(8);
  Network net(g, CostModel::make(ModelKind::clique, 8));
  net.lenzen_route({});
  EXPECT_EQ(net.metrics().rounds, 0u);
  auto model = net.model();
  EXPECT_THROW(net.lenzen_route({{0, 1, Payload::of_bits(model.bandwidth + 1)}}), ParameterError);
  Network congest(g, CostModel::make(ModelKind::congest, 8));
  EXPECT_THROW(congest.lenzen_route({{0, 1, Payload::of_bits(1)}}), ModelViolation);
}

TEST(Lenzen, BatchingRespectsQuota) {
  auto g = path(4);
  Network net(g, CostModel::make(ModelKind::clique, 4));
  std::vector<Message> d;
  for (int i = 0; i < 9; ++i) d.push_back({1, 0, Payload::of_bits(1)});
  EXPECT_EQ(net.lenzen_route_batched(d), 3u);
  EXPECT_EQ(net.metrics().rounds, 6u);
}

TEST(Metrics, Determinism) {
  auto g = path(6);
  auto run = [&] {
    Network net(g, CostModel::make(ModelKind::congest, 6));
    net.exchange({{0, 1, Payload::of_bits(30)}, {4, 5, Payload::of_bits(3)}});
    net.convergecast_sum(2, {{5, 3}, {0, 1}});
    return net.metrics().to_json().dump();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace dlocal
