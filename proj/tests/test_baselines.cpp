#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "circflow/baselines.hpp"
#include "circflow/solver.hpp"
#include "test_support.hpp"

namespace circflow {
namespace {

using testing::fixture_a;

TEST(FlowNetwork, SplitsTheHub) {
  const auto inst = fixture_a();
  const FlowNetwork fnet(inst.net);
  EXPECT_EQ(fnet.node_count(), 6);
  EXPECT_EQ(fnet.arc_count(), 7);
  EXPECT_EQ(fnet.tail(0), fnet.source());
  EXPECT_EQ(fnet.head(2), fnet.sink());
  const auto order = fnet.topological_order();
  ASSERT_EQ(order.size(), 6u);
  std::vector<std::size_t> position(6);
  for (std::size_t i = 0; i < order.size(); ++i) position[static_cast<std::size_t>(order[i])] = i;
  for (ArcId a = 0; a < fnet.arc_count(); ++a) {
    EXPECT_LT(position[static_cast<std::size_t>(fnet.tail(a))], position[static_cast<std::size_t>(fnet.head(a))]);
  }
}

TEST(Ssp, FixtureACurveStopsAfterOnePath) {
  const auto inst = fixture_a();
  const auto r = ssp_solve(FlowNetwork(inst.net));
  EXPECT_EQ(r.cost_curve, (std::vector<Cost>{0, -5}));
  EXPECT_EQ(r.cost, -5);
  EXPECT_EQ(r.augmentations, 1);
  EXPECT_EQ(r.flow, (std::vector<std::uint8_t>{1, 1, 0, 0, 1, 1, 1}));
}

TEST(Ssp, FixtureAForcedSecondPathRaisesTheCost) {
  const auto inst = fixture_a();
  const auto r = ssp_solve(FlowNetwork(inst.net), 2);
  EXPECT_EQ(r.cost_curve, (std::vector<Cost>{0, -5, -2}));
  EXPECT_EQ(r.augmentations, 2);
  EXPECT_EQ(r.cost, -2);
}

TEST(Ssp, AllPositivePathsStopAtZero) {
  auto inst = fixture_a();
  inst.costs.observation = {1, 1};
  const auto net = build_network(inst.detections, inst.costs, BuildOptions{1});
  const auto r = ssp_solve(FlowNetwork(net));
  EXPECT_EQ(r.cost_curve, (std::vector<Cost>{0}));
  EXPECT_EQ(r.cost, 0);
  EXPECT_EQ(r.augmentations, 0);
}

TEST(Ssp, CurveIsConvexAndItsMinimumIsOptimal) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_instance(rng);
    const auto full = ssp_solve(FlowNetwork(inst.net), static_cast<std::int64_t>(inst.detections.size()));
    const auto& curve = full.cost_curve;
    for (std::size_t k = 2; k < curve.size(); ++k) {
      EXPECT_GE(curve[k] - curve[k - 1], curve[k - 1] - curve[k - 2]) << "trial " << trial;
    }
    const Cost best = *std::min_element(curve.begin(), curve.end());
    EXPECT_EQ(best, brute_force_oracle(inst.net).cost);
    EXPECT_EQ(ssp_solve(FlowNetwork(inst.net)).cost, best);
  }
}

TEST(Dssp, MatchesSsp) {
  std::mt19937_64 rng(4);
  testing::InstanceShape shape;
  shape.max_detections = 40;
  shape.max_frames = 8;
  shape.transition_density = 0.2;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_instance(rng, shape);
    const FlowNetwork fnet(inst.net);
    const auto a = ssp_solve(fnet);
    const auto b = dssp_solve(fnet);
    EXPECT_EQ(a.cost, b.cost);
    EXPECT_EQ(a.augmentations, b.augmentations);
    EXPECT_EQ(a.cost_curve, b.cost_curve);
    EXPECT_TRUE(testing::is_unit_circulation(inst.net, b.flow));
    EXPECT_EQ(testing::flow_cost(inst.net, b.flow), b.cost);
  }
}

TEST(Dssp, FixtureBIsOneAugmentation) {
  testing::Instance inst;
  inst.detections = {Detection{0, 1, {0.0}, {}, {}}};
  inst.costs.observation = {-3};
  inst.costs.enter = {1};
  inst.costs.exit = {1};
  const auto net = build_network(inst.detections, inst.costs, BuildOptions{1});
  const auto r = dssp_solve(FlowNetwork(net));
  EXPECT_EQ(r.augmentations, 1);
  EXPECT_EQ(r.cost, -1);
}

TEST(Dssp, EmptyNetwork) {
  const CirculationNetwork net;
  const auto r = dssp_solve(FlowNetwork(net));
  EXPECT_EQ(r.cost, 0);
  EXPECT_EQ(r.augmentations, 0);
  EXPECT_EQ(ssp_solve(FlowNetwork(net)).cost, 0);
}

TEST(Oracle, FixtureA) {
  const auto r = brute_force_oracle(fixture_a().net);
  EXPECT_EQ(r.cost, -5);
  ASSERT_EQ(r.cycles.size(), 1u);
  EXPECT_EQ(r.cycles[0], (std::vector<std::size_t>{0, 1}));
}

TEST(Oracle, AllPositiveIsEmpty) {
  auto inst = fixture_a();
  inst.costs.observation = {1, 1};
  const auto r = brute_force_oracle(build_network(inst.detections, inst.costs, BuildOptions{1}));
  EXPECT_EQ(r.cost, 0);
  EXPECT_TRUE(r.cycles.empty());
}

TEST(Oracle, ThreeTrajectories) {
  const auto r = brute_force_oracle(testing::three_track_instance().net);
  EXPECT_EQ(r.cost, -54);
  EXPECT_EQ(r.cycles.size(), 3u);
}

TEST(Oracle, AgreesWithSubsetEnumeration) {
  std::mt19937_64 rng(17);
  testing::InstanceShape shape;
  shape.max_detections = 5;
  shape.transition_density = 0.5;
  int checked = 0;
  while (checked < 100) {
    const auto inst = testing::random_instance(rng, shape);
    if (inst.net.arc_count() > 20) continue;
    EXPECT_EQ(brute_force_oracle(inst.net).cost, testing::subset_enumeration_minimum(inst.net));
    ++checked;
  }
}

TEST(Oracle, RefusesLargeNetworks) {
  std::mt19937_64 rng(1);
  testing::InstanceShape shape;
  shape.min_detections = kOracleDetectionLimit + 1;
  shape.max_detections = kOracleDetectionLimit + 1;
  EXPECT_THROW(brute_force_oracle(testing::random_instance(rng, shape).net), std::length_error);
}

}  // namespace
}  // namespace circflow
