#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "circflow/network.hpp"
#include "circflow/trajectories.hpp"
#include "test_support.hpp"

namespace circflow {
namespace {

using testing::fixture_a;
using testing::three_track_instance;

std::size_t count_kind(const CirculationNetwork& net, ArcKind kind) {
  std::size_t n = 0;
  for (const Arc& a : net.arcs()) n += a.kind == kind;
  return n;
}

TEST(BuildNetwork, EmptyInputIsHubOnly) {
  const auto net = build_network({}, CostAssignment{});
  EXPECT_EQ(net.node_count(), 1);
  EXPECT_EQ(net.arc_count(), 0);
  EXPECT_TRUE(validate_network(net).ok());
}

TEST(BuildNetwork, TwoDetectionsGiveFiveNodesSevenArcs) {
  const auto inst = fixture_a();
  EXPECT_EQ(inst.net.node_count(), 5);
  EXPECT_EQ(inst.net.arc_count(), 7);
  EXPECT_EQ(count_kind(inst.net, ArcKind::Enter), 2u);
  EXPECT_EQ(count_kind(inst.net, ArcKind::Observation), 2u);
  EXPECT_EQ(count_kind(inst.net, ArcKind::Exit), 2u);
  EXPECT_EQ(count_kind(inst.net, ArcKind::Transition), 1u);
  EXPECT_EQ(inst.net.max_abs_cost(), 5);
}

TEST(BuildNetwork, ArcLayoutPerDetection) {
  const auto inst = fixture_a();
  const auto& net = inst.net;
  EXPECT_EQ(net.arc(0).kind, ArcKind::Enter);
  EXPECT_EQ(net.arc(0).tail, 0);
  EXPECT_EQ(net.arc(0).head, CirculationNetwork::pre_node(0));
  EXPECT_EQ(net.arc(1).kind, ArcKind::Observation);
  EXPECT_EQ(net.arc(1).tail, CirculationNetwork::pre_node(0));
  EXPECT_EQ(net.arc(1).head, CirculationNetwork::post_node(0));
  EXPECT_EQ(net.arc(1).cost, -5);
  EXPECT_EQ(net.arc(2).kind, ArcKind::Exit);
  EXPECT_EQ(net.arc(6).kind, ArcKind::Transition);
  EXPECT_EQ(net.arc(6).tail, CirculationNetwork::post_node(0));
  EXPECT_EQ(net.arc(6).head, CirculationNetwork::pre_node(1));
  EXPECT_EQ(net.detection_of(0), std::nullopt);
  EXPECT_EQ(net.detection_of(3), 1u);
  EXPECT_EQ(net.detection_of(4), 1u);
}

TEST(BuildNetwork, ThreeTrackStructure) {
  const auto inst = three_track_instance();
  EXPECT_EQ(inst.net.node_count(), 15);
  EXPECT_EQ(inst.net.arc_count(), 21 + 8);
  EXPECT_TRUE(validate_network(inst.net).ok());
}

TEST(BuildNetwork, ResidualArcsPairUp) {
  const auto inst = three_track_instance();
  const auto& net = inst.net;
  std::size_t total = 0;
  for (NodeId v = 0; v < net.node_count(); ++v) {
    for (ArcId r : net.residual_out(v)) {
      ++total;
      EXPECT_EQ(net.residual_tail(r), v);
      EXPECT_EQ(net.residual_head(r), net.residual_tail(r ^ 1));
      EXPECT_EQ(net.residual_cost(r), -net.residual_cost(r ^ 1));
    }
  }
  EXPECT_EQ(total, 2u * static_cast<std::size_t>(net.arc_count()));
}

TEST(BuildNetwork, DuplicateTransitionsKeepTheCheapest) {
  auto inst = fixture_a();
  inst.costs.transitions.push_back({0, 1, -3});
  const auto net = build_network(inst.detections, inst.costs, BuildOptions{1});
  EXPECT_EQ(net.arc_count(), 7);
  EXPECT_EQ(net.arc(6).cost, -3);
}

TEST(BuildNetwork, CostsAreScaledAndRounded) {
  auto inst = fixture_a();
  inst.costs.observation = {-0.1234564, 2.5e-6};
  const auto net = build_network(inst.detections, inst.costs, BuildOptions{1'000'000});
  EXPECT_EQ(net.arc(1).cost, -123456);
  EXPECT_EQ(net.arc(4).cost, 3);
  EXPECT_EQ(scale_cost(-2.5, 2), -5);
}

TEST(BuildNetwork, RejectsBackwardTransition) {
  auto inst = fixture_a();
  inst.costs.transitions = {{1, 0, 1}};
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
}

TEST(BuildNetwork, RejectsSameFrameTransition) {
  auto inst = fixture_a();
  inst.detections[1].frame = 1;
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
}

TEST(BuildNetwork, RejectsDuplicateIds) {
  auto inst = fixture_a();
  inst.detections[1].id = 0;
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
}

TEST(BuildNetwork, RejectsNonFiniteCosts) {
  auto inst = fixture_a();
  inst.costs.enter[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
  inst = fixture_a();
  inst.costs.transitions[0].cost = std::numeric_limits<double>::infinity();
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
}

TEST(BuildNetwork, RejectsCostsBeyondTheSafeRange) {
  auto inst = fixture_a();
  inst.costs.exit[0] = 1e300;
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
}

TEST(BuildNetwork, RejectsShortCostVectors) {
  auto inst = fixture_a();
  inst.costs.exit.pop_back();
  EXPECT_THROW(build_network(inst.detections, inst.costs, BuildOptions{1}), std::invalid_argument);
}

TEST(BuildNetwork, RandomNetworksCountNodesArcsAndMaxCost) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = testing::random_instance(rng);
    const std::size_t n = inst.detections.size();
    EXPECT_EQ(static_cast<std::size_t>(inst.net.node_count()), 2 * n + 1);
    EXPECT_EQ(static_cast<std::size_t>(inst.net.arc_count()), 3 * n + inst.costs.transitions.size());
    Cost max_cost = 0;
    for (const Arc& a : inst.net.arcs()) max_cost = std::max<Cost>(max_cost, std::abs(a.cost));
    EXPECT_EQ(inst.net.max_abs_cost(), max_cost);
    EXPECT_TRUE(validate_network(inst.net).ok());
  }
}

TEST(ValidateNetwork, DetectsCycleAvoidingTheHub) {
  const auto inst = fixture_a();
  std::vector<Arc> arcs(inst.net.arcs().begin(), inst.net.arcs().end());
  arcs.push_back({CirculationNetwork::post_node(1), CirculationNetwork::pre_node(0), 1, ArcKind::Transition});
  const auto net = CirculationNetwork::from_arcs(5, arcs);
  const auto report = validate_network(net);
  EXPECT_FALSE(report.acyclic_without_hub);
  EXPECT_TRUE(report.first_violation.has_value());
  EXPECT_FALSE(report.ok());
}

TEST(ValidateNetwork, DetectsSecondOutgoingArcOnPreNode) {
  const auto inst = fixture_a();
  std::vector<Arc> arcs(inst.net.arcs().begin(), inst.net.arcs().end());
  // Pre-node of detection 1 has two incoming arcs (enter, transition); a
  // second outgoing arc breaks unit vertex capacity.
  arcs.push_back({CirculationNetwork::pre_node(1), 0, 0, ArcKind::Exit});
  const auto report = validate_network(CirculationNetwork::from_arcs(5, arcs));
  EXPECT_FALSE(report.unit_vertex_capacity);
  EXPECT_FALSE(report.ok());
}

TEST(ValidateNetwork, DetectsBrokenPairing) {
  std::vector<Arc> arcs = {{0, 1, 1, ArcKind::Enter}, {1, 0, 1, ArcKind::Exit}};
  const auto report = validate_network(CirculationNetwork::from_arcs(3, arcs));
  EXPECT_FALSE(report.pairing);
}

TEST(ValidateNetwork, EvenNodeCountFailsPairing) {
  const auto report = validate_network(CirculationNetwork::from_arcs(4, {}));
  EXPECT_FALSE(report.pairing);
}

TEST(FromArcs, RejectsOutOfRangeEndpoints) {
  EXPECT_THROW(CirculationNetwork::from_arcs(3, {{0, 3, 0, ArcKind::Enter}}), std::invalid_argument);
  EXPECT_THROW(CirculationNetwork::from_arcs(0, {}), std::invalid_argument);
}

TEST(WithCosts, KeepsTopology) {
  const auto inst = fixture_a();
  const std::vector<Cost> costs(7, 3);
  const auto net = inst.net.with_costs(costs);
  EXPECT_EQ(net.arc_count(), 7);
  EXPECT_EQ(net.arc(6).tail, inst.net.arc(6).tail);
  EXPECT_EQ(net.arc(1).cost, 3);
  EXPECT_EQ(net.max_abs_cost(), 3);
  EXPECT_THROW(inst.net.with_costs(std::vector<Cost>(3, 0)), std::invalid_argument);
}

TEST(ArcKindText, RoundTrips) {
  for (ArcKind k : {ArcKind::Enter, ArcKind::Observation, ArcKind::Transition, ArcKind::Exit}) {
    EXPECT_EQ(parse_arc_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_arc_kind("bogus"), std::nullopt);
}

TEST(Trajectories, ZeroFlowIsEmpty) {
  const auto inst = fixture_a();
  const std::vector<std::uint8_t> flow(7, 0);
  EXPECT_TRUE(flow_to_trajectories(flow, inst.net).empty());
}

TEST(Trajectories, DecodesTheTwoDetectionCycle) {
  const auto inst = fixture_a();
  const std::vector<std::uint8_t> flow = {1, 1, 0, 0, 1, 1, 1};
  const auto set = flow_to_trajectories(flow, inst.net);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.trajectories[0].detections, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(set.total_cost(), -5);
  EXPECT_TRUE(is_valid_trajectory_set(set, inst.detections));
  const auto labels = set.labels(2);
  EXPECT_EQ(labels, (std::vector<std::ptrdiff_t>{0, 0}));
}

TEST(Trajectories, RejectsBrokenCirculation) {
  const auto inst = fixture_a();
  const std::vector<std::uint8_t> flow = {1, 1, 0, 0, 0, 0, 0};
  EXPECT_THROW(flow_to_trajectories(flow, inst.net), InvariantViolation);
}

TEST(Trajectories, CanonicalOrderByFirstFrameThenId) {
  const auto inst = three_track_instance();
  TrajectorySet set;
  set.trajectories = {{{4}, 0}, {{1, 3, 6}, 0}, {}, {{0, 2, 5}, 0}};
  sort_canonically(set, inst.detections);
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set.trajectories[0].detections.front(), 0u);
  EXPECT_EQ(set.trajectories[1].detections.front(), 1u);
  EXPECT_EQ(set.trajectories[2].detections.front(), 4u);
}

TEST(Trajectories, ValiditySpotsOverlapAndTimeOrder) {
  const auto inst = three_track_instance();
  TrajectorySet overlap;
  overlap.trajectories = {{{0, 2}, 0}, {{2, 5}, 0}};
  EXPECT_FALSE(is_valid_trajectory_set(overlap, inst.detections));
  TrajectorySet backwards;
  backwards.trajectories = {{{2, 0}, 0}};
  EXPECT_FALSE(is_valid_trajectory_set(backwards, inst.detections));
}

}  // namespace
}  // namespace circflow
