#include <random>

#include <gtest/gtest.h>

#include "circflow/baselines.hpp"
#include "circflow/solver.hpp"
#include "circflow/trajectories.hpp"
#include "test_support.hpp"

namespace circflow {
namespace {

using testing::fixture_a;

testing::Instance fixture_b() {
  testing::Instance inst;
  inst.detections = {Detection{0, 1, {0.0}, {}, {}}};
  inst.costs.observation = {-3};
  inst.costs.enter = {1};
  inst.costs.exit = {1};
  inst.net = build_network(inst.detections, inst.costs, BuildOptions{1});
  return inst;
}

TEST(Solve, FixtureAIsOneTwoDetectionTrajectory) {
  const auto inst = fixture_a();
  const auto result = solve(inst.net);
  EXPECT_EQ(result.total_cost, -5);
  EXPECT_EQ(result.flow, (std::vector<std::uint8_t>{1, 1, 0, 0, 1, 1, 1}));
  const auto set = flow_to_trajectories(result.flow, inst.net);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.trajectories[0].detections, (std::vector<std::size_t>{0, 1}));
}

TEST(Solve, FixtureBIsOneSingleton) {
  const auto inst = fixture_b();
  const auto result = solve(inst.net);
  EXPECT_EQ(result.total_cost, -1);
  EXPECT_EQ(result.flow, (std::vector<std::uint8_t>{1, 1, 1}));
}

TEST(Solve, NonNegativeCostsGiveZeroFlow) {
  auto inst = fixture_a();
  inst.costs.observation = {0, 3};
  const auto net = build_network(inst.detections, inst.costs, BuildOptions{1});
  const auto result = solve(net);
  EXPECT_EQ(result.total_cost, 0);
  EXPECT_EQ(result.flow, std::vector<std::uint8_t>(7, 0));
}

TEST(Solve, EmptyNetwork) {
  const CirculationNetwork net;
  const auto result = solve(net);
  EXPECT_EQ(result.total_cost, 0);
  EXPECT_TRUE(result.flow.empty());
}

TEST(Solve, ThreeTrackInstance) {
  const auto inst = testing::three_track_instance();
  const auto result = solve(inst.net);
  EXPECT_EQ(result.total_cost, -54);
  auto set = flow_to_trajectories(result.flow, inst.net);
  sort_canonically(set, inst.detections);
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set.trajectories[0].detections, (std::vector<std::size_t>{0, 2, 5}));
  EXPECT_EQ(set.trajectories[1].detections, (std::vector<std::size_t>{1, 3, 6}));
  EXPECT_EQ(set.trajectories[2].detections, (std::vector<std::size_t>{4}));
}

TEST(Solve, MatchesOracleAndStaysEpsilonOptimal) {
  std::mt19937_64 rng(21);
  testing::InstanceShape shape;
  shape.max_detections = 10;
  for (int trial = 0; trial < 150; ++trial) {
    const auto inst = testing::random_instance(rng, shape);
    SolveOptions options;
    options.record_trace = true;
    const auto result = solve(inst.net, options);
    EXPECT_EQ(result.total_cost, brute_force_oracle(inst.net).cost) << "trial " << trial;
    EXPECT_TRUE(result.stats.epsilon_optimal_each_refine) << "trial " << trial;
    EXPECT_TRUE(testing::is_unit_circulation(inst.net, result.flow));
  }
}

TEST(Solve, FixingThresholdAtInfinityMatchesFixingOff) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_instance(rng);
    SolveOptions off;
    off.arc_fixing = false;
    SolveOptions infinite;
    infinite.fixing_threshold = std::numeric_limits<Cost>::max();
    const auto a = solve(inst.net, off);
    const auto b = solve(inst.net, infinite);
    EXPECT_EQ(a.flow, b.flow);
    EXPECT_EQ(a.total_cost, b.total_cost);
    EXPECT_EQ(b.stats.fixed_arcs_max, 0);
  }
}

TEST(Solve, OptionVariantsAgree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_instance(rng);
    const Cost reference = solve(inst.net).total_cost;
    SolveOptions plain;
    plain.price_refinement = false;
    plain.arc_fixing = false;
    EXPECT_EQ(solve(inst.net, plain).total_cost, reference);
    SolveOptions tight;
    tight.push_budget_factor = 1;
    EXPECT_EQ(solve(inst.net, tight).total_cost, reference);
  }
}

TEST(Solve, RejectsCostsThatWouldOverflowPrices) {
  auto inst = fixture_a();
  const auto huge = std::vector<Cost>(7, kMaxScaledCost);
  const auto net = inst.net.with_costs(huge);
  EXPECT_NO_THROW(CostScalingSolver{net});
  std::vector<Arc> arcs(net.arcs().begin(), net.arcs().end());
  for (auto& a : arcs) a.cost = Cost{1} << 58;
  const auto worse = CirculationNetwork::from_arcs(5, arcs);
  EXPECT_THROW(CostScalingSolver{worse}, std::overflow_error);
}

TEST(CheckEpsilonOptimality, DirectDefinition) {
  const auto inst = fixture_a();
  const std::vector<std::uint8_t> zero(7, 0);
  const std::vector<Cost> prices(5, 0);
  EXPECT_TRUE(check_epsilon_optimality(inst.net, zero, prices, 5));
  EXPECT_FALSE(check_epsilon_optimality(inst.net, zero, prices, 4));
  std::vector<Arc> arcs(inst.net.arcs().begin(), inst.net.arcs().end());
  for (auto& a : arcs) a.cost = std::max<Cost>(a.cost, 0);
  const auto positive = CirculationNetwork::from_arcs(5, arcs);
  EXPECT_TRUE(check_epsilon_optimality(positive, zero, prices, 0));
}

TEST(SetRelabel, NoExcessIsNoOp) {
  const auto inst = fixture_a();
  CostScalingSolver solver(inst.net);
  const auto blocking = solver.set_relabel();
  EXPECT_TRUE(blocking.empty());
  EXPECT_EQ(solver.stats().set_relabel_calls, 0);
  for (NodeId v = 0; v < 5; ++v) EXPECT_EQ(solver.price(v), 0);
}

// Two nodes, one arc 1->0 carrying flow: node 0 has the excess, node 1 the
// deficit, and the residual arc 0->1 has reduced cost exactly zero.
TEST(SetRelabel, TwoNodeTrace) {
  const auto net = CirculationNetwork::from_arcs(2, {{1, 0, 1, ArcKind::Transition}});
  CostScalingSolver solver(net);
  ASSERT_EQ(solver.cost_multiplier(), 3);
  solver.set_flow(0, 1);
  solver.set_price(0, 3);
  solver.set_epsilon(3);
  ASSERT_EQ(solver.excess(0), 1);
  ASSERT_EQ(solver.excess(1), -1);
  ASSERT_EQ(solver.reduced_cost(1), 0);
  EXPECT_EQ(solver.deficit_reachable_set(), (std::vector<NodeId>{1}));

  const auto blocking = solver.set_relabel();
  EXPECT_EQ(blocking.rounds, 1);
  EXPECT_EQ(blocking.join_round[1], 0);
  EXPECT_EQ(blocking.join_round[0], 1);
  EXPECT_EQ(blocking.preferred[0], 1);
  EXPECT_EQ(solver.price(1), 3);
  EXPECT_EQ(solver.price(0), 3);
  EXPECT_TRUE(solver.admissible(1));
  EXPECT_EQ(solver.deficit_reachable_set(), (std::vector<NodeId>{0, 1}));

  solver.push_relabel_along_blocking(blocking, 10);
  EXPECT_EQ(solver.total_excess(), 0);
  EXPECT_EQ(solver.flow(0), 0);
}

// Path 0->1->2->3 of admissible arcs; the unit of excess at 0 comes from
// flow on the expensive arc 3->0, whose reverse is not admissible.
TEST(PushRelabel, PathOfThree) {
  const auto net = CirculationNetwork::from_arcs(4, {{0, 1, -1, ArcKind::Transition},
                                                     {1, 2, -1, ArcKind::Transition},
                                                     {2, 3, -1, ArcKind::Transition},
                                                     {3, 0, -10, ArcKind::Transition}});
  CostScalingSolver solver(net);
  solver.set_flow(3, 1);
  solver.set_epsilon(solver.cost_multiplier());
  ASSERT_EQ(solver.total_excess(), 1);
  const auto blocking = solver.set_relabel();
  EXPECT_EQ(blocking.rounds, 0);
  solver.push_relabel_along_blocking(blocking, 100);
  EXPECT_EQ(solver.stats().pushes, 3);
  EXPECT_EQ(solver.total_excess(), 0);
  EXPECT_EQ(solver.flow_vector(), (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(PushRelabel, ZeroExcessIsNoOp) {
  const auto inst = fixture_a();
  CostScalingSolver solver(inst.net);
  solver.push_relabel_along_blocking(solver.set_relabel(), 100);
  EXPECT_EQ(solver.stats().pushes, 0);
}

TEST(PushRelabel, BudgetStopsEarly) {
  const auto net = CirculationNetwork::from_arcs(4, {{0, 1, -1, ArcKind::Transition},
                                                     {1, 2, -1, ArcKind::Transition},
                                                     {2, 3, -1, ArcKind::Transition},
                                                     {3, 0, -10, ArcKind::Transition}});
  CostScalingSolver solver(net);
  solver.set_flow(3, 1);
  solver.set_epsilon(solver.cost_multiplier());
  solver.push_relabel_along_blocking(solver.set_relabel(), 2);
  EXPECT_EQ(solver.stats().pushes, 2);
  EXPECT_EQ(solver.total_excess(), 1);
}

TEST(RestorePhases, ExcessNeverGrowsAndSetRelabelNeverLowersPrices) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_instance(rng);
    SolveOptions options;
    options.price_refinement = false;
    CostScalingSolver solver(inst.net, options);
    while (!solver.terminal()) {
      solver.set_epsilon(solver.epsilon() / 2 + solver.epsilon() % 2);
      solver.update_arc_fixing();
      solver.saturate_admissible_arcs();
      while (solver.total_excess() > 0) {
        std::vector<Cost> before(static_cast<std::size_t>(inst.net.node_count()));
        for (NodeId v = 0; v < inst.net.node_count(); ++v) before[static_cast<std::size_t>(v)] = solver.price(v);
        const auto blocking = solver.set_relabel();
        for (NodeId v = 0; v < inst.net.node_count(); ++v) {
          ASSERT_GE(solver.price(v), before[static_cast<std::size_t>(v)]);
        }
        for (NodeId v : blocking.excess_nodes) ASSERT_GE(blocking.join_round[static_cast<std::size_t>(v)], 0);
        const auto excess = solver.total_excess();
        solver.push_relabel_along_blocking(blocking, solver.default_push_budget());
        ASSERT_LE(solver.total_excess(), excess);
      }
      ASSERT_TRUE(solver.is_epsilon_optimal());
      ASSERT_TRUE(solver.admissible_graph_acyclic());
    }
  }
}

TEST(RefineOnce, NoAdmissibleArcsMeansNoWork) {
  auto inst = fixture_a();
  inst.costs.observation = {1, 1};
  const auto net = build_network(inst.detections, inst.costs, BuildOptions{1});
  CostScalingSolver solver(net);
  solver.refine_once();
  EXPECT_EQ(solver.stats().pushes, 0);
  EXPECT_EQ(solver.stats().restore_iterations, 0);
  EXPECT_TRUE(solver.is_epsilon_optimal());
}

TEST(RefineOnce, FixtureAReachesTheOptimumWithinTheBound) {
  const auto inst = fixture_a();
  SolveOptions options;
  options.price_refinement = false;
  options.record_trace = true;
  CostScalingSolver solver(inst.net, options);
  std::int64_t refines = 0;
  while (!solver.terminal()) {
    solver.refine_once();
    ++refines;
    EXPECT_TRUE(solver.is_epsilon_optimal());
  }
  // n * C = 5 * 5 in original units.
  EXPECT_LE(refines, 5 + 1);
  EXPECT_EQ(solver.total_cost(), -5);
}

TEST(PriceRefinement, AdmissibleCycleLeavesStateUnchanged) {
  const auto net = CirculationNetwork::from_arcs(2, {{0, 1, -1, ArcKind::Transition},
                                                     {1, 0, -1, ArcKind::Transition}});
  CostScalingSolver solver(net);
  solver.set_price(1, 1);
  const Cost eps = solver.epsilon();
  ASSERT_FALSE(solver.admissible_graph_acyclic());
  EXPECT_FALSE(solver.price_refinement(solver.price_refinement_budget()));
  EXPECT_EQ(solver.epsilon(), eps);
  EXPECT_EQ(solver.price(0), 0);
  EXPECT_EQ(solver.price(1), 1);
  EXPECT_EQ(solver.flow_vector(), (std::vector<std::uint8_t>{0, 0}));
}

TEST(PriceRefinement, AloneDrivesEpsilonToTheEndOnAnOptimalFlow) {
  const auto inst = fixture_a();
  SolveOptions options;
  options.arc_fixing = false;
  CostScalingSolver solver(inst.net, options);
  const std::vector<std::uint8_t> optimal = {1, 1, 0, 0, 1, 1, 1};
  for (ArcId a = 0; a < 7; ++a) solver.set_flow(a, optimal[static_cast<std::size_t>(a)]);
  ASSERT_TRUE(solver.is_epsilon_optimal());
  int rounds = 0;
  while (!solver.terminal()) {
    ASSERT_TRUE(solver.price_refinement(solver.price_refinement_budget()));
    ASSERT_TRUE(solver.is_epsilon_optimal());
    ASSERT_LT(++rounds, 64);
  }
  EXPECT_EQ(solver.flow_vector(), optimal);
  EXPECT_EQ(solver.total_excess(), 0);
  EXPECT_EQ(solver.stats().pushes, 0);
}

TEST(PriceRefinement, ExhaustedBudgetChangesNothing) {
  const auto inst = fixture_a();
  CostScalingSolver solver(inst.net);
  const std::vector<std::uint8_t> optimal = {1, 1, 0, 0, 1, 1, 1};
  for (ArcId a = 0; a < 7; ++a) solver.set_flow(a, optimal[static_cast<std::size_t>(a)]);
  const Cost eps = solver.epsilon();
  // Zero budget fails as soon as any distance needs correcting.
  if (!solver.price_refinement(0)) {
    EXPECT_EQ(solver.epsilon(), eps);
    for (NodeId v = 0; v < 5; ++v) EXPECT_EQ(solver.price(v), 0);
  }
}

TEST(ArcFixing, DisabledFixesNothing) {
  std::mt19937_64 rng(3);
  const auto inst = testing::random_instance(rng);
  SolveOptions options;
  options.arc_fixing = false;
  CostScalingSolver solver(inst.net, options);
  solver.solve();
  EXPECT_EQ(solver.fixed_arc_count(), 0);
  EXPECT_EQ(solver.stats().fixed_arcs_max, 0);
}

}  // namespace
}  // namespace circflow
