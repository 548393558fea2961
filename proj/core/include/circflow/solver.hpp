#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "circflow/network.hpp"

namespace circflow {

struct SolveOptions {
  bool arc_fixing = true;
  bool price_refinement = true;
  // Step 2 of RESTORE stops after push_budget_factor * m unit pushes.
  std::int64_t push_budget_factor = 2;
  // Overrides the arc-fixing threshold (internal cost units). Default is 2 n eps.
  std::optional<Cost> fixing_threshold;
  // Verify eps-optimality and record eps after every refine iteration.
  bool record_trace = false;
};

struct SolveStats {
  std::int64_t refine_iterations = 0;
  std::int64_t restore_iterations = 0;
  std::int64_t pushes = 0;
  std::int64_t relabels = 0;
  std::int64_t set_relabel_calls = 0;
  std::int64_t set_relabel_rounds = 0;
  std::int64_t price_refinement_attempts = 0;
  std::int64_t price_refinement_successes = 0;
  std::int64_t arcs_scanned = 0;
  std::int64_t fixed_arcs_max = 0;
  std::int64_t fixing_fallbacks = 0;
  std::int64_t step2_without_progress = 0;
  Cost cost_multiplier = 1;
  Cost initial_epsilon = 0;
  Cost final_epsilon = 0;
  bool epsilon_optimal_each_refine = true;
  std::vector<Cost> epsilon_trace;
};

struct SolveResult {
  std::vector<std::uint8_t> flow;  // one entry per forward arc
  Cost total_cost = 0;             // in the network's scaled-integer units
  SolveStats stats;
};

/// Output of set-relabel: for every node that joined the deficit-reachable
/// set, the round it joined and the residual arc leading one step closer to a
/// deficit node. Step 2 pushes along these arcs first.
struct BlockingStructure {
  std::vector<ArcId> preferred;
  std::vector<std::int64_t> join_round;  // -1 when the node never joined
  std::int64_t rounds = 0;
  std::vector<NodeId> excess_nodes;

  bool empty() const { return excess_nodes.empty(); }
};

/// Cost-scaling minimum-cost circulation solver for unit-capacity networks.
///
/// Arc costs are multiplied internally by n+1 so that an eps of one
/// internal unit certifies optimality. The refine loop halves eps,
/// saturates admissible arcs, restores feasibility by alternating
/// set-relabel with budgeted push/relabel along the resulting blocking
/// structure, and then tries to shrink eps further by price refinement.
///
/// The network must outlive the solver.
class CostScalingSolver {
 public:
  explicit CostScalingSolver(const CirculationNetwork& net, SolveOptions options = {});

  SolveResult solve();

  // Individual phases, exposed for inspection and testing.
  void refine_once();
  BlockingStructure set_relabel();
  void push_relabel_along_blocking(const BlockingStructure& blocking, std::int64_t push_budget);
  /// Tries to certify (eps/2)-optimality by a price shift alone. On success
  /// prices move and eps halves; on failure nothing changes.
  bool price_refinement(std::int64_t scan_budget);
  void update_arc_fixing();
  void saturate_admissible_arcs();
  void restore();

  const CirculationNetwork& network() const { return *net_; }
  const SolveOptions& options() const { return options_; }
  const SolveStats& stats() const { return stats_; }

  Cost cost_multiplier() const { return multiplier_; }
  Cost epsilon() const { return epsilon_; }
  void set_epsilon(Cost eps) { epsilon_ = eps; }
  /// Integer analogue of eps < 1/n.
  bool terminal() const;
  std::int64_t default_push_budget() const;
  std::int64_t price_refinement_budget() const;

  int flow(ArcId a) const { return flow_[static_cast<std::size_t>(a)]; }
  void set_flow(ArcId a, int value);
  Cost price(NodeId v) const { return price_[static_cast<std::size_t>(v)]; }
  void set_price(NodeId v, Cost p) { price_[static_cast<std::size_t>(v)] = p; }
  std::int64_t excess(NodeId v) const { return excess_[static_cast<std::size_t>(v)]; }
  std::int64_t total_excess() const;
  bool is_fixed(ArcId a) const { return fixed_[static_cast<std::size_t>(a)] != 0; }
  std::int64_t fixed_arc_count() const;

  bool residual(ArcId r) const {
    const auto f = flow_[static_cast<std::size_t>(r >> 1)];
    return (r & 1) ? f != 0 : f == 0;
  }
  Cost reduced_cost(ArcId r) const {
    return net_->residual_cost(r) * multiplier_ + price_[static_cast<std::size_t>(net_->residual_tail(r))] -
           price_[static_cast<std::size_t>(net_->residual_head(r))];
  }
  bool admissible(ArcId r) const { return residual(r) && reduced_cost(r) < 0; }

  /// Nodes from which a deficit node is reachable over admissible arcs,
  /// deficit nodes included.
  std::vector<NodeId> deficit_reachable_set() const;
  bool admissible_graph_acyclic() const;
  /// Every residual arc, fixed or not, has reduced cost >= -eps.
  bool is_epsilon_optimal() const;

  std::vector<std::uint8_t> flow_vector() const { return flow_; }
  Cost total_cost() const;

 private:
  bool usable(ArcId r) const { return residual(r) && fixed_[static_cast<std::size_t>(r >> 1)] == 0; }
  void push(ArcId r);
  void relabel(NodeId v);
  ArcId find_admissible(NodeId v, const BlockingStructure& blocking);
  void release_fixed_arcs();

  const CirculationNetwork* net_;
  SolveOptions options_;
  SolveStats stats_;
  Cost multiplier_ = 1;
  Cost epsilon_ = 0;
  std::vector<std::uint8_t> flow_;
  std::vector<std::uint8_t> fixed_;
  std::vector<Cost> price_;
  std::vector<std::int64_t> excess_;
  std::vector<std::uint32_t> current_arc_;
};

SolveResult solve(const CirculationNetwork& net, const SolveOptions& options = {});

/// True iff every residual arc has cost * multiplier + p(tail) - p(head) >= -eps.
bool check_epsilon_optimality(const CirculationNetwork& net, std::span<const std::uint8_t> flow,
                              std::span<const Cost> prices, Cost epsilon, Cost cost_multiplier = 1);

}  // namespace circflow
