#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "circflow/network.hpp"

namespace circflow {

/// Source/sink form of a circulation network: the hub is split into a
/// source (tail of every Enter arc) and a sink (head of every Exit arc).
/// Arc ids match the circulation network, so flows translate one to one.
class FlowNetwork {
 public:
  explicit FlowNetwork(const CirculationNetwork& circulation);

  NodeId node_count() const { return node_count_; }
  NodeId source() const { return 0; }
  NodeId sink() const { return node_count_ - 1; }
  ArcId arc_count() const { return static_cast<ArcId>(tail_.size()); }
  NodeId tail(ArcId a) const { return tail_[static_cast<std::size_t>(a)]; }
  NodeId head(ArcId a) const { return head_[static_cast<std::size_t>(a)]; }
  Cost cost(ArcId a) const { return cost_[static_cast<std::size_t>(a)]; }

  /// Residual arcs leaving v (id 2a forward, 2a+1 backward).
  std::span<const ArcId> residual_out(NodeId v) const {
    const auto begin = offsets_[static_cast<std::size_t>(v)];
    const auto end = offsets_[static_cast<std::size_t>(v) + 1];
    return {residual_list_.data() + begin, static_cast<std::size_t>(end - begin)};
  }
  NodeId residual_tail(ArcId r) const { return (r & 1) ? head(r >> 1) : tail(r >> 1); }
  NodeId residual_head(ArcId r) const { return (r & 1) ? tail(r >> 1) : head(r >> 1); }
  Cost residual_cost(ArcId r) const { return (r & 1) ? -cost(r >> 1) : cost(r >> 1); }

  /// Topological order of all nodes (the flow network is a DAG).
  std::vector<NodeId> topological_order() const;

 private:
  NodeId node_count_ = 2;
  std::vector<NodeId> tail_, head_;
  std::vector<Cost> cost_;
  std::vector<std::int64_t> offsets_;
  std::vector<ArcId> residual_list_;
};

struct SspResult {
  std::vector<std::uint8_t> flow;
  std::vector<Cost> cost_curve;  // cost_curve[k] = cost after k augmentations
  Cost cost = 0;                 // cost of the returned flow
  std::int64_t augmentations = 0;
};

/// Successive shortest paths with node potentials and a binary-heap Dijkstra.
/// Without `flow_amount` it stops before the first augmentation that would
/// not lower the cost; with it, exactly that many paths are sent (or fewer
/// if the sink becomes unreachable).
SspResult ssp_solve(const FlowNetwork& net, std::optional<std::int64_t> flow_amount = std::nullopt);

/// Successive shortest paths that keeps the previous shortest-path tree and
/// recomputes labels only in the subtree cut off by the last augmentation.
SspResult dssp_solve(const FlowNetwork& net);

struct OracleResult {
  Cost cost = 0;
  std::vector<std::vector<std::size_t>> cycles;  // detection indices in order
};

inline constexpr std::size_t kOracleDetectionLimit = 16;

/// Exhaustive search over predecessor assignments (each selected detection
/// is entered from the hub or from one earlier selected detection that has
/// no successor yet). Throws std::length_error above kOracleDetectionLimit.
OracleResult brute_force_oracle(const CirculationNetwork& net);

}  // namespace circflow
