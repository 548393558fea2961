#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace circflow {

using NodeId = std::int32_t;
using ArcId = std::int32_t;
using Cost = std::int64_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr ArcId kNoArc = -1;

// Largest scaled-integer arc cost magnitude accepted by build_network.
// Beyond this the solver's internal price arithmetic can overflow on
// million-node networks.
inline constexpr Cost kMaxScaledCost = Cost{1} << 40;

/// Raised when a solver or decoder detects a broken internal invariant.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One detected object snapshot.
struct Detection {
  std::int64_t id = 0;
  std::int32_t frame = 0;
  std::vector<double> position;
  std::vector<double> features;
  std::optional<double> beta;  // false-positive probability; unset: the configured global value
};

enum class ArcKind : std::uint8_t { Enter, Observation, Transition, Exit };

std::string_view to_string(ArcKind kind);
std::optional<ArcKind> parse_arc_kind(std::string_view text);

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  Cost cost = 0;
  ArcKind kind = ArcKind::Transition;
};

struct TransitionCost {
  std::size_t from = 0;  // index into the detection list
  std::size_t to = 0;
  double cost = 0.0;
};

/// Real-valued costs for every detection and every allowed transition.
/// Indices refer to positions in the detection list.
struct CostAssignment {
  std::vector<double> observation;  // log(beta / (1 - beta))
  std::vector<double> enter;
  std::vector<double> exit;
  std::vector<TransitionCost> transitions;

  std::size_t size() const { return observation.size(); }
};

/// Unit-capacity circulation network with a single hub node.
///
/// Layout: node 0 is the hub s, detection i owns pre-node 2i+1 and
/// post-node 2i+2. Every forward arc a has two residual copies: residual
/// id 2a runs tail->head, residual id 2a+1 runs head->tail, so the twin of
/// residual arc r is r ^ 1.
class CirculationNetwork {
 public:
  /// Hub only, no arcs.
  CirculationNetwork() = default;

  /// Builds adjacency for an arbitrary arc list. Only index ranges are
  /// checked; structural invariants are left to validate_network.
  static CirculationNetwork from_arcs(NodeId node_count, std::vector<Arc> arcs,
                                      std::vector<std::int64_t> detection_ids = {});

  NodeId node_count() const { return node_count_; }
  ArcId arc_count() const { return static_cast<ArcId>(arcs_.size()); }
  Cost max_abs_cost() const { return max_abs_cost_; }
  NodeId dummy() const { return 0; }

  std::size_t detection_count() const { return detection_ids_.size(); }
  static NodeId pre_node(std::size_t detection) { return static_cast<NodeId>(2 * detection + 1); }
  static NodeId post_node(std::size_t detection) { return static_cast<NodeId>(2 * detection + 2); }
  /// Detection index owning node v, or nullopt for the hub.
  std::optional<std::size_t> detection_of(NodeId v) const;
  std::int64_t detection_id(std::size_t detection) const { return detection_ids_.at(detection); }
  std::span<const std::int64_t> detection_ids() const { return detection_ids_; }

  const Arc& arc(ArcId a) const { return arcs_[static_cast<std::size_t>(a)]; }
  std::span<const Arc> arcs() const { return arcs_; }

  /// Forward arcs leaving / entering v.
  std::span<const ArcId> out_arcs(NodeId v) const { return slice(out_offsets_, out_list_, v); }
  std::span<const ArcId> in_arcs(NodeId v) const { return slice(in_offsets_, in_list_, v); }
  /// Residual arc ids whose tail is v (both orientations).
  std::span<const ArcId> residual_out(NodeId v) const { return slice(res_offsets_, res_list_, v); }

  NodeId residual_tail(ArcId r) const {
    const Arc& a = arcs_[static_cast<std::size_t>(r >> 1)];
    return (r & 1) ? a.head : a.tail;
  }
  NodeId residual_head(ArcId r) const {
    const Arc& a = arcs_[static_cast<std::size_t>(r >> 1)];
    return (r & 1) ? a.tail : a.head;
  }
  Cost residual_cost(ArcId r) const {
    const Cost c = arcs_[static_cast<std::size_t>(r >> 1)].cost;
    return (r & 1) ? -c : c;
  }

  /// Same topology, new arc costs (one per forward arc).
  CirculationNetwork with_costs(std::span<const Cost> costs) const;

 private:
  static std::span<const ArcId> slice(const std::vector<std::int64_t>& offsets,
                                      const std::vector<ArcId>& list, NodeId v) {
    const auto begin = offsets[static_cast<std::size_t>(v)];
    const auto end = offsets[static_cast<std::size_t>(v) + 1];
    return std::span<const ArcId>(list.data() + begin, static_cast<std::size_t>(end - begin));
  }

  NodeId node_count_ = 1;
  std::vector<Arc> arcs_;
  std::vector<std::int64_t> detection_ids_;
  Cost max_abs_cost_ = 0;
  std::vector<std::int64_t> out_offsets_{0, 0}, in_offsets_{0, 0}, res_offsets_{0, 0};
  std::vector<ArcId> out_list_, in_list_, res_list_;
};

struct BuildOptions {
  // Real costs are multiplied by this and rounded to the nearest integer.
  std::int64_t cost_scale = 1'000'000;
};

/// Builds the circulation network: per detection an Enter, Observation and
/// Exit arc (in that order), followed by one Transition arc per allowed pair.
/// Throws std::invalid_argument on temporally invalid pairs, non-finite or
/// out-of-range costs, and duplicate detection ids.
CirculationNetwork build_network(std::span<const Detection> detections, const CostAssignment& costs,
                                 const BuildOptions& options = {});

/// Scaled-integer conversion shared by every module that feeds the solver.
Cost scale_cost(double cost, std::int64_t scale);

struct ValidationReport {
  bool acyclic_without_hub = true;
  bool unit_vertex_capacity = true;
  bool pairing = true;
  std::optional<std::string> first_violation;

  bool ok() const { return acyclic_without_hub && unit_vertex_capacity && pairing; }
};

ValidationReport validate_network(const CirculationNetwork& net);

}  // namespace circflow
