#include "circflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_set>
#include <utility>

#include <fmt/format.h>

namespace circflow {

std::string_view to_string(ArcKind kind) {
  switch (kind) {
    case ArcKind::Enter: return "enter";
    case ArcKind::Observation: return "observation";
    case ArcKind::Transition: return "transition";
    case ArcKind::Exit: return "exit";
  }
  return "unknown";
}

std::optional<ArcKind> parse_arc_kind(std::string_view text) {
  if (text == "enter") return ArcKind::Enter;
  if (text == "observation") return ArcKind::Observation;
  if (text == "transition") return ArcKind::Transition;
  if (text == "exit") return ArcKind::Exit;
  return std::nullopt;
}

namespace {

// Counting-sort style CSR fill keyed by `key(i)` for i in [0, count).
template <typename Key>
void fill_csr(std::size_t nodes, std::size_t count, Key key, std::vector<std::int64_t>& offsets,
              std::vector<ArcId>& list) {
  offsets.assign(nodes + 1, 0);
  for (std::size_t i = 0; i < count; ++i) ++offsets[static_cast<std::size_t>(key(i)) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  list.assign(count, kNoArc);
  std::vector<std::int64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    list[static_cast<std::size_t>(cursor[static_cast<std::size_t>(key(i))]++)] = static_cast<ArcId>(i);
  }
}

}  // namespace

CirculationNetwork CirculationNetwork::from_arcs(NodeId node_count, std::vector<Arc> arcs,
                                                 std::vector<std::int64_t> detection_ids) {
  if (node_count < 1) throw std::invalid_argument("network needs at least the hub node");
  if (arcs.size() > static_cast<std::size_t>(std::numeric_limits<ArcId>::max() / 2)) {
    throw std::invalid_argument("too many arcs");
  }
  const std::size_t detections = static_cast<std::size_t>(node_count - 1) / 2;
  if (detection_ids.empty()) {
    detection_ids.resize(detections);
    std::iota(detection_ids.begin(), detection_ids.end(), std::int64_t{0});
  } else if (detection_ids.size() != detections) {
    throw std::invalid_argument("detection id count does not match node count");
  }

  CirculationNetwork net;
  net.node_count_ = node_count;
  net.detection_ids_ = std::move(detection_ids);
  for (const Arc& a : arcs) {
    if (a.tail < 0 || a.tail >= node_count || a.head < 0 || a.head >= node_count) {
      throw std::invalid_argument(fmt::format("arc {}->{} references a node outside [0, {})", a.tail,
                                              a.head, node_count));
    }
    if (a.cost == std::numeric_limits<Cost>::min()) throw std::invalid_argument("arc cost out of range");
    net.max_abs_cost_ = std::max(net.max_abs_cost_, a.cost < 0 ? -a.cost : a.cost);
  }
  net.arcs_ = std::move(arcs);

  const auto n = static_cast<std::size_t>(node_count);
  const std::size_t m = net.arcs_.size();
  const auto& list = net.arcs_;
  fill_csr(n, m, [&](std::size_t a) { return list[a].tail; }, net.out_offsets_, net.out_list_);
  fill_csr(n, m, [&](std::size_t a) { return list[a].head; }, net.in_offsets_, net.in_list_);
  fill_csr(
      n, 2 * m,
      [&](std::size_t r) { return (r & 1) ? list[r >> 1].head : list[r >> 1].tail; },
      net.res_offsets_, net.res_list_);
  return net;
}

std::optional<std::size_t> CirculationNetwork::detection_of(NodeId v) const {
  if (v <= 0 || v >= node_count_) return std::nullopt;
  return static_cast<std::size_t>((v - 1) / 2);
}

CirculationNetwork CirculationNetwork::with_costs(std::span<const Cost> costs) const {
  if (costs.size() != arcs_.size()) throw std::invalid_argument("cost vector length differs from arc count");
  CirculationNetwork copy = *this;
  copy.max_abs_cost_ = 0;
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    if (costs[a] == std::numeric_limits<Cost>::min()) throw std::invalid_argument("arc cost out of range");
    copy.arcs_[a].cost = costs[a];
    copy.max_abs_cost_ = std::max(copy.max_abs_cost_, costs[a] < 0 ? -costs[a] : costs[a]);
  }
  return copy;
}

Cost scale_cost(double cost, std::int64_t scale) {
  if (!std::isfinite(cost)) throw std::invalid_argument("non-finite cost");
  if (scale <= 0) throw std::invalid_argument("cost scale must be positive");
  const double scaled = std::round(cost * static_cast<double>(scale));
  if (!(std::fabs(scaled) <= static_cast<double>(kMaxScaledCost))) {
    throw std::invalid_argument(
        fmt::format("scaled cost {} exceeds the supported magnitude {}", scaled, kMaxScaledCost));
  }
  return static_cast<Cost>(scaled);
}

CirculationNetwork build_network(std::span<const Detection> detections, const CostAssignment& costs,
                                 const BuildOptions& options) {
  const std::size_t count = detections.size();
  if (costs.observation.size() != count || costs.enter.size() != count || costs.exit.size() != count) {
    throw std::invalid_argument("cost assignment does not cover every detection");
  }
  if (count > static_cast<std::size_t>((std::numeric_limits<NodeId>::max() - 1) / 2)) {
    throw std::invalid_argument("too many detections");
  }

  std::vector<std::int64_t> ids;
  ids.reserve(count);
  std::unordered_set<std::int64_t> seen;
  seen.reserve(count);
  for (const Detection& d : detections) {
    if (!seen.insert(d.id).second) throw std::invalid_argument(fmt::format("duplicate detection id {}", d.id));
    ids.push_back(d.id);
  }

  const std::int64_t scale = options.cost_scale;
  std::vector<Arc> arcs;
  arcs.reserve(3 * count + costs.transitions.size());
  for (std::size_t i = 0; i < count; ++i) {
    const NodeId pre = CirculationNetwork::pre_node(i);
    const NodeId post = CirculationNetwork::post_node(i);
    arcs.push_back({0, pre, scale_cost(costs.enter[i], scale), ArcKind::Enter});
    arcs.push_back({pre, post, scale_cost(costs.observation[i], scale), ArcKind::Observation});
    arcs.push_back({post, 0, scale_cost(costs.exit[i], scale), ArcKind::Exit});
  }

  // Duplicate pairs collapse onto the cheaper cost; sorting keeps arc order deterministic.
  struct Pair {
    std::size_t from, to;
    Cost cost;
  };
  std::vector<Pair> pairs;
  pairs.reserve(costs.transitions.size());
  for (const TransitionCost& t : costs.transitions) {
    if (t.from >= count || t.to >= count) throw std::invalid_argument("transition references unknown detection");
    if (detections[t.from].frame >= detections[t.to].frame) {
      throw std::invalid_argument(fmt::format("transition {}->{} does not move forward in time (frames {} and {})",
                                              detections[t.from].id, detections[t.to].id,
                                              detections[t.from].frame, detections[t.to].frame));
    }
    pairs.push_back({t.from, t.to, scale_cost(t.cost, scale)});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.from, a.to, a.cost) < std::tie(b.from, b.to, b.cost);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k > 0 && pairs[k].from == pairs[k - 1].from && pairs[k].to == pairs[k - 1].to) continue;
    arcs.push_back({CirculationNetwork::post_node(pairs[k].from), CirculationNetwork::pre_node(pairs[k].to),
                    pairs[k].cost, ArcKind::Transition});
  }

  return CirculationNetwork::from_arcs(static_cast<NodeId>(2 * count + 1), std::move(arcs), std::move(ids));
}

ValidationReport validate_network(const CirculationNetwork& net) {
  ValidationReport report;
  auto fail = [&report](bool& flag, std::string message) {
    flag = false;
    if (!report.first_violation) report.first_violation = std::move(message);
  };

  const NodeId n = net.node_count();
  const NodeId s = net.dummy();

  // Pairing: pre-node 2i+1 has exactly one outgoing arc, to 2i+2; post-node
  // has exactly one incoming arc, from 2i+1. Kinds must match endpoints.
  if ((n - 1) % 2 != 0) fail(report.pairing, fmt::format("node count {} is not 2k+1", n));
  for (std::size_t i = 0; i < net.detection_count(); ++i) {
    const NodeId pre = CirculationNetwork::pre_node(i);
    const NodeId post = CirculationNetwork::post_node(i);
    const auto out = net.out_arcs(pre);
    const auto in = net.in_arcs(post);
    if (out.size() != 1 || net.arc(out[0]).head != post) {
      fail(report.pairing, fmt::format("pre-node {} must have exactly one outgoing arc, to {}", pre, post));
    }
    if (in.size() != 1 || net.arc(in[0]).tail != pre) {
      fail(report.pairing, fmt::format("post-node {} must have exactly one incoming arc, from {}", post, pre));
    }
  }
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    const bool tail_pre = arc.tail != s && (arc.tail % 2) == 1;
    const bool head_pre = arc.head != s && (arc.head % 2) == 1;
    bool consistent = false;
    switch (arc.kind) {
      case ArcKind::Enter: consistent = arc.tail == s && head_pre; break;
      case ArcKind::Observation: consistent = tail_pre && arc.head == arc.tail + 1; break;
      case ArcKind::Transition: consistent = arc.tail != s && !tail_pre && head_pre; break;
      case ArcKind::Exit: consistent = arc.tail != s && !tail_pre && arc.head == s; break;
    }
    if (!consistent) {
      fail(report.pairing, fmt::format("arc {} ({}->{}) has kind {} inconsistent with its endpoints", a,
                                       arc.tail, arc.head, to_string(arc.kind)));
    }
  }

  for (NodeId v = 1; v < n; ++v) {
    const auto in = net.in_arcs(v).size();
    const auto out = net.out_arcs(v).size();
    if (in != 1 && out != 1) {
      fail(report.unit_vertex_capacity,
           fmt::format("node {} has in-degree {} and out-degree {}", v, in, out));
    }
  }

  // Kahn's algorithm on G \ s.
  std::vector<std::int32_t> indegree(static_cast<std::size_t>(n), 0);
  for (const Arc& arc : net.arcs()) {
    if (arc.tail != s && arc.head != s) ++indegree[static_cast<std::size_t>(arc.head)];
  }
  std::vector<NodeId> stack;
  for (NodeId v = 1; v < n; ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
  }
  NodeId visited = 0;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    ++visited;
    for (ArcId a : net.out_arcs(v)) {
      const NodeId w = net.arc(a).head;
      if (w != s && --indegree[static_cast<std::size_t>(w)] == 0) stack.push_back(w);
    }
  }
  if (visited != n - 1) {
    NodeId witness = kNoNode;
    for (NodeId v = 1; v < n && witness == kNoNode; ++v) {
      if (indegree[static_cast<std::size_t>(v)] > 0) witness = v;
    }
    fail(report.acyclic_without_hub, fmt::format("cycle avoiding the hub through node {}", witness));
  }
  return report;
}

}  // namespace circflow
