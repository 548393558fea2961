#include "circflow/trajectories.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

namespace circflow {

Cost TrajectorySet::total_cost() const {
  return std::accumulate(trajectories.begin(), trajectories.end(), Cost{0},
                         [](Cost sum, const Trajectory& t) { return sum + t.cost; });
}

std::vector<std::ptrdiff_t> TrajectorySet::labels(std::size_t detection_count) const {
  std::vector<std::ptrdiff_t> out(detection_count, -1);
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    for (std::size_t d : trajectories[k].detections) out.at(d) = static_cast<std::ptrdiff_t>(k);
  }
  return out;
}

TrajectorySet flow_to_trajectories(std::span<const std::uint8_t> flow, const CirculationNetwork& net) {
  if (flow.size() != static_cast<std::size_t>(net.arc_count())) {
    throw std::invalid_argument("flow vector length differs from arc count");
  }
  // Conservation first, so the walk below cannot wander.
  std::vector<std::int64_t> balance(static_cast<std::size_t>(net.node_count()), 0);
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    if (flow[static_cast<std::size_t>(a)] > 1) throw InvariantViolation("flow exceeds unit capacity");
    if (!flow[static_cast<std::size_t>(a)]) continue;
    --balance[static_cast<std::size_t>(net.arc(a).tail)];
    ++balance[static_cast<std::size_t>(net.arc(a).head)];
  }
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (balance[static_cast<std::size_t>(v)] != 0) {
      throw InvariantViolation(fmt::format("flow violates conservation at node {}", v));
    }
  }

  TrajectorySet set;
  std::vector<std::uint8_t> used(flow.size(), 0);
  const NodeId hub = net.dummy();
  for (ArcId start : net.out_arcs(hub)) {
    if (!flow[static_cast<std::size_t>(start)]) continue;
    Trajectory trajectory;
    ArcId a = start;
    for (;;) {
      used[static_cast<std::size_t>(a)] = 1;
      trajectory.cost += net.arc(a).cost;
      const NodeId v = net.arc(a).head;
      if (v == hub) break;
      if (const auto d = net.detection_of(v); d && v == CirculationNetwork::pre_node(*d)) {
        trajectory.detections.push_back(*d);
      }
      ArcId next = kNoArc;
      for (ArcId b : net.out_arcs(v)) {
        if (flow[static_cast<std::size_t>(b)] && !used[static_cast<std::size_t>(b)]) {
          next = b;
          break;
        }
      }
      if (next == kNoArc) throw InvariantViolation(fmt::format("flow cycle breaks at node {}", v));
      a = next;
    }
    set.trajectories.push_back(std::move(trajectory));
  }
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    if (flow[static_cast<std::size_t>(a)] && !used[static_cast<std::size_t>(a)]) {
      throw InvariantViolation("flow contains a cycle that avoids the hub");
    }
  }
  return set;
}

bool is_valid_trajectory_set(const TrajectorySet& set, std::span<const Detection> detections) {
  std::vector<std::uint8_t> seen(detections.size(), 0);
  for (const Trajectory& t : set.trajectories) {
    for (std::size_t k = 0; k < t.detections.size(); ++k) {
      const std::size_t d = t.detections[k];
      if (d >= detections.size() || seen[d]) return false;
      seen[d] = 1;
      if (k > 0 && detections[t.detections[k - 1]].frame >= detections[d].frame) return false;
    }
  }
  return true;
}

void sort_canonically(TrajectorySet& set, std::span<const Detection> detections) {
  auto& list = set.trajectories;
  list.erase(std::remove_if(list.begin(), list.end(), [](const Trajectory& t) { return t.detections.empty(); }),
             list.end());
  auto key = [&](const Trajectory& t) {
    const Detection& first = detections[t.detections.front()];
    return std::make_tuple(first.frame, first.id);
  };
  std::stable_sort(list.begin(), list.end(), [&](const Trajectory& a, const Trajectory& b) { return key(a) < key(b); });
}

}  // namespace circflow
