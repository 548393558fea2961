#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "circflow/network.hpp"

namespace circflow {

struct Trajectory {
  std::vector<std::size_t> detections;  // indices into the detection list, in time order
  Cost cost = 0;                        // scaled-integer cost of the cycle through the hub
};

struct TrajectorySet {
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
  Cost total_cost() const;
  /// Trajectory index per detection, -1 for detections left out.
  std::vector<std::ptrdiff_t> labels(std::size_t detection_count) const;
};

/// Walks every saturated Enter arc around its cycle back to the hub.
/// Throws InvariantViolation if the flow is not a unit circulation.
TrajectorySet flow_to_trajectories(std::span<const std::uint8_t> flow, const CirculationNetwork& net);

/// Checks the set invariants: disjoint trajectories, strictly increasing
/// frames inside each one.
bool is_valid_trajectory_set(const TrajectorySet& set, std::span<const Detection> detections);

/// Drops empty trajectories and orders the rest by (first frame, first
/// detection id). Output files and per-detection labels use this order.
void sort_canonically(TrajectorySet& set, std::span<const Detection> detections);

}  // namespace circflow
