#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "circflow/network.hpp"
#include "circflow/trajectories.hpp"

namespace circflow {

struct SceneConfig {
  std::size_t targets = 10;
  std::int32_t frames = 20;
  std::size_t dimensions = 2;
  double extent = 100.0;      // start positions are uniform in [0, extent)^d
  double max_speed = 1.0;     // per component, per frame
  double jitter = 0.1;        // Gaussian position noise, standard deviation
  double miss_rate = 0.0;     // chance that a target is not detected in a frame
  double clutter_rate = 0.0;  // mean clutter detections per frame (Poisson)
  // Every target lives for the whole sequence unless this is set, in which
  // case each one starts and ends at uniformly drawn frames.
  bool staggered = false;
  std::uint64_t seed = 0;
};

struct SyntheticScene {
  std::vector<Detection> detections;  // sorted by frame, ids equal indices
  std::vector<std::int64_t> truth;    // target per detection, -1 for clutter
  std::size_t targets = 0;
};

/// Constant-velocity targets with Gaussian jitter, Bernoulli misses and
/// uniform clutter. Deterministic for a given config.
SyntheticScene generate_scene(const SceneConfig& config);

/// Pairs of targets whose straight paths cross in an X halfway through the
/// sequence, plus light misses and clutter.
SyntheticScene crossing_targets_scene(std::uint64_t seed, std::size_t pairs = 12, std::int32_t frames = 30);

/// Consecutive detected footprints of one target that carry different
/// trajectory labels, summed over targets. Footprints left out of every
/// trajectory are skipped rather than counted.
std::size_t count_id_switches(const TrajectorySet& set, const SyntheticScene& scene);

}  // namespace circflow
