#include "circflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace circflow {

namespace {

struct Footprint {
  std::int32_t frame;
  std::vector<double> position;
  std::int64_t target;
};

SyntheticScene assemble(std::vector<Footprint> footprints, std::size_t targets, std::mt19937_64& rng) {
  // Shuffle inside each frame so that ids carry no identity information.
  std::shuffle(footprints.begin(), footprints.end(), rng);
  std::stable_sort(footprints.begin(), footprints.end(),
                   [](const Footprint& a, const Footprint& b) { return a.frame < b.frame; });
  std::uniform_real_distribution<double> true_beta(0.02, 0.2);
  std::uniform_real_distribution<double> clutter_beta(0.3, 0.9);
  SyntheticScene scene;
  scene.targets = targets;
  scene.detections.reserve(footprints.size());
  for (Footprint& f : footprints) {
    Detection d;
    d.id = static_cast<std::int64_t>(scene.detections.size());
    d.frame = f.frame;
    d.position = std::move(f.position);
    d.beta = f.target < 0 ? clutter_beta(rng) : true_beta(rng);
    scene.detections.push_back(std::move(d));
    scene.truth.push_back(f.target);
  }
  return scene;
}

void add_clutter(std::vector<Footprint>& out, std::int32_t frames, std::size_t dimensions, double extent, double rate,
                 std::mt19937_64& rng) {
  if (rate <= 0.0) return;
  std::poisson_distribution<int> count(rate);
  std::uniform_real_distribution<double> coordinate(0.0, extent);
  for (std::int32_t f = 0; f < frames; ++f) {
    for (int c = count(rng); c > 0; --c) {
      std::vector<double> p(dimensions);
      for (double& x : p) x = coordinate(rng);
      out.push_back({f, std::move(p), -1});
    }
  }
}

}  // namespace

SyntheticScene generate_scene(const SceneConfig& config) {
  if (config.frames < 1 || config.dimensions < 1) throw std::invalid_argument("scene needs frames and dimensions");
  if (!(config.miss_rate >= 0.0 && config.miss_rate < 1.0)) throw std::invalid_argument("miss_rate must lie in [0, 1)");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> start(0.0, config.extent);
  std::uniform_real_distribution<double> speed(-config.max_speed, config.max_speed);
  std::normal_distribution<double> noise(0.0, config.jitter);
  std::bernoulli_distribution missed(config.miss_rate);

  std::vector<Footprint> footprints;
  footprints.reserve(config.targets * static_cast<std::size_t>(config.frames));
  for (std::size_t t = 0; t < config.targets; ++t) {
    std::vector<double> origin(config.dimensions), velocity(config.dimensions);
    for (double& x : origin) x = start(rng);
    for (double& v : velocity) v = speed(rng);
    std::int32_t first = 0;
    std::int32_t last = config.frames - 1;
    if (config.staggered && config.frames > 1) {
      first = std::uniform_int_distribution<std::int32_t>(0, config.frames - 2)(rng);
      last = std::uniform_int_distribution<std::int32_t>(first + 1, config.frames - 1)(rng);
    }
    for (std::int32_t f = first; f <= last; ++f) {
      const bool miss = missed(rng);
      std::vector<double> p(config.dimensions);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = origin[k] + velocity[k] * (f - first) + noise(rng);
      if (!miss) footprints.push_back({f, std::move(p), static_cast<std::int64_t>(t)});
    }
  }
  add_clutter(footprints, config.frames, config.dimensions, config.extent, config.clutter_rate, rng);
  return assemble(std::move(footprints), config.targets, rng);
}

SyntheticScene crossing_targets_scene(std::uint64_t seed, std::size_t pairs, std::int32_t frames) {
  if (frames < 3) throw std::invalid_argument("crossing scene needs at least three frames");
  std::mt19937_64 rng(seed);
  const double spacing = 120.0;
  const auto columns = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pairs))));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(1.5, 2.5);
  std::uniform_int_distribution<std::int32_t> meet(frames / 3, 2 * frames / 3);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::bernoulli_distribution missed(0.05);

  std::vector<Footprint> footprints;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double cx = spacing * (0.5 + static_cast<double>(p % columns));
    const double cy = spacing * (0.5 + static_cast<double>(p / columns));
    const double heading = angle(rng);
    const double v = speed(rng);
    const std::int32_t crossing = meet(rng);
    // Two headings a right angle apart; both paths pass the centre at `crossing`.
    for (int member = 0; member < 2; ++member) {
      const double a = heading + member * std::numbers::pi / 2.0;
      const double vx = v * std::cos(a);
      const double vy = v * std::sin(a);
      for (std::int32_t f = 0; f < frames; ++f) {
        const double dt = f - crossing;
        std::vector<double> pos{cx + vx * dt + noise(rng), cy + vy * dt + noise(rng)};
        if (!missed(rng)) footprints.push_back({f, std::move(pos), static_cast<std::int64_t>(2 * p + member)});
      }
    }
  }
  add_clutter(footprints, frames, 2, spacing * static_cast<double>(columns), 0.5, rng);
  return assemble(std::move(footprints), 2 * pairs, rng);
}

std::size_t count_id_switches(const TrajectorySet& set, const SyntheticScene& scene) {
  const auto labels = set.labels(scene.detections.size());
  std::vector<std::ptrdiff_t> last(scene.targets, -1);
  std::size_t switches = 0;
  // Detections are sorted by frame, so one pass visits each target in time order.
  for (std::size_t i = 0; i < scene.detections.size(); ++i) {
    const std::int64_t target = scene.truth[i];
    if (target < 0 || labels[i] < 0) continue;
    auto& previous = last[static_cast<std::size_t>(target)];
    if (previous >= 0 && previous != labels[i]) ++switches;
    previous = labels[i];
  }
  return switches;
}

}  // namespace circflow
