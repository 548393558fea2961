#include "circflow/cost_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace circflow {

double clamp_probability(double p) {
  if (std::isnan(p)) throw std::invalid_argument("probability is NaN");
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double neg_log(double p, bool clamp) {
  if (clamp) p = clamp_probability(p);
  if (!(p > 0.0)) throw std::invalid_argument(fmt::format("cannot take -log of probability {}", p));
  const double c = -std::log(p);
  return c == 0.0 ? 0.0 : c;  // no -0
}

void CostModelConfig::validate() const {
  auto probability = [](const char* name, std::optional<double> p) {
    if (p && !(*p > 0.0 && *p < 1.0)) throw std::invalid_argument(fmt::format("{} must lie in (0, 1)", name));
  };
  probability("p_enter", p_enter);
  probability("p_exit", p_exit);
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw std::invalid_argument("beta clamp bounds must satisfy 0 < beta_min <= beta_max < 1");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (gating_k < 1) throw std::invalid_argument("gating_k must be at least 1");
  if (jump_window < 1) throw std::invalid_argument("jump_window must be at least 1");
  if (!(distance_scale > 0.0) || !std::isfinite(distance_scale)) {
    throw std::invalid_argument("distance_scale must be positive");
  }
  if (cost_scale < 1) throw std::invalid_argument("cost_scale must be a positive integer");
}

EmpiricalDistanceModel::EmpiricalDistanceModel(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw std::invalid_argument("empirical distance model needs at least one sample");
  for (double s : samples_) {
    if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument(fmt::format("invalid distance sample {}", s));
  }
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDistanceModel::raw_p_value(double d) const {
  const auto at_least = samples_.end() - std::lower_bound(samples_.begin(), samples_.end(), d);
  return static_cast<double>(at_least) / static_cast<double>(samples_.size());
}

double EmpiricalDistanceModel::p_value(double d) const {
  const auto at_least = samples_.end() - std::lower_bound(samples_.begin(), samples_.end(), d);
  return static_cast<double>(at_least + 1) / static_cast<double>(samples_.size() + 1);
}

EmpiricalDistanceModel fit_empirical_distance(std::vector<double> displacements) {
  return EmpiricalDistanceModel(std::move(displacements));
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(fmt::format("position dimensions differ ({} vs {})", a.size(), b.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum);
}

namespace {

using FrameIndex = std::map<std::int32_t, std::vector<std::size_t>>;

FrameIndex index_by_frame(std::span<const Detection> detections) {
  FrameIndex frames;
  for (std::size_t i = 0; i < detections.size(); ++i) frames[detections[i].frame].push_back(i);
  return frames;
}

std::vector<double> predicted(const Detection& d, std::span<const std::vector<double>> velocity, std::size_t i,
                              int offset) {
  std::vector<double> p = d.position;
  if (velocity.empty() || velocity[i].empty()) return p;
  for (std::size_t k = 0; k < p.size() && k < velocity[i].size(); ++k) p[k] += velocity[i][k] * offset;
  return p;
}

// The k candidates in `pool` closest to `query`, ties by detection id.
std::vector<std::size_t> k_nearest(std::span<const Detection> detections, std::span<const std::size_t> pool,
                                   std::span<const double> query, std::size_t k) {
  std::vector<std::tuple<double, std::int64_t, std::size_t>> ranked;
  ranked.reserve(pool.size());
  for (std::size_t j : pool) ranked.emplace_back(euclidean(query, detections[j].position), detections[j].id, j);
  const std::size_t take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end());
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) out.push_back(std::get<2>(ranked[r]));
  return out;
}

}  // namespace

std::vector<CandidatePair> gate_transitions(std::span<const Detection> detections, const CostModelConfig& config,
                                            std::span<const std::vector<double>> velocity) {
  config.validate();
  if (!velocity.empty() && velocity.size() != detections.size()) {
    throw std::invalid_argument("velocity list length differs from detection count");
  }
  const FrameIndex frames = index_by_frame(detections);
  std::vector<CandidatePair> pairs;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (int offset = 1; offset <= config.jump_window; ++offset) {
      const auto it = frames.find(detections[i].frame + offset);
      if (it == frames.end()) continue;
      const auto query = predicted(detections[i], velocity, i, offset);
      for (std::size_t j : k_nearest(detections, it->second, query, static_cast<std::size_t>(config.gating_k))) {
        pairs.push_back({i, j});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const CandidatePair& a, const CandidatePair& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::pair<double, double> estimate_enter_exit(std::span<const Detection> detections, EnterExitEstimate rule) {
  if (detections.empty()) return {0.5, 0.5};
  const FrameIndex frames = index_by_frame(detections);
  const std::int32_t first = frames.begin()->first;
  const std::int32_t last = frames.rbegin()->first;
  double starts = 0.0;
  double ends = 0.0;
  std::size_t previous = frames.begin()->second.size();
  for (std::int32_t f = first + 1; f <= last; ++f) {
    const auto it = frames.find(f);
    const std::size_t count = it == frames.end() ? 0 : it->second.size();
    if (count > previous) starts += static_cast<double>(count - previous);
    if (count < previous) ends += static_cast<double>(previous - count);
    previous = count;
  }
  if (rule == EnterExitEstimate::Clamped) {
    starts = std::max(starts, 1.0);
    ends = std::max(ends, 1.0);
  }
  const double n = static_cast<double>(detections.size());
  return {clamp_probability(starts / n), clamp_probability(ends / n)};
}

std::vector<double> nearest_neighbour_displacements(std::span<const Detection> detections, double distance_scale) {
  const FrameIndex frames = index_by_frame(detections);
  std::vector<double> out;
  for (const auto& [frame, members] : frames) {
    const auto next = frames.find(frame + 1);
    if (next == frames.end()) continue;
    for (std::size_t i : members) {
      const auto nn = k_nearest(detections, next->second, detections[i].position, 1);
      out.push_back(euclidean(detections[i].position, detections[nn.front()].position) / distance_scale);
    }
  }
  return out;
}

CostAssignment probabilistic_costs(std::span<const Detection> detections, std::span<const CandidatePair> pairs,
                                   const CostModelConfig& config, const CostModelState& state) {
  config.validate();
  const std::size_t n = detections.size();
  CostAssignment out;
  out.observation.resize(n);
  out.enter.assign(n, neg_log(state.p_enter));
  out.exit.assign(n, neg_log(state.p_exit));
  for (std::size_t i = 0; i < n; ++i) {
    double beta = config.beta_policy == BetaPolicy::Global ? config.beta : detections[i].beta.value_or(config.beta);
    if (!std::isfinite(beta)) throw std::invalid_argument(fmt::format("detection {} has non-finite beta", i));
    beta = std::clamp(beta, config.beta_min, config.beta_max);
    out.observation[i] = std::log(beta / (1.0 - beta));
  }
  out.transitions.reserve(pairs.size());
  for (const CandidatePair& pair : pairs) {
    if (pair.from >= n || pair.to >= n) throw std::invalid_argument("candidate pair references unknown detection");
    const Detection& from = detections[pair.from];
    const Detection& to = detections[pair.to];
    const int gap = to.frame - from.frame;
    if (gap < 1) throw std::invalid_argument(fmt::format("pair ({}, {}) is not forward in time", pair.from, pair.to));
    const auto query = predicted(from, state.velocity, pair.from, gap);
    double p = state.distance.p_value(euclidean(query, to.position) / config.distance_scale);
    if (gap > 1) p *= state.p_jump;
    const double cost = neg_log(p);
    if (!std::isfinite(cost)) throw std::logic_error("transition cost is not finite after clamping");
    out.transitions.push_back({pair.from, pair.to, cost});
  }
  return out;
}

CostAssignment groundtruth_observation_costs(CostAssignment assignment) {
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const double c = -(assignment.enter.at(i) + assignment.exit.at(i));
    assignment.observation[i] = c == 0.0 ? 0.0 : c;
  }
  return assignment;
}

CostModelState initial_model(std::span<const Detection> detections, const CostModelConfig& config) {
  config.validate();
  CostModelState state;
  auto samples = nearest_neighbour_displacements(detections, config.distance_scale);
  if (!samples.empty()) state.distance = fit_empirical_distance(std::move(samples));
  const auto [enter, exit] = estimate_enter_exit(detections, config.estimate);
  state.p_enter = config.p_enter.value_or(enter);
  state.p_exit = config.p_exit.value_or(exit);
  state.p_jump = 1.0;
  return state;
}

std::vector<double> componentwise_median(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) return {};
  const std::size_t dim = vectors.front().size();
  std::vector<double> out(dim);
  std::vector<double> column(vectors.size());
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t r = 0; r < vectors.size(); ++r) {
      if (vectors[r].size() != dim) throw std::invalid_argument("median over vectors of different sizes");
      column[r] = vectors[r][k];
    }
    std::sort(column.begin(), column.end());
    const std::size_t m = column.size() / 2;
    out[k] = column.size() % 2 ? column[m] : 0.5 * (column[m - 1] + column[m]);
  }
  return out;
}

CostModelState refine_model(const TrajectorySet& previous, std::span<const Detection> detections,
                            const CostModelConfig& config, const CostModelState& prior) {
  config.validate();
  if (!is_valid_trajectory_set(previous, detections)) {
    throw std::invalid_argument("previous trajectories do not fit the detection list");
  }
  const std::size_t n = detections.size();
  std::size_t linkages = 0;
  std::size_t jumps = 0;
  std::vector<std::vector<double>> instant(n);
  for (const Trajectory& t : previous.trajectories) {
    const auto& path = t.detections;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      ++linkages;
      if (detections[path[k + 1]].frame - detections[path[k]].frame > 1) ++jumps;
    }
    if (path.size() < 2) continue;
    for (std::size_t k = 0; k < path.size(); ++k) {
      // From the predecessor where there is one, else from the successor.
      const std::size_t a = k > 0 ? path[k - 1] : path[k];
      const std::size_t b = k > 0 ? path[k] : path[k + 1];
      const double gap = detections[b].frame - detections[a].frame;
      std::vector<double> v(detections[b].position.size());
      for (std::size_t c = 0; c < v.size(); ++c) {
        v[c] = (detections[b].position[c] - detections[a].position[c]) / gap;
      }
      instant[path[k]] = std::move(v);
    }
  }
  if (linkages == 0) return prior;

  CostModelState state;
  state.velocity.assign(n, {});
  const FrameIndex frames = index_by_frame(detections);
  for (const auto& [frame, members] : frames) {
    std::vector<std::size_t> tracked;
    for (std::size_t i : members) {
      if (!instant[i].empty()) tracked.push_back(i);
    }
    for (std::size_t i : members) {
      if (instant[i].empty()) {
        state.velocity[i].assign(detections[i].position.size(), 0.0);
        continue;
      }
      std::vector<std::size_t> others;
      for (std::size_t j : tracked) {
        if (j != i) others.push_back(j);
      }
      std::vector<std::vector<double>> sample{instant[i]};
      for (std::size_t j : k_nearest(detections, others, detections[i].position, 4)) sample.push_back(instant[j]);
      state.velocity[i] = componentwise_median(sample);
    }
  }

  state.p_jump = static_cast<double>(jumps) / static_cast<double>(linkages);
  const double share = clamp_probability(static_cast<double>(previous.size()) / static_cast<double>(n));
  state.p_enter = config.p_enter.value_or(share);
  state.p_exit = config.p_exit.value_or(share);

  std::vector<double> residuals;
  for (const Trajectory& t : previous.trajectories) {
    for (std::size_t k = 0; k + 1 < t.detections.size(); ++k) {
      const std::size_t i = t.detections[k];
      const std::size_t j = t.detections[k + 1];
      const int gap = detections[j].frame - detections[i].frame;
      if (gap != 1) continue;
      residuals.push_back(euclidean(predicted(detections[i], state.velocity, i, gap), detections[j].position) /
                          config.distance_scale);
    }
  }
  state.distance = residuals.empty() ? prior.distance : fit_empirical_distance(std::move(residuals));
  return state;
}

CostAssignment assign_costs(std::span<const Detection> detections, const CostModelConfig& config,
                            const CostModelState& state) {
  const auto pairs = gate_transitions(detections, config, state.velocity);
  CostAssignment costs = probabilistic_costs(detections, pairs, config, state);
  if (config.force_all_observations) costs = groundtruth_observation_costs(std::move(costs));
  return costs;
}

CostAssignment refine_costs(const TrajectorySet& previous, std::span<const Detection> detections,
                            const CostModelConfig& config, const CostModelState& prior) {
  return assign_costs(detections, config, refine_model(previous, detections, config, prior));
}

}  // namespace circflow
