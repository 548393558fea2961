#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "circflow/network.hpp"
#include "circflow/trajectories.hpp"

namespace circflow {

inline constexpr double kProbabilityFloor = 1e-6;

/// Clamp into [kProbabilityFloor, 1 - kProbabilityFloor].
double clamp_probability(double p);
/// -log(p), clamped first unless `clamp` is false.
double neg_log(double p, bool clamp = true);

enum class BetaPolicy { PerDetection, Global };

// How enter/exit probabilities are estimated from per-frame detection counts
// when they are not given explicitly. Literal: a drop of k detections between
// adjacent frames means k trajectories end, a rise of k means k start.
// Clamped: the same counts, floored at one start and one end.
enum class EnterExitEstimate { Literal, Clamped };

struct CostModelConfig {
  std::optional<double> p_enter;  // nullopt: learned from counts
  std::optional<double> p_exit;
  EnterExitEstimate estimate = EnterExitEstimate::Literal;
  BetaPolicy beta_policy = BetaPolicy::PerDetection;
  double beta = 0.1;  // value used by the global policy
  double beta_min = kProbabilityFloor;
  double beta_max = 1.0 - kProbabilityFloor;
  int gating_k = 3;
  int jump_window = 2;
  double distance_scale = 1.0;  // distances are divided by this before lookup
  std::int64_t cost_scale = 1'000'000;
  bool force_all_observations = false;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Upper-tail empirical distribution of displacement magnitudes.
class EmpiricalDistanceModel {
 public:
  EmpiricalDistanceModel() : EmpiricalDistanceModel(std::vector<double>{0.0}) {}
  explicit EmpiricalDistanceModel(std::vector<double> samples);

  /// Fraction of samples >= d.
  double raw_p_value(double d) const;
  /// Add-one smoothed: (#samples >= d + 1) / (N + 1). Always in (0, 1].
  double p_value(double d) const;
  std::span<const double> samples() const { return samples_; }

 private:
  std::vector<double> samples_;  // ascending
};

/// Throws std::invalid_argument on an empty list or negative / non-finite samples.
EmpiricalDistanceModel fit_empirical_distance(std::vector<double> displacements);

struct CandidatePair {
  std::size_t from = 0;
  std::size_t to = 0;
  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

double euclidean(std::span<const double> a, std::span<const double> b);

/// For every detection and every frame offset 1..jump_window, the gating_k
/// nearest detections at that frame (ties by id). With `velocity`, distances
/// are measured from the position extrapolated to the target frame.
std::vector<CandidatePair> gate_transitions(std::span<const Detection> detections, const CostModelConfig& config,
                                            std::span<const std::vector<double>> velocity = {});

/// Everything the transition and enter/exit costs depend on.
struct CostModelState {
  EmpiricalDistanceModel distance;
  double p_enter = 0.5;
  double p_exit = 0.5;
  double p_jump = 1.0;
  std::vector<std::vector<double>> velocity;  // empty: no motion prediction
};

/// Frame-count estimate of (p_enter, p_exit).
std::pair<double, double> estimate_enter_exit(std::span<const Detection> detections, EnterExitEstimate rule);

/// Distances from each detection to its nearest neighbour in the next frame.
std::vector<double> nearest_neighbour_displacements(std::span<const Detection> detections,
                                                    double distance_scale = 1.0);

CostAssignment probabilistic_costs(std::span<const Detection> detections, std::span<const CandidatePair> pairs,
                                   const CostModelConfig& config, const CostModelState& state);

/// C_i = -(C_en_i + C_ex_i): every detection becomes free to include.
CostAssignment groundtruth_observation_costs(CostAssignment assignment);

CostModelState initial_model(std::span<const Detection> detections, const CostModelConfig& config);

/// Re-estimates velocities, jump probability, enter/exit probabilities and
/// the distance distribution from a previous solution. Returns `prior`
/// unchanged when the previous solution has no linkages.
CostModelState refine_model(const TrajectorySet& previous, std::span<const Detection> detections,
                            const CostModelConfig& config, const CostModelState& prior);

/// Gate + probabilistic costs (+ forced observations when configured).
CostAssignment assign_costs(std::span<const Detection> detections, const CostModelConfig& config,
                            const CostModelState& state);

CostAssignment refine_costs(const TrajectorySet& previous, std::span<const Detection> detections,
                            const CostModelConfig& config, const CostModelState& prior);

/// Component-wise median of a set of equally sized vectors.
std::vector<double> componentwise_median(std::span<const std::vector<double>> vectors);

}  // namespace circflow
