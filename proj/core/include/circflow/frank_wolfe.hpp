#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "circflow/network.hpp"
#include "circflow/solver.hpp"

namespace circflow {

struct QuadraticTerm {
  ArcId first = 0;
  ArcId second = 0;
  double weight = 0.0;
};

/// f(x) = sum_a linear[a] x_a + sum_t weight_t x_first x_second over arc
/// indicators. Terms are stored with first <= second and duplicates summed,
/// so the implied matrix is symmetric.
class QuadraticObjective {
 public:
  QuadraticObjective() = default;
  QuadraticObjective(std::vector<double> linear, std::vector<QuadraticTerm> quadratic);

  /// Linear part taken from the network's arc costs divided by `cost_scale`.
  static QuadraticObjective from_network(const CirculationNetwork& net, std::int64_t cost_scale,
                                         std::vector<QuadraticTerm> quadratic = {});

  std::size_t dimension() const { return linear_.size(); }
  std::span<const double> linear() const { return linear_; }
  std::span<const QuadraticTerm> quadratic() const { return quadratic_; }

  double evaluate(std::span<const double> x) const;
  double evaluate(std::span<const std::uint8_t> x) const;
  std::vector<double> gradient(std::span<const double> x) const;

 private:
  std::vector<double> linear_;
  std::vector<QuadraticTerm> quadratic_;
};

enum class StepRule {
  Growing,   // k / (k + 2), k = 1, 2, ...
  Textbook,  // 2 / (k + 2), k = 0, 1, ...
};

struct FrankWolfeOptions {
  std::int64_t iterations = 20;
  StepRule step = StepRule::Growing;
  std::int64_t cost_scale = 1'000'000;  // gradient entries are scaled and rounded before each solve
  // Stop early once the relative objective improvement of one step falls below this.
  std::optional<double> tolerance;
  SolveOptions solver;
};

struct FrankWolfeResult {
  std::vector<double> iterate;       // final fractional point, one entry per arc
  std::vector<double> trace;         // objective after every iteration
  std::vector<std::uint8_t> best_vertex;
  double best_vertex_objective = 0.0;
  std::int64_t iterations_run = 0;
};

/// Step length for the zero-based iteration counter.
double step_size(StepRule rule, std::int64_t iteration);

/// Starts from the zero circulation. Throws std::invalid_argument on a
/// dimension mismatch or iterations < 1, std::domain_error on a non-finite
/// gradient.
FrankWolfeResult frank_wolfe(const QuadraticObjective& objective, const CirculationNetwork& net,
                             const FrankWolfeOptions& options = {});

/// Integral circulation minimising the linearisation at `fractional`.
std::vector<std::uint8_t> round_solution(const QuadraticObjective& objective, const CirculationNetwork& net,
                                         std::span<const double> fractional, const FrankWolfeOptions& options = {});

}  // namespace circflow
