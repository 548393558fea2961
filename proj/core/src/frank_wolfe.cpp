#include "circflow/frank_wolfe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace circflow {

QuadraticObjective::QuadraticObjective(std::vector<double> linear, std::vector<QuadraticTerm> quadratic)
    : linear_(std::move(linear)) {
  for (double v : linear_) {
    if (!std::isfinite(v)) throw std::invalid_argument("linear objective term is not finite");
  }
  const auto dim = static_cast<ArcId>(linear_.size());
  for (QuadraticTerm t : quadratic) {
    if (t.first < 0 || t.second < 0 || t.first >= dim || t.second >= dim) {
      throw std::invalid_argument(fmt::format("quadratic term ({}, {}) outside {} arcs", t.first, t.second, dim));
    }
    if (!std::isfinite(t.weight)) throw std::invalid_argument("quadratic objective term is not finite");
    if (t.first > t.second) std::swap(t.first, t.second);
    quadratic_.push_back(t);
  }
  std::sort(quadratic_.begin(), quadratic_.end(), [](const QuadraticTerm& a, const QuadraticTerm& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  std::vector<QuadraticTerm> merged;
  for (const QuadraticTerm& t : quadratic_) {
    if (!merged.empty() && merged.back().first == t.first && merged.back().second == t.second) {
      merged.back().weight += t.weight;
    } else {
      merged.push_back(t);
    }
  }
  quadratic_ = std::move(merged);
}

QuadraticObjective QuadraticObjective::from_network(const CirculationNetwork& net, std::int64_t cost_scale,
                                                    std::vector<QuadraticTerm> quadratic) {
  if (cost_scale < 1) throw std::invalid_argument("cost scale must be positive");
  std::vector<double> linear(static_cast<std::size_t>(net.arc_count()));
  for (ArcId a = 0; a < net.arc_count(); ++a) {
    linear[static_cast<std::size_t>(a)] = static_cast<double>(net.arc(a).cost) / static_cast<double>(cost_scale);
  }
  return QuadraticObjective(std::move(linear), std::move(quadratic));
}

namespace {

template <typename T>
double evaluate_impl(std::span<const double> linear, std::span<const QuadraticTerm> quadratic,
                     std::span<const T> x) {
  if (x.size() != linear.size()) throw std::invalid_argument("point dimension differs from objective");
  double value = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) value += linear[a] * static_cast<double>(x[a]);
  for (const QuadraticTerm& t : quadratic) {
    value += t.weight * static_cast<double>(x[static_cast<std::size_t>(t.first)]) *
             static_cast<double>(x[static_cast<std::size_t>(t.second)]);
  }
  return value;
}

}  // namespace

double QuadraticObjective::evaluate(std::span<const double> x) const {
  return evaluate_impl<double>(linear_, quadratic_, x);
}

double QuadraticObjective::evaluate(std::span<const std::uint8_t> x) const {
  return evaluate_impl<std::uint8_t>(linear_, quadratic_, x);
}

std::vector<double> QuadraticObjective::gradient(std::span<const double> x) const {
  if (x.size() != linear_.size()) throw std::invalid_argument("point dimension differs from objective");
  std::vector<double> g = linear_;
  for (const QuadraticTerm& t : quadratic_) {
    const auto a = static_cast<std::size_t>(t.first);
    const auto b = static_cast<std::size_t>(t.second);
    if (a == b) {
      g[a] += 2.0 * t.weight * x[a];
    } else {
      g[a] += t.weight * x[b];
      g[b] += t.weight * x[a];
    }
  }
  for (double v : g) {
    if (!std::isfinite(v)) throw std::domain_error("objective gradient is not finite");
  }
  return g;
}

double step_size(StepRule rule, std::int64_t iteration) {
  const auto k = static_cast<double>(iteration);
  switch (rule) {
    case StepRule::Growing:
      return (k + 1.0) / (k + 3.0);
    case StepRule::Textbook:
      return 2.0 / (k + 2.0);
  }
  return 0.0;
}

namespace {

std::vector<std::uint8_t> linear_vertex(const QuadraticObjective& objective, const CirculationNetwork& net,
                                        std::span<const double> point, const FrankWolfeOptions& options) {
  const std::vector<double> g = objective.gradient(point);
  std::vector<Cost> costs(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    try {
      costs[a] = scale_cost(g[a], options.cost_scale);
    } catch (const std::invalid_argument& e) {
      throw std::domain_error(fmt::format("gradient entry {} of arc {}: {}", g[a], a, e.what()));
    }
  }
  return solve(net.with_costs(costs), options.solver).flow;
}

}  // namespace

FrankWolfeResult frank_wolfe(const QuadraticObjective& objective, const CirculationNetwork& net,
                             const FrankWolfeOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("Frank-Wolfe needs at least one iteration");
  if (objective.dimension() != static_cast<std::size_t>(net.arc_count())) {
    throw std::invalid_argument("objective dimension differs from arc count");
  }
  FrankWolfeResult result;
  result.iterate.assign(objective.dimension(), 0.0);
  result.best_vertex.assign(objective.dimension(), 0);
  result.best_vertex_objective = objective.evaluate(std::span<const std::uint8_t>(result.best_vertex));
  double current = objective.evaluate(std::span<const double>(result.iterate));

  for (std::int64_t k = 0; k < options.iterations; ++k) {
    const auto vertex = linear_vertex(objective, net, result.iterate, options);
    const double vertex_value = objective.evaluate(std::span<const std::uint8_t>(vertex));
    if (vertex_value < result.best_vertex_objective) {
      result.best_vertex_objective = vertex_value;
      result.best_vertex = vertex;
    }
    const double gamma = step_size(options.step, k);
    for (std::size_t a = 0; a < result.iterate.size(); ++a) {
      result.iterate[a] += gamma * (static_cast<double>(vertex[a]) - result.iterate[a]);
      result.iterate[a] = std::clamp(result.iterate[a], 0.0, 1.0);
    }
    const double next = objective.evaluate(std::span<const double>(result.iterate));
    result.trace.push_back(next);
    ++result.iterations_run;
    const double improvement = current - next;
    current = next;
    if (options.tolerance && k > 0 && std::fabs(improvement) <= *options.tolerance * std::max(1.0, std::fabs(next))) {
      break;
    }
  }
  return result;
}

std::vector<std::uint8_t> round_solution(const QuadraticObjective& objective, const CirculationNetwork& net,
                                         std::span<const double> fractional, const FrankWolfeOptions& options) {
  if (fractional.size() != static_cast<std::size_t>(net.arc_count()) ||
      objective.dimension() != fractional.size()) {
    throw std::invalid_argument("fractional point dimension differs from arc count");
  }
  if (fractional.empty()) return {};
  return linear_vertex(objective, net, fractional, options);
}

}  // namespace circflow
