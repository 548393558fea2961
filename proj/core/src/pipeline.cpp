#include "circflow/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "circflow/baselines.hpp"

namespace circflow {

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Cinda: return "cinda";
    case SolverKind::Ssp: return "ssp";
    case SolverKind::Dssp: return "dssp";
  }
  return "unknown";
}

SolverKind parse_solver_kind(std::string_view text) {
  if (text == "cinda") return SolverKind::Cinda;
  if (text == "ssp") return SolverKind::Ssp;
  if (text == "dssp") return SolverKind::Dssp;
  throw std::invalid_argument(fmt::format("unknown solver '{}' (expected cinda, ssp or dssp)", text));
}

SolverOutcome solve_with(SolverKind kind, const CirculationNetwork& net, const SolveOptions& options) {
  SolverOutcome out;
  if (kind == SolverKind::Cinda) {
    SolveResult r = solve(net, options);
    out.flow = std::move(r.flow);
    out.total_cost = r.total_cost;
    out.stats = std::move(r.stats);
    return out;
  }
  const FlowNetwork flow_net(net);
  SspResult r = kind == SolverKind::Ssp ? ssp_solve(flow_net) : dssp_solve(flow_net);
  out.flow = std::move(r.flow);
  out.total_cost = r.cost;
  out.augmentations = r.augmentations;
  return out;
}

void TrackingConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (solve.push_budget_factor < 1) throw std::invalid_argument("push_budget_factor must be at least 1");
  costs.validate();
}

namespace {

double parse_real(std::string_view key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw std::invalid_argument(fmt::format("setting '{}': '{}' is not a number", key, value));
  }
  return out;
}

std::int64_t parse_integer(std::string_view key, const std::string& value) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument(fmt::format("setting '{}': '{}' is not an integer", key, value));
  }
  return out;
}

bool parse_flag(std::string_view key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::invalid_argument(fmt::format("setting '{}': '{}' is not a boolean", key, value));
}

std::optional<double> parse_probability(std::string_view key, const std::string& value) {
  if (value == "learned") return std::nullopt;
  return parse_real(key, value);
}

constexpr std::string_view kKeys[] = {
    "input",       "output",        "report",       "format",           "solver",
    "iterations",  "p_enter",       "p_exit",       "enter_exit_estimate", "beta_policy",
    "beta",        "beta_min",      "beta_max",     "gating_k",         "jump_window",
    "distance_scale", "cost_scale", "force_all_observations", "arc_fixing", "price_refinement",
    "push_budget_factor",
};

}  // namespace

std::vector<std::string_view> config_keys() { return {std::begin(kKeys), std::end(kKeys)}; }

void apply_settings(TrackingConfig& config, const std::map<std::string, std::string>& settings) {
  for (const auto& [key, value] : settings) {
    CostModelConfig& c = config.costs;
    if (key == "input") {
      config.input = value;
    } else if (key == "output") {
      config.output = value;
    } else if (key == "report") {
      config.report = value;
    } else if (key == "format") {
      config.format = parse_detection_format(value);
    } else if (key == "solver") {
      config.solver = parse_solver_kind(value);
    } else if (key == "iterations") {
      config.iterations = parse_integer(key, value);
    } else if (key == "p_enter") {
      c.p_enter = parse_probability(key, value);
    } else if (key == "p_exit") {
      c.p_exit = parse_probability(key, value);
    } else if (key == "enter_exit_estimate") {
      if (value == "literal") {
        c.estimate = EnterExitEstimate::Literal;
      } else if (value == "clamped") {
        c.estimate = EnterExitEstimate::Clamped;
      } else {
        throw std::invalid_argument(fmt::format("setting '{}': expected literal or clamped", key));
      }
    } else if (key == "beta_policy") {
      if (value == "per-detection") {
        c.beta_policy = BetaPolicy::PerDetection;
      } else if (value == "global") {
        c.beta_policy = BetaPolicy::Global;
      } else {
        throw std::invalid_argument(fmt::format("setting '{}': expected per-detection or global", key));
      }
    } else if (key == "beta") {
      c.beta = parse_real(key, value);
    } else if (key == "beta_min") {
      c.beta_min = parse_real(key, value);
    } else if (key == "beta_max") {
      c.beta_max = parse_real(key, value);
    } else if (key == "gating_k") {
      c.gating_k = static_cast<int>(std::clamp<std::int64_t>(parse_integer(key, value), -1, 1 << 20));
    } else if (key == "jump_window") {
      c.jump_window = static_cast<int>(std::clamp<std::int64_t>(parse_integer(key, value), -1, 1 << 20));
    } else if (key == "distance_scale") {
      c.distance_scale = parse_real(key, value);
    } else if (key == "cost_scale") {
      c.cost_scale = parse_integer(key, value);
    } else if (key == "force_all_observations") {
      c.force_all_observations = parse_flag(key, value);
    } else if (key == "arc_fixing") {
      config.solve.arc_fixing = parse_flag(key, value);
    } else if (key == "price_refinement") {
      config.solve.price_refinement = parse_flag(key, value);
    } else if (key == "push_budget_factor") {
      config.solve.push_budget_factor = parse_integer(key, value);
    } else {
      throw std::invalid_argument(fmt::format("unknown setting '{}'", key));
    }
  }
}

std::map<std::string, std::string> describe(const TrackingConfig& config) {
  const CostModelConfig& c = config.costs;
  auto probability = [](std::optional<double> p) { return p ? fmt::format("{}", *p) : std::string("learned"); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  return {
      {"input", config.input.string()},
      {"output", config.output ? config.output->string() : ""},
      {"report", config.report ? config.report->string() : ""},
      {"format", std::string(to_string(config.format))},
      {"solver", std::string(to_string(config.solver))},
      {"iterations", fmt::format("{}", config.iterations)},
      {"p_enter", probability(c.p_enter)},
      {"p_exit", probability(c.p_exit)},
      {"enter_exit_estimate", c.estimate == EnterExitEstimate::Literal ? "literal" : "clamped"},
      {"beta_policy", c.beta_policy == BetaPolicy::Global ? "global" : "per-detection"},
      {"beta", fmt::format("{}", c.beta)},
      {"beta_min", fmt::format("{}", c.beta_min)},
      {"beta_max", fmt::format("{}", c.beta_max)},
      {"gating_k", fmt::format("{}", c.gating_k)},
      {"jump_window", fmt::format("{}", c.jump_window)},
      {"distance_scale", fmt::format("{}", c.distance_scale)},
      {"cost_scale", fmt::format("{}", c.cost_scale)},
      {"force_all_observations", flag(c.force_all_observations)},
      {"arc_fixing", flag(config.solve.arc_fixing)},
      {"price_refinement", flag(config.solve.price_refinement)},
      {"push_budget_factor", fmt::format("{}", config.solve.push_budget_factor)},
  };
}

void RunReport::write(std::ostream& out) const {
  out << fmt::format("detections={}\n", detections);
  out << fmt::format("ingest_seconds={:.6f}\n", ingest_seconds);
  out << fmt::format("iterations={}\n", iterations.size());
  for (const IterationReport& it : iterations) {
    const std::string p = fmt::format("iteration.{}.", it.iteration);
    out << fmt::format("{}gate_seconds={:.6f}\n", p, it.gate_seconds);
    out << fmt::format("{}build_seconds={:.6f}\n", p, it.build_seconds);
    out << fmt::format("{}solve_seconds={:.6f}\n", p, it.solve_seconds);
    out << fmt::format("{}decode_seconds={:.6f}\n", p, it.decode_seconds);
    out << fmt::format("{}nodes={}\n{}arcs={}\n", p, it.nodes, p, it.arcs);
    out << fmt::format("{}total_cost={}\n", p, it.total_cost);
    out << fmt::format("{}trajectories={}\n{}tracked_detections={}\n", p, it.trajectories, p, it.tracked_detections);
    out << fmt::format("{}p_enter={}\n{}p_exit={}\n{}p_jump={}\n", p, it.p_enter, p, it.p_exit, p, it.p_jump);
    if (it.stats) {
      const SolveStats& s = *it.stats;
      out << fmt::format("{}solver.refine_iterations={}\n", p, s.refine_iterations);
      out << fmt::format("{}solver.restore_iterations={}\n", p, s.restore_iterations);
      out << fmt::format("{}solver.pushes={}\n", p, s.pushes);
      out << fmt::format("{}solver.relabels={}\n", p, s.relabels);
      out << fmt::format("{}solver.set_relabel_calls={}\n", p, s.set_relabel_calls);
      out << fmt::format("{}solver.price_refinement_successes={}\n", p, s.price_refinement_successes);
      out << fmt::format("{}solver.arcs_scanned={}\n", p, s.arcs_scanned);
      out << fmt::format("{}solver.fixed_arcs_max={}\n", p, s.fixed_arcs_max);
    }
  }
  for (const auto& [key, value] : config) out << fmt::format("config.{}={}\n", key, value);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs one stage, prefixing its name to any error while keeping the error's type.
template <typename F>
auto staged(std::string_view stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(fmt::format("{}: {}", stage, e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", stage, e.what()));
  } catch (const std::domain_error& e) {
    throw std::domain_error(fmt::format("{}: {}", stage, e.what()));
  } catch (const std::overflow_error& e) {
    throw std::overflow_error(fmt::format("{}: {}", stage, e.what()));
  }
}

}  // namespace

TrackingResult track(std::span<const Detection> detections, const TrackingConfig& config) {
  config.validate();
  TrackingResult result;
  result.report.detections = detections.size();
  result.report.config = describe(config);

  CostModelState state = staged("costs", [&] { return initial_model(detections, config.costs); });
  for (std::int64_t iteration = 1; iteration <= config.iterations; ++iteration) {
    IterationReport it;
    it.iteration = iteration;

    auto start = Clock::now();
    if (iteration > 1) {
      state = staged("refine", [&] { return refine_model(result.trajectories, detections, config.costs, state); });
    }
    const CostAssignment costs = staged("costs", [&] { return assign_costs(detections, config.costs, state); });
    it.gate_seconds = seconds_since(start);
    it.p_enter = state.p_enter;
    it.p_exit = state.p_exit;
    it.p_jump = state.p_jump;

    start = Clock::now();
    result.network = staged("build", [&] {
      return build_network(detections, costs, BuildOptions{config.costs.cost_scale});
    });
    it.build_seconds = seconds_since(start);
    it.nodes = static_cast<std::size_t>(result.network.node_count());
    it.arcs = static_cast<std::size_t>(result.network.arc_count());

    start = Clock::now();
    SolverOutcome outcome = staged("solve", [&] { return solve_with(config.solver, result.network, config.solve); });
    it.solve_seconds = seconds_since(start);
    it.total_cost = outcome.total_cost;
    it.stats = std::move(outcome.stats);

    start = Clock::now();
    TrajectorySet set = staged("decode", [&] { return flow_to_trajectories(outcome.flow, result.network); });
    if (set.total_cost() != outcome.total_cost) {
      throw InvariantViolation(fmt::format("decode: trajectory costs sum to {}, solver reported {}",
                                           set.total_cost(), outcome.total_cost));
    }
    sort_canonically(set, detections);
    it.decode_seconds = seconds_since(start);
    it.trajectories = set.size();
    for (const Trajectory& t : set.trajectories) it.tracked_detections += t.detections.size();

    result.report.iterations.push_back(std::move(it));
    result.history.push_back(set);
    result.trajectories = std::move(set);
  }
  return result;
}

TrackingResult run_tracking(const TrackingConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const std::vector<Detection> detections =
      staged("ingest", [&] { return load_detections(config.input, config.format); });
  const double ingest = seconds_since(start);

  TrackingResult result = track(detections, config);
  result.report.ingest_seconds = ingest;

  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument(fmt::format("cannot write '{}'", path.string()));
    return out;
  };
  if (config.output) {
    auto out = open(*config.output);
    write_trajectories(out, result.trajectories, detections);
  }
  if (config.report) {
    auto out = open(*config.report);
    result.report.write(out);
  }
  if (config.dump_graph) {
    auto out = open(*config.dump_graph);
    write_graph_dump(out, result.network);
  }
  return result;
}

CirculationNetwork benchmark_network(std::size_t detections, std::uint64_t seed,
                                     std::size_t detections_per_trajectory) {
  if (detections_per_trajectory < 2) throw std::invalid_argument("trajectories need at least two detections");
  SceneConfig scene;
  scene.frames = static_cast<std::int32_t>(detections_per_trajectory);
  scene.targets = std::max<std::size_t>(1, detections / detections_per_trajectory);
  scene.extent = 40.0 * std::sqrt(static_cast<double>(scene.targets));
  scene.max_speed = 1.0;
  scene.jitter = 0.2;
  scene.miss_rate = 0.02;
  scene.seed = seed;
  const SyntheticScene generated = generate_scene(scene);

  CostModelConfig costs;
  costs.gating_k = 3;
  costs.jump_window = 1;
  const CostModelState state = initial_model(generated.detections, costs);
  return build_network(generated.detections, assign_costs(generated.detections, costs, state),
                       BuildOptions{costs.cost_scale});
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config) {
  if (config.solvers.empty()) throw std::invalid_argument("no solvers selected");
  std::vector<BenchmarkRow> rows;
  for (std::size_t size : config.sizes) {
    const CirculationNetwork net = benchmark_network(size, config.seed, config.detections_per_trajectory);
    std::optional<Cost> reference;
    for (SolverKind kind : config.solvers) {
      const auto start = Clock::now();
      const SolverOutcome outcome = solve_with(kind, net);
      BenchmarkRow row{kind, size, static_cast<std::size_t>(net.arc_count()), seconds_since(start),
                       outcome.total_cost};
      if (reference && *reference != outcome.total_cost) {
        throw InvariantViolation(fmt::format("size {}: {} found cost {}, {} found {}", size, to_string(kind),
                                             outcome.total_cost, to_string(rows.back().solver), *reference));
      }
      reference = outcome.total_cost;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_benchmark_table(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << fmt::format("{:<8} {:>10} {:>10} {:>12} {:>20}\n", "solver", "size", "arcs", "seconds", "cost");
  for (const BenchmarkRow& r : rows) {
    out << fmt::format("{:<8} {:>10} {:>10} {:>12.4f} {:>20}\n", to_string(r.solver), r.size, r.arcs, r.seconds,
                       r.cost);
  }
}

ArrayTrackResult track_arrays(std::span<const std::int32_t> frames, std::span<const double> positions,
                              std::size_t dimensions, const std::map<std::string, std::string>& settings) {
  if (dimensions == 0) throw std::invalid_argument("dimensions must be positive");
  if (positions.size() != frames.size() * dimensions) {
    throw std::invalid_argument(fmt::format("{} positions do not match {} frames of {} coordinates",
                                            positions.size(), frames.size(), dimensions));
  }
  TrackingConfig config;
  config.format = DetectionFormat::PointsCsv;
  apply_settings(config, settings);
  std::vector<Detection> detections(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    detections[i].id = static_cast<std::int64_t>(i);
    detections[i].frame = frames[i];
    detections[i].position.assign(positions.begin() + static_cast<std::ptrdiff_t>(i * dimensions),
                                  positions.begin() + static_cast<std::ptrdiff_t>((i + 1) * dimensions));
  }
  ArrayTrackResult out;
  if (detections.empty()) return out;
  const TrackingResult result = track(detections, config);
  const auto labels = result.trajectories.labels(detections.size());
  out.labels.assign(labels.begin(), labels.end());
  out.total_cost = result.trajectories.total_cost();
  return out;
}

}  // namespace circflow
