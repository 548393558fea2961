// circflow command-line front end: track, bench, validate, qp.
//
// Exit codes: 0 success, 1 input error, 2 internal invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "circflow/frank_wolfe.hpp"
#include "circflow/io.hpp"
#include "circflow/network.hpp"
#include "circflow/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kInvariantError = 2;

struct TrackArgs {
  std::string input, format = "mot-csv", solver = "cinda", config, output, report, dump_graph;
  std::int64_t iterations = 1;
};

int run_track(const TrackArgs& args, const CLI::App& cmd) {
  using namespace circflow;
  TrackingConfig config;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw std::invalid_argument(fmt::format("cannot open config file '{}'", args.config));
    apply_settings(config, read_key_values(in, args.config));
  }
  // Flags given on the command line win over the config file.
  std::map<std::string, std::string> overrides;
  if (cmd.count("--input")) overrides["input"] = args.input;
  if (cmd.count("--format")) overrides["format"] = args.format;
  if (cmd.count("--solver")) overrides["solver"] = args.solver;
  if (cmd.count("--iters")) overrides["iterations"] = std::to_string(args.iterations);
  if (cmd.count("--output")) overrides["output"] = args.output;
  if (cmd.count("--report")) overrides["report"] = args.report;
  apply_settings(config, overrides);
  if (!args.dump_graph.empty()) config.dump_graph = args.dump_graph;
  if (config.input.empty()) throw std::invalid_argument("no input given (--input or 'input' in the config file)");

  const TrackingResult result = run_tracking(config);
  const IterationReport& last = result.report.iterations.back();
  fmt::print(stderr, "{} detections, {} trajectories, cost {}, {} iteration(s)\n", result.report.detections,
             last.trajectories, last.total_cost, result.report.iterations.size());
  if (!config.output) {
    std::vector<Detection> detections = load_detections(config.input, config.format);
    write_trajectories(std::cout, result.trajectories, detections);
  }
  return kOk;
}

struct BenchArgs {
  std::vector<std::string> solvers{"cinda", "ssp", "dssp"};
  std::vector<std::size_t> sizes{1000, 10000};
  std::uint64_t seed = 1;
  std::size_t per_trajectory = 100;
};

int run_bench(const BenchArgs& args) {
  using namespace circflow;
  BenchmarkConfig config;
  config.solvers.clear();
  for (const auto& s : args.solvers) config.solvers.push_back(parse_solver_kind(s));
  config.sizes = args.sizes;
  config.seed = args.seed;
  config.detections_per_trajectory = args.per_trajectory;
  const auto rows = run_benchmark(config);
  write_benchmark_table(std::cout, rows);
  return kOk;
}

circflow::CirculationNetwork load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open graph dump '{}'", path));
  return circflow::read_graph_dump(in, path);
}

int run_validate(const std::string& input) {
  const auto net = load_graph(input);
  const auto report = circflow::validate_network(net);
  auto yes_no = [](bool b) { return b ? "ok" : "FAILED"; };
  fmt::print("nodes={} arcs={}\n", net.node_count(), net.arc_count());
  fmt::print("pairing={}\nunit_vertex_capacity={}\nacyclic_without_hub={}\n", yes_no(report.pairing),
             yes_no(report.unit_vertex_capacity), yes_no(report.acyclic_without_hub));
  if (report.first_violation) fmt::print("first_violation={}\n", *report.first_violation);
  return report.ok() ? kOk : kInputError;
}

struct QpArgs {
  std::string graph, objective, step = "growing";
  std::int64_t iterations = 20;
  std::int64_t scale = 1'000'000;
};

int run_qp(const QpArgs& args) {
  using namespace circflow;
  const auto net = load_graph(args.graph);
  const auto report = validate_network(net);
  if (!report.ok()) throw std::invalid_argument(report.first_violation.value_or("invalid network"));
  QuadraticObjective objective = QuadraticObjective::from_network(net, args.scale);
  if (!args.objective.empty()) {
    std::ifstream in(args.objective);
    if (!in) throw std::invalid_argument(fmt::format("cannot open objective file '{}'", args.objective));
    const auto base = objective.linear();
    objective = read_objective(in, {base.begin(), base.end()}, args.objective);
  }
  FrankWolfeOptions options;
  options.iterations = args.iterations;
  options.cost_scale = args.scale;
  if (args.step == "growing") {
    options.step = StepRule::Growing;
  } else if (args.step == "textbook") {
    options.step = StepRule::Textbook;
  } else {
    throw std::invalid_argument(fmt::format("unknown step rule '{}'", args.step));
  }
  const FrankWolfeResult fw = frank_wolfe(objective, net, options);
  const auto rounded = round_solution(objective, net, fw.iterate, options);
  for (std::size_t k = 0; k < fw.trace.size(); ++k) fmt::print("iteration {} objective {}\n", k + 1, fw.trace[k]);
  fmt::print("best_vertex_objective={}\n", fw.best_vertex_objective);
  fmt::print("rounded_objective={}\n", objective.evaluate(std::span<const std::uint8_t>(rounded)));
  std::string arcs;
  for (std::size_t a = 0; a < rounded.size(); ++a) {
    if (rounded[a]) arcs += fmt::format("{}{}", arcs.empty() ? "" : " ", a);
  }
  fmt::print("rounded_arcs={}\n", arcs);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-cost circulation data association for multi-object tracking"};
  app.require_subcommand(1);

  TrackArgs track;
  auto* track_cmd = app.add_subcommand("track", "Link detections into trajectories");
  track_cmd->add_option("--input", track.input, "Detection file");
  track_cmd->add_option("--format", track.format, "mot-csv or points-csv");
  track_cmd->add_option("--solver", track.solver, "cinda, ssp or dssp");
  track_cmd->add_option("--iters", track.iterations, "Tracking iterations (refinement after the first)");
  track_cmd->add_option("--config", track.config, "key = value settings file");
  track_cmd->add_option("--output", track.output, "Trajectory CSV (stdout when omitted)");
  track_cmd->add_option("--report", track.report, "Run report");
  track_cmd->add_option("--dump-graph", track.dump_graph, "Write the last network as a graph dump");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Compare solvers on synthetic tracking networks");
  bench_cmd->add_option("--solvers", bench.solvers, "Solvers to run")->delimiter(',');
  bench_cmd->add_option("--sizes", bench.sizes, "Detection counts")->delimiter(',');
  bench_cmd->add_option("--seed", bench.seed, "Generator seed");
  bench_cmd->add_option("--per-trajectory", bench.per_trajectory, "Frames per sequence");

  std::string validate_input;
  auto* validate_cmd = app.add_subcommand("validate", "Check the structure of a graph dump");
  validate_cmd->add_option("--input", validate_input, "Graph dump")->required();

  QpArgs qp;
  auto* qp_cmd = app.add_subcommand("qp", "Frank-Wolfe on a quadratic objective over a graph dump");
  qp_cmd->add_option("--graph", qp.graph, "Graph dump")->required();
  qp_cmd->add_option("--objective", qp.objective, "Sparse objective file");
  qp_cmd->add_option("--iters", qp.iterations, "Iterations");
  qp_cmd->add_option("--step", qp.step, "growing or textbook");
  qp_cmd->add_option("--scale", qp.scale, "Gradient scale factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*track_cmd) return run_track(track, *track_cmd);
    if (*bench_cmd) return run_bench(bench);
    if (*validate_cmd) return run_validate(validate_input);
    if (*qp_cmd) return run_qp(qp);
  } catch (const circflow::InvariantViolation& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInvariantError;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const std::length_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const std::domain_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const std::overflow_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInvariantError;
  }
  return kOk;
}
