#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "circflow/cost_models.hpp"
#include "circflow/io.hpp"
#include "circflow/network.hpp"
#include "circflow/solver.hpp"
#include "circflow/synthetic.hpp"
#include "circflow/trajectories.hpp"

namespace circflow {

enum class SolverKind { Cinda, Ssp, Dssp };

std::string_view to_string(SolverKind kind);
/// Accepts "cinda", "ssp" and "dssp".
SolverKind parse_solver_kind(std::string_view text);

struct SolverOutcome {
  std::vector<std::uint8_t> flow;
  Cost total_cost = 0;
  std::optional<SolveStats> stats;  // cost-scaling solver only
  std::int64_t augmentations = 0;   // path-based solvers only
};

/// Runs the chosen solver; every kind returns a minimum-cost circulation.
SolverOutcome solve_with(SolverKind kind, const CirculationNetwork& net, const SolveOptions& options = {});

struct TrackingConfig {
  std::filesystem::path input;
  DetectionFormat format = DetectionFormat::MotCsv;
  SolverKind solver = SolverKind::Cinda;
  std::int64_t iterations = 1;
  CostModelConfig costs;
  SolveOptions solve;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> dump_graph;  // network of the last iteration

  /// Throws std::invalid_argument on iterations < 1 or a bad cost config.
  void validate() const;
};

/// Applies `key = value` settings. Unknown keys and malformed values throw
/// std::invalid_argument. Recognised keys are listed by config_keys().
void apply_settings(TrackingConfig& config, const std::map<std::string, std::string>& settings);
std::vector<std::string_view> config_keys();
/// Current values of every recognised key, for the report.
std::map<std::string, std::string> describe(const TrackingConfig& config);

struct IterationReport {
  std::int64_t iteration = 0;
  double gate_seconds = 0.0;  // gating and cost evaluation
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
  double decode_seconds = 0.0;
  std::size_t nodes = 0;
  std::size_t arcs = 0;
  Cost total_cost = 0;
  std::size_t trajectories = 0;
  std::size_t tracked_detections = 0;
  double p_enter = 0.0;
  double p_exit = 0.0;
  double p_jump = 1.0;
  std::optional<SolveStats> stats;
};

struct RunReport {
  double ingest_seconds = 0.0;
  std::size_t detections = 0;
  std::vector<IterationReport> iterations;
  std::map<std::string, std::string> config;

  void write(std::ostream& out) const;
};

struct TrackingResult {
  TrajectorySet trajectories;  // canonical order
  RunReport report;
  CirculationNetwork network;  // last network solved
  std::vector<TrajectorySet> history;  // result of every iteration
};

/// gate -> costs -> build -> solve -> decode, then refine and repeat for the
/// configured number of iterations. Stage failures keep their exception
/// type with the stage name prefixed.
TrackingResult track(std::span<const Detection> detections, const TrackingConfig& config);

/// Ingests config.input, runs track() and writes the configured outputs.
TrackingResult run_tracking(const TrackingConfig& config);

struct BenchmarkConfig {
  std::vector<SolverKind> solvers{SolverKind::Cinda, SolverKind::Ssp, SolverKind::Dssp};
  std::vector<std::size_t> sizes{1000, 10000};
  std::uint64_t seed = 1;
  std::size_t detections_per_trajectory = 100;  // frames per sequence
};

struct BenchmarkRow {
  SolverKind solver = SolverKind::Cinda;
  std::size_t size = 0;
  std::size_t arcs = 0;
  double seconds = 0.0;
  Cost cost = 0;
};

/// Synthetic tracking network of about `detections` detections with three
/// gated transitions per detection toward the next frame.
CirculationNetwork benchmark_network(std::size_t detections, std::uint64_t seed,
                                     std::size_t detections_per_trajectory = 100);

/// One row per (size, solver). Throws InvariantViolation when solvers disagree on cost.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config);
void write_benchmark_table(std::ostream& out, std::span<const BenchmarkRow> rows);

struct ArrayTrackResult {
  std::vector<std::int64_t> labels;  // canonical track index per detection, -1 when left out
  Cost total_cost = 0;
};

/// Array-in, labels-out entry point for foreign-language wrappers.
/// `positions` is row-major with `dimensions` columns; `settings` uses the
/// configuration keys. Produces the same tracks as the CLI on equal input.
ArrayTrackResult track_arrays(std::span<const std::int32_t> frames, std::span<const double> positions,
                              std::size_t dimensions, const std::map<std::string, std::string>& settings = {});

}  // namespace circflow
