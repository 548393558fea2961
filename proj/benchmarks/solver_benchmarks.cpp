// Solver timings on the synthetic tracking networks used by `circflow bench`.
// Arguments are detection counts.

#include <map>

#include <benchmark/benchmark.h>

#include "circflow/baselines.hpp"
#include "circflow/pipeline.hpp"
#include "circflow/solver.hpp"

namespace {

using namespace circflow;

const CirculationNetwork& network_of_size(std::int64_t size) {
  static std::map<std::int64_t, CirculationNetwork> cache;
  auto it = cache.find(size);
  if (it == cache.end()) it = cache.emplace(size, benchmark_network(static_cast<std::size_t>(size), 1)).first;
  return it->second;
}

void report_size(benchmark::State& state, const CirculationNetwork& net, Cost cost) {
  state.counters["arcs"] = static_cast<double>(net.arc_count());
  state.counters["cost"] = static_cast<double>(cost);
}

void BM_CostScaling(benchmark::State& state) {
  const auto& net = network_of_size(state.range(0));
  Cost cost = 0;
  for (auto _ : state) cost = solve(net).total_cost;
  report_size(state, net, cost);
}

void BM_CostScalingPlain(benchmark::State& state) {
  const auto& net = network_of_size(state.range(0));
  SolveOptions options;
  options.arc_fixing = false;
  options.price_refinement = false;
  Cost cost = 0;
  for (auto _ : state) cost = solve(net, options).total_cost;
  report_size(state, net, cost);
}

void BM_SuccessiveShortestPaths(benchmark::State& state) {
  const auto& net = network_of_size(state.range(0));
  const FlowNetwork flow_net(net);
  Cost cost = 0;
  for (auto _ : state) cost = ssp_solve(flow_net).cost;
  report_size(state, net, cost);
}

void BM_DynamicShortestPaths(benchmark::State& state) {
  const auto& net = network_of_size(state.range(0));
  const FlowNetwork flow_net(net);
  Cost cost = 0;
  for (auto _ : state) cost = dssp_solve(flow_net).cost;
  report_size(state, net, cost);
}

void BM_BuildNetwork(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(benchmark_network(static_cast<std::size_t>(state.range(0)), 1));
}

BENCHMARK(BM_CostScaling)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostScalingPlain)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuccessiveShortestPaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DynamicShortestPaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildNetwork)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
