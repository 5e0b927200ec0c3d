// Serial reference loop against the OpenMP ensemble on a consensus scenario.

#include <benchmark/benchmark.h>

#include "subadapt/config.hpp"
#include "subadapt/ensemble.hpp"

using namespace subadapt;

namespace {

const Scenario& scenario() {
  static const Scenario s = [] {
    const nlohmann::json doc = {
        {"topology", {{"kind", "ring"}, {"n_agents", 20}, {"dim", 4}}},
        {"subspace", {{"kind", "consensus"}}},
        {"combiner", {{"kind", "metropolis"}}},
        {"scenario", {{"kind", "regression"}, {"noise_var", 0.01}}},
    };
    return build_scenario(parse_config(doc), 1);
  }();
  return s;
}

RunConfig config() {
  RunConfig c;
  c.mu = 0.01;
  c.iterations = 500;
  return c;
}

void BM_Serial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(run_ensemble_serial(scenario(), config(), static_cast<std::size_t>(state.range(0))));
}

void BM_OpenMP(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(run_ensemble(scenario(), config(), static_cast<std::size_t>(state.range(0)), 0));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
