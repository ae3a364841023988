#include <benchmark/benchmark.h>

#include "rekey/queries.hpp"
#include "rekey/sim.hpp"

using namespace rekey;

namespace {

void BM_ExploreLeaveModel(benchmark::State& state) {
  const ScenarioParams phhc = scenario_params(Scenario::kPHHC);
  const int threshold = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const Ctmc ctmc = assemble(phhc, {Strategy::kLeave, threshold});
    benchmark::DoNotOptimize(ctmc.num_states());
  }
}
BENCHMARK(BM_ExploreLeaveModel)->Arg(5)->Arg(20);

void BM_TransientYear(benchmark::State& state) {
  const Ctmc ctmc =
      assemble(scenario_params(Scenario::kCBA), {Strategy::kTime, 6});
  for (auto _ : state) {
    benchmark::DoNotOptimize(q1_confidentiality(ctmc, 12));
  }
}
BENCHMARK(BM_TransientYear);

void BM_SteadyStateGaussSeidel(benchmark::State& state) {
  const Ctmc ctmc =
      assemble(scenario_params(Scenario::kPHHC), {Strategy::kLeave, 5});
  SolverSettings settings;
  settings.method = SolverSettings::Method::kGaussSeidel;
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_state(ctmc, settings));
  }
}
BENCHMARK(BM_SteadyStateGaussSeidel);

void BM_SimulatePaths(benchmark::State& state) {
  const Ctmc ctmc =
      assemble(scenario_params(Scenario::kHA), {Strategy::kTime, 12});
  SimOptions opt;
  opt.n_paths = state.range(0);
  opt.seed = 7;
  opt.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_q1(ctmc, 12, opt));
  }
  state.SetItemsProcessed(state.iterations() * opt.n_paths);
}
BENCHMARK(BM_SimulatePaths)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
