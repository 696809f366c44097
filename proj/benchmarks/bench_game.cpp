#include <benchmark/benchmark.h>

#include "cnp/experiment.hpp"

namespace {

void BM_RunSingle(benchmark::State& state) {
  cnp::ExperimentSpec spec;
  spec.scenario = cnp::Scenario::exp2;
  const auto algorithm = static_cast<cnp::Algorithm>(state.range(0));
  const cnp::Round horizon = 60000;
  for (auto _ : state) benchmark::DoNotOptimize(cnp::run_single(spec, algorithm, horizon, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(horizon));
  state.SetLabel(std::string(cnp::to_string(algorithm)));
}
BENCHMARK(BM_RunSingle)
    ->Arg(static_cast<int>(cnp::Algorithm::cp))
    ->Arg(static_cast<int>(cnp::Algorithm::mc))
    ->Arg(static_cast<int>(cnp::Algorithm::idealized))
    ->Unit(benchmark::kMillisecond);

}  // namespace
