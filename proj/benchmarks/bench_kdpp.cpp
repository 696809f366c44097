#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "cnp/kdpp.hpp"

namespace {

cnp::kdpp::WeightVector make_weights(std::size_t n) {
  cnp::Rng rng(1);
  std::vector<double> w(n);
  for (double& x : w) x = std::exp(-5.0 * cnp::uniform01(rng));
  return cnp::kdpp::WeightVector(w);
}

void BM_SampleKSubset(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto w = make_weights(n);
  cnp::Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(cnp::kdpp::sample_k_subset(w, k, rng));
}
BENCHMARK(BM_SampleKSubset)->Args({8, 4})->Args({64, 8})->Args({512, 32});

void BM_Marginals(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto w = make_weights(n);
  for (auto _ : state) benchmark::DoNotOptimize(cnp::kdpp::marginals(w, k));
}
BENCHMARK(BM_Marginals)->Args({8, 4})->Args({64, 8})->Args({512, 32});

}  // namespace
