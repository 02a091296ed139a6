#include <benchmark/benchmark.h>

#include "pinlab/annealed.hpp"
#include "pinlab/fk_engine.hpp"
#include "pinlab/renewal.hpp"

namespace {

void BM_PinnedSolve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const double t = static_cast<double>(state.range(1));
  const auto kernel = pinlab::JumpKernel::simple(d);
  const auto y = pinlab::sample_disorder(kernel, 1.0, t, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(pinlab::pinned_log_partition(kernel, y, 2.0, t));
}
BENCHMARK(BM_PinnedSolve)->Args({1, 10})->Args({1, 50})->Args({3, 4})->Args({3, 16})->Unit(benchmark::kMillisecond);

void BM_AnnealedRoot(benchmark::State& state) {
  const pinlab::AnnealedModel model(pinlab::JumpKernel::simple(3));
  double beta = 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.pure_free_energy(beta));
    beta = beta < 10.0 ? beta + 0.37 : 0.7;
  }
}
BENCHMARK(BM_AnnealedRoot);

void BM_TiltedRenewalPath(benchmark::State& state) {
  pinlab::RenewalSampler sampler(pinlab::JumpKernel::simple(1), 1.0);
  std::uint64_t task = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(200.0, 1, task++));
}
BENCHMARK(BM_TiltedRenewalPath);

}  // namespace

BENCHMARK_MAIN();
