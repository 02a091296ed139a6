#include <benchmark/benchmark.h>

#include "pinlab/bessel.hpp"
#include "pinlab/walk_core.hpp"

namespace {

void BM_BesselScaled(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0));
  for (auto _ : state) {
    double sum = 0.0;
    for (int n = 0; n < 16; ++n) sum += pinlab::bessel_i_scaled(n, x);
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_BesselScaled)->Arg(1)->Arg(15)->Arg(40)->Arg(400);

void BM_ReturnTransformBuild(benchmark::State& state) {
  const auto kernel = pinlab::JumpKernel::simple(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pinlab::ReturnTransform(kernel));
}
BENCHMARK(BM_ReturnTransformBuild)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_LaplaceEval(benchmark::State& state) {
  const pinlab::ReturnTransform rt(pinlab::JumpKernel::simple(3));
  double b = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rt.laplace(b));
    b = b < 1.0 ? b * 1.1 : 1e-3;
  }
}
BENCHMARK(BM_LaplaceEval);

}  // namespace
