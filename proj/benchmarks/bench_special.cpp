#include <benchmark/benchmark.h>

#include "gammix/kernels.hpp"
#include "gammix/special_functions.hpp"

namespace {

void BM_LogGamma(benchmark::State& state) {
  double x = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gammix::log_gamma(x));
    x = x < 200.0 ? x * 1.37 : 0.37;
  }
}
BENCHMARK(BM_LogGamma);

void BM_Digamma(benchmark::State& state) {
  double x = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gammix::digamma(x));
    x = x < 200.0 ? x * 1.37 : 0.37;
  }
}
BENCHMARK(BM_Digamma);

void BM_Trigamma(benchmark::State& state) {
  double x = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gammix::trigamma(x));
    x = x < 200.0 ? x * 1.37 : 0.37;
  }
}
BENCHMARK(BM_Trigamma);

void BM_GammaKernelLogpdf(benchmark::State& state) {
  const gammix::KernelParams p(3.5, 1.2);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gammix::gamma_kernel_logpdf(x, p));
    x = x < 20.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_GammaKernelLogpdf);

void BM_KernelMoment(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gammix::kernel_moment(100.0, 1.0, 2).value);
}
BENCHMARK(BM_KernelMoment);

}  // namespace

BENCHMARK_MAIN();
