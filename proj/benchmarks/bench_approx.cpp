#include <benchmark/benchmark.h>

#include <cmath>

#include "gammix/approx_lab.hpp"

namespace {

void BM_ApplyKzAt(benchmark::State& state) {
  const auto f = gammix::make_density("exp");
  const auto v = f.view();
  const double z = static_cast<double>(state.range(0));
  double x = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gammix::apply_kz_at(v, z, x).value);
    x = x < 8.0 ? x * 1.3 : 0.05;
  }
}
BENCHMARK(BM_ApplyKzAt)->Arg(50)->Arg(800);

void BM_Discretize(benchmark::State& state) {
  auto h = [](double e) { return 13.5 * e * e * std::exp(-3.0 * e); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(gammix::discretize_mixing(h, 200.0, static_cast<int>(state.range(0))).total_mass);
  }
}
BENCHMARK(BM_Discretize)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RateStudyPoint(benchmark::State& state) {
  const auto f = gammix::make_density("exp");
  const double zs[] = {50.0, 100.0, 200.0, 400.0};
  for (auto _ : state) benchmark::DoNotOptimize(gammix::rate_study(f, 2.0, zs).fitted_slope);
}
BENCHMARK(BM_RateStudyPoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
