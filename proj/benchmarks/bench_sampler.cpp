#include <benchmark/benchmark.h>

#include "gammix/density_zoo.hpp"
#include "gammix/experiments.hpp"
#include "gammix/sampler.hpp"

namespace {

void BM_GibbsSweep(benchmark::State& state) {
  const auto f = gammix::make_density("exp");
  const auto raw = gammix::sample_dataset(f, static_cast<std::size_t>(state.range(0)), 3);
  gammix::PriorConfig prior;
  prior.m = static_cast<double>(state.range(1)) / 10.0;
  const auto data = gammix::SamplerData::prepare(raw, prior.model);
  auto s = gammix::initial_state(data, prior, gammix::Rng::stream(3, 0));
  gammix::Diagnostics diag;
  for (int k = 0; k < 200; ++k) gammix::gibbs_sweep(s, data, prior, diag);
  for (auto _ : state) gammix::gibbs_sweep(s, data, prior, diag);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GibbsSweep)->Args({100, 10})->Args({1000, 10})->Args({1000, 100});

void BM_PosteriorL1(benchmark::State& state) {
  const auto f = gammix::make_density("exp");
  const auto raw = gammix::sample_dataset(f, 1000, 5);
  gammix::PriorConfig prior;
  gammix::FitOptions opts;
  opts.iters = 600;
  opts.burnin = 500;
  opts.thin = 10;
  const auto chain = gammix::run_chain(raw, prior, opts);
  for (auto _ : state) benchmark::DoNotOptimize(gammix::posterior_l1(chain.draws, f));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(chain.draws.size()));
}
BENCHMARK(BM_PosteriorL1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
