#include <benchmark/benchmark.h>

#include <random>

#include "pitchbench/fft.hpp"

namespace {

std::vector<double> random_real(std::size_t n) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

void BM_Rfft(benchmark::State& state) {
  auto x = random_real(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto spec = pitchbench::rfft(x);
    benchmark::DoNotOptimize(spec.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RfftRoundTrip(benchmark::State& state) {
  auto x = random_real(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto spec = pitchbench::rfft(x);
    auto back = pitchbench::irfft(spec, x.size());
    benchmark::DoNotOptimize(back.data());
  }
}

}  // namespace

BENCHMARK(BM_Rfft)->Arg(16384)->Arg(65536);
BENCHMARK(BM_RfftRoundTrip)->Arg(65536);

BENCHMARK_MAIN();
