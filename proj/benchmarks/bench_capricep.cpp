#include <benchmark/benchmark.h>

#include "pitchbench/capricep.hpp"

namespace {

void BM_GenerateUnit(benchmark::State& state) {
  for (auto _ : state) {
    auto unit = pitchbench::generate_unit_capricep(
        1, static_cast<int>(state.range(0)), 0.9, 65536, 44100.0);
    benchmark::DoNotOptimize(unit.samples.data());
  }
}

void BM_RecoverOrthogonalizeExtend(benchmark::State& state) {
  const auto set = pitchbench::build_capricep_set({1, 2, 3}, 16384);
  for (auto _ : state) {
    auto e = pitchbench::extend(
        pitchbench::orthogonalize(
            pitchbench::recover_pulses(set.x_mix, 0, set), 0, set),
        pitchbench::orthogonalize(
            pitchbench::recover_pulses(set.x_mix, 1, set), 1, set),
        pitchbench::orthogonalize(
            pitchbench::recover_pulses(set.x_mix, 2, set), 2, set));
    benchmark::DoNotOptimize(e.data());
  }
}

}  // namespace

BENCHMARK(BM_GenerateUnit)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RecoverOrthogonalizeExtend)->Unit(benchmark::kMillisecond);
