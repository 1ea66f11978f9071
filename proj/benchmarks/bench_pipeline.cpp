#include <benchmark/benchmark.h>

#include "pitchbench/bench.hpp"

namespace {

const pitchbench::BenchContext& shared_context() {
  static const pitchbench::BenchContext ctx = [] {
    pitchbench::BenchConfig config;
    config.seed = 1;
    return pitchbench::make_context(config);
  }();
  return ctx;
}

void BM_SynthesizeTarget(benchmark::State& state) {
  const auto& ctx = shared_context();
  const double f_tgt = static_cast<double>(state.range(0));
  double max_cent = 0.0;
  for (double c : ctx.traj.f_cent)
    max_cent = std::max(max_cent, std::abs(c));
  for (auto _ : state) {
    pitchbench::TestSignalSpec spec;
    spec.f_tgt_hz = f_tgt;
    spec.harmonic_gains = pitchbench::vowel_weights(
        f_tgt,
        pitchbench::choose_harmonic_count(f_tgt, max_cent, 44100.0),
        pitchbench::VowelShape::vowel_a);
    auto sig = pitchbench::synthesize(spec, ctx.traj);
    benchmark::DoNotOptimize(sig.audio.data());
  }
}

void BM_AnalyzeReference(benchmark::State& state) {
  const auto& ctx = shared_context();
  std::vector<double> ref_cent(
      static_cast<std::size_t>(ctx.config.duration_s *
                               ctx.traj.sample_rate),
      0.0);
  std::copy(ctx.traj.f_cent.begin(), ctx.traj.f_cent.end(),
            ref_cent.begin() +
                static_cast<std::size_t>(pitchbench::kLeadInSeconds *
                                         ctx.traj.sample_rate));
  for (auto _ : state) {
    auto meas = pitchbench::compute_responses(ref_cent, ctx.set, ctx.window);
    auto ta = pitchbench::analyze_responses(meas, ctx.ref_responses, 200.0,
                                            100.0);
    benchmark::DoNotOptimize(ta.H.data());
  }
}

}  // namespace

BENCHMARK(BM_SynthesizeTarget)->Arg(80)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalyzeReference)->Unit(benchmark::kMillisecond);
