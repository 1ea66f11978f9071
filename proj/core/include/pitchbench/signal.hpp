#ifndef PITCHBENCH_SIGNAL_HPP
#define PITCHBENCH_SIGNAL_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pitchbench/modulation.hpp"

namespace pitchbench {

/// Geometric carrier grid from f_low to f_high (inclusive up to rounding)
/// with 2^step_octaves ratio between neighbors. Defaults give 112 targets.
std::vector<double> target_grid(double f_low_hz = 80.0,
                                double f_high_hz = 400.0,
                                double step_octaves = 1.0 / 48.0);

enum class VowelShape { vowel_a, flat };

/// Harmonic gains a_1..a_K sampled from an all-pole vowel envelope
/// (formants 800/1200/2900/3500 Hz, bandwidths 100/120/150/200 Hz),
/// normalized so a_1 = 1. The flat shape returns all ones.
std::vector<double> vowel_weights(double f_tgt_hz, int harmonic_count,
                                  VowelShape shape);

struct TestSignalSpec {
  double f_tgt_hz = 200.0;
  std::vector<double> harmonic_gains;   // a_1..a_K
  std::vector<double> initial_phases;   // empty means all zero
  double sample_rate = 44100.0;
  double duration_s = 20.0;
  double noise_rms = 0.0;               // optional additive residual, off by default
  std::uint64_t noise_seed = 0;

  int harmonic_count() const { return static_cast<int>(harmonic_gains.size()); }
  double f_tgt_cents() const;           // carrier in cents re 1 Hz
};

struct AnalysisWindow {
  std::size_t start = 0;    // first sample of the first analyzed period
  std::size_t periods = 0;  // number of analyzed unit periods
};

struct TestSignal {
  std::vector<double> audio;
  std::vector<double> reference_cent;  // deviation from the carrier, in cents
  TestSignalSpec spec;
  AnalysisWindow analysis_window;
  std::size_t span_start = 0;   // first sample of the modulated span
  std::size_t span_length = 0;
  std::size_t unit_period = 0;
};

/// Largest harmonic count that keeps the top harmonic below half the Nyquist
/// margin at the trajectory's maximum excursion, additionally capped where
/// the vowel envelope has decayed to nothing (~5 kHz).
int choose_harmonic_count(double f_tgt_hz, double max_abs_cent,
                          double sample_rate);

/// Additive synthesis of the frequency-modulated multi-component signal:
/// 2 s unmodulated carrier lead-in, the modulated span, then carrier padding
/// to the requested duration. Phase is accumulated from the instantaneous
/// fundamental so all harmonics stay coherent.
TestSignal synthesize(const TestSignalSpec& spec,
                      const ModulationTrajectory& traj);

/// 24-bit mono RIFF/WAV at the signal rate, normalized to 0.8 of full scale,
/// plus a `<stem>.meta.json` sidecar describing the signal. Optionally emits
/// `<stem>.ref.csv` with the reference trajectory decimated by 6 so external
/// adapters can be loop-tested and time-aligned.
struct WavExportOptions {
  std::uint64_t seed = 0;
  double fm_depth_cents = 0.0;
  int grid_index = -1;
  bool emit_reference = false;
};

void export_wav(const TestSignal& sig, const std::string& path,
                const WavExportOptions& options = {});

constexpr double kLeadInSeconds = 2.0;

}  // namespace pitchbench

#endif  // PITCHBENCH_SIGNAL_HPP
