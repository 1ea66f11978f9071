#include "pitchbench/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>

#include "pitchbench/cents.hpp"
#include "pitchbench/errors.hpp"
#include "pitchbench/wav.hpp"

#include <json.hpp>

namespace pitchbench {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Formant {
  double freq_hz;
  double bandwidth_hz;
};

constexpr Formant kVowelA[4] = {
    {800.0, 100.0}, {1200.0, 120.0}, {2900.0, 150.0}, {3500.0, 200.0}};

double vowel_envelope(double f_hz, double fs) {
  // All-pole magnitude from four resonator pole pairs.
  const double w = kTwoPi * f_hz / fs;
  const std::complex<double> z = std::polar(1.0, w);
  double log_mag = 0.0;
  for (const auto& fm : kVowelA) {
    const double r = std::exp(-3.14159265358979323846 * fm.bandwidth_hz / fs);
    const std::complex<double> pole = std::polar(r, kTwoPi * fm.freq_hz / fs);
    log_mag -= std::log(std::abs(z - pole));
    log_mag -= std::log(std::abs(z - std::conj(pole)));
  }
  return std::exp(log_mag);
}

}  // namespace

std::vector<double> target_grid(double f_low_hz, double f_high_hz,
                                double step_octaves) {
  if (!(f_low_hz > 0.0) || !(f_low_hz < f_high_hz))
    throw ParameterError("grid needs 0 < f_low < f_high");
  if (!(step_octaves > 0.0)) throw ParameterError("grid step must be positive");

  std::vector<double> grid;
  const double limit = f_high_hz * (1.0 + 1e-12);
  for (int g = 0;; ++g) {
    double f = f_low_hz * std::exp2(step_octaves * g);
    if (f > limit) break;
    grid.push_back(f);
  }
  return grid;
}

std::vector<double> vowel_weights(double f_tgt_hz, int harmonic_count,
                                  VowelShape shape) {
  if (harmonic_count < 1) throw ParameterError("need at least one harmonic");
  std::vector<double> a(harmonic_count, 1.0);
  if (shape == VowelShape::flat) return a;

  const double fs = 44100.0;
  const double ref = vowel_envelope(f_tgt_hz, fs);
  for (int k = 1; k <= harmonic_count; ++k)
    a[k - 1] = vowel_envelope(k * f_tgt_hz, fs) / ref;
  return a;
}

double TestSignalSpec::f_tgt_cents() const { return hz_to_cents(f_tgt_hz); }

int choose_harmonic_count(double f_tgt_hz, double max_abs_cent,
                          double sample_rate) {
  const double top = f_tgt_hz * std::exp2(max_abs_cent / 1200.0);
  int k_alias = static_cast<int>(std::floor(0.45 * sample_rate / top));
  int k_vowel = static_cast<int>(std::ceil(5000.0 / f_tgt_hz));
  return std::max(1, std::min(k_alias, k_vowel));
}

TestSignal synthesize(const TestSignalSpec& spec,
                      const ModulationTrajectory& traj) {
  if (spec.harmonic_gains.empty())
    throw ParameterError("spec carries no harmonic gains");
  if (spec.f_tgt_hz <= 0.0) throw ParameterError("carrier must be positive");
  if (spec.sample_rate != traj.sample_rate)
    throw ParameterError("spec and trajectory sample rates differ");
  if (!spec.initial_phases.empty() &&
      spec.initial_phases.size() != spec.harmonic_gains.size())
    throw ParameterError("initial phase count must match harmonic count");

  const double fs = spec.sample_rate;
  const auto total = static_cast<std::size_t>(
      std::llround(spec.duration_s * fs));
  const auto lead = static_cast<std::size_t>(
      std::llround(kLeadInSeconds * fs));
  const std::size_t span = traj.f_cent.size();
  if (lead + span > total)
    throw ParameterError(
        "modulated span does not fit the signal duration with the lead-in");

  double max_cent = 0.0;
  for (double c : traj.f_cent) max_cent = std::max(max_cent, std::abs(c));
  const int k_count = spec.harmonic_count();
  const double top_hz =
      k_count * spec.f_tgt_hz * std::exp2(max_cent / 1200.0);
  if (top_hz >= 0.5 * fs)
    throw ParameterError("harmonic " + std::to_string(k_count) +
                         " reaches " + std::to_string(top_hz) +
                         " Hz and would alias");

  TestSignal sig;
  sig.spec = spec;
  sig.unit_period = traj.unit_period;
  sig.span_start = lead;
  sig.span_length = span;
  sig.reference_cent.assign(total, 0.0);
  std::copy(traj.f_cent.begin(), traj.f_cent.end(),
            sig.reference_cent.begin() + lead);

  // Interior periods only: skip the first period and keep one more period
  // after the analyzed block free for the sliding short-response window.
  if (traj.n_segments >= 4) {
    sig.analysis_window.start = lead + traj.unit_period;
    sig.analysis_window.periods = traj.n_segments - 3;
  }

  sig.audio.assign(total, 0.0);
  const double dt = 1.0 / fs;
  const auto& gains = spec.harmonic_gains;
  double theta = 0.0;  // wrapped phase of the fundamental
  for (std::size_t n = 0; n < total; ++n) {
    const double f_o =
        spec.f_tgt_hz * std::exp2(sig.reference_cent[n] / 1200.0);
    double s = 0.0;
    if (spec.initial_phases.empty()) {
      for (int k = 1; k <= k_count; ++k)
        s += gains[k - 1] * std::sin(k * theta);
    } else {
      for (int k = 1; k <= k_count; ++k)
        s += gains[k - 1] * std::sin(spec.initial_phases[k - 1] + k * theta);
    }
    sig.audio[n] = s;
    theta += kTwoPi * f_o * dt;
    if (theta >= kTwoPi) theta -= kTwoPi;
  }

  if (spec.noise_rms > 0.0) {
    std::mt19937_64 gen(spec.noise_seed);
    for (auto& v : sig.audio) {
      // Box-Muller from raw 53-bit uniforms, reproducible across platforms.
      double u1 = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
      double u2 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      v += spec.noise_rms * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(kTwoPi * u2);
    }
  }
  return sig;
}

void export_wav(const TestSignal& sig, const std::string& path,
                const WavExportOptions& options) {
  double peak = 0.0;
  for (double v : sig.audio) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0)
    throw ParameterError("cannot normalize an all-zero signal for export");

  const double scale = 0.8 / peak;
  std::vector<double> scaled(sig.audio.size());
  for (std::size_t i = 0; i < scaled.size(); ++i)
    scaled[i] = sig.audio[i] * scale;
  write_wav24(path, scaled, sig.spec.sample_rate);

  std::string stem = path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".wav")
    stem.resize(stem.size() - 4);

  nlohmann::json meta{
      {"schema", "pitchbench-signal-v1"},
      {"seed", options.seed},
      {"f_tgt_hz", sig.spec.f_tgt_hz},
      {"f_tgt_cents", sig.spec.f_tgt_cents()},
      {"fm_depth_cents", options.fm_depth_cents},
      {"grid_index", options.grid_index},
      {"sample_rate", sig.spec.sample_rate},
      {"duration_s", sig.spec.duration_s},
      {"harmonic_count", sig.spec.harmonic_count()},
      {"span_start", sig.span_start},
      {"span_length", sig.span_length},
      {"unit_period", sig.unit_period},
      {"analysis_window",
       {{"start", sig.analysis_window.start},
        {"periods", sig.analysis_window.periods}}},
  };
  std::ofstream mf(stem + ".meta.json", std::ios::trunc);
  if (!mf) throw IoError("cannot write sidecar for " + path);
  mf << meta.dump(2) << "\n";

  if (options.emit_reference) {
    std::FILE* rf = std::fopen((stem + ".ref.csv").c_str(), "w");
    if (!rf) throw IoError("cannot write reference csv for " + path);
    std::fputs("time_sec,f0_hz\n", rf);
    const double fs = sig.spec.sample_rate;
    for (std::size_t n = 0; n < sig.reference_cent.size(); n += 6) {
      const double f =
          sig.spec.f_tgt_hz * std::exp2(sig.reference_cent[n] / 1200.0);
      std::fprintf(rf, "%.9f,%.6f\n", static_cast<double>(n) / fs, f);
    }
    std::fclose(rf);
  }
}

}  // namespace pitchbench
