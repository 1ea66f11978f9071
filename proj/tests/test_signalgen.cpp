#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pitchbench/capricep.hpp"
#include "pitchbench/cents.hpp"
#include "pitchbench/errors.hpp"
#include "pitchbench/fft.hpp"
#include "pitchbench/modulation.hpp"
#include "pitchbench/signal.hpp"
#include "pitchbench/wav.hpp"

#include <json.hpp>

using namespace pitchbench;

namespace {

const CapricepSet& shared_set() {
  static const CapricepSet set = build_capricep_set({1, 2, 3}, 16384);
  return set;
}

double sample_sd(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(x.size()));
}

// Independent evaluation of the documented all-pole envelope.
double envelope_oracle(double f_hz) {
  const double fs = 44100.0;
  const double formants[4] = {800.0, 1200.0, 2900.0, 3500.0};
  const double bandwidths[4] = {100.0, 120.0, 150.0, 200.0};
  const std::complex<double> z = std::polar(1.0, 2.0 * M_PI * f_hz / fs);
  double mag = 1.0;
  for (int i = 0; i < 4; ++i) {
    const double r = std::exp(-M_PI * bandwidths[i] / fs);
    const auto p = std::polar(r, 2.0 * M_PI * formants[i] / fs);
    mag /= std::abs(z - p) * std::abs(z - std::conj(p));
  }
  return mag;
}

}  // namespace

TEST_CASE("cent/Hz conversions") {
  CHECK(cents_to_hz(0.0, 440.0) == doctest::Approx(440.0).epsilon(1e-15));
  CHECK(cents_to_hz(1200.0, 220.0) == doctest::Approx(440.0).epsilon(1e-15));
  // extended-precision oracle for 80 * 2^(25/1200)
  const double oracle = static_cast<double>(
      80.0L * std::exp2(25.0L / 1200.0L));
  CHECK(cents_to_hz(25.0, 80.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(hz_to_cents(cents_to_hz(321.5, 80.0), 80.0) ==
        doctest::Approx(321.5).epsilon(1e-12));
  CHECK_THROWS_AS(hz_to_cents(-5.0), ParameterError);
  CHECK_THROWS_AS(cents_to_hz(0.0, 0.0), ParameterError);
}

TEST_CASE("target grid spans 80..400 Hz in 1/48 octave steps") {
  auto grid = target_grid();
  CHECK(grid.size() == 112);
  CHECK(grid.front() == doctest::Approx(80.0).epsilon(1e-15));
  const double second = static_cast<double>(80.0L * std::exp2(1.0L / 48.0L));
  CHECK(grid[1] == doctest::Approx(second).epsilon(1e-12));
  const double last = static_cast<double>(80.0L * std::exp2(111.0L / 48.0L));
  CHECK(grid.back() == doctest::Approx(last).epsilon(1e-12));
  CHECK(grid.back() <= 400.0);

  const double ratio = std::exp2(1.0 / 48.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(ratio).epsilon(1e-12));

  CHECK_THROWS_AS(target_grid(400.0, 80.0), ParameterError);
}

TEST_CASE("gaussian kernel is normalized and side-lobe free") {
  auto kernel = gaussian_kernel(0.005, 44100.0);
  double sum = 0.0;
  for (double t : kernel.taps) sum += t;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // magnitude spectrum decays monotonically down to the truncation floor
  std::size_t nfft = 1;
  while (nfft < kernel.taps.size() * 8) nfft <<= 1;
  std::vector<double> padded(nfft, 0.0);
  std::copy(kernel.taps.begin(), kernel.taps.end(), padded.begin());
  auto spec = rfft(padded);
  double prev = std::abs(spec[0]);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double mag = std::abs(spec[k]);
    if (mag < 1e-6) break;
    CHECK(mag < prev);
    prev = mag;
  }
}

TEST_CASE("modulation trajectory hits the requested depth") {
  auto traj = make_modulation(shared_set(), 100.0, 0.005);
  CHECK(traj.f_cent.size() == 9 * 65536);
  CHECK(sample_sd(traj.f_cent) == doctest::Approx(100.0).epsilon(1e-3));

  SUBCASE("doubling the depth doubles every sample") {
    auto twice = make_modulation(shared_set(), 200.0, 0.005);
    for (std::size_t i = 0; i < traj.f_cent.size(); i += 997)
      CHECK(twice.f_cent[i] ==
            doctest::Approx(2.0 * traj.f_cent[i]).epsilon(1e-12));
  }
}

TEST_CASE("zero modulation depth gives a flat trajectory") {
  auto traj = make_modulation(shared_set(), 0.0, 0.005, 1);
  for (double v : traj.f_cent) CHECK(v == 0.0);
}

TEST_CASE("modulation span must fit the signal budget") {
  CHECK_THROWS_AS(make_modulation(shared_set(), 100.0, 0.005, 13),
                  ParameterError);
  CHECK_THROWS_AS(make_modulation(shared_set(), -1.0, 0.005), ParameterError);
  CHECK_THROWS_AS(gaussian_kernel(0.0, 44100.0), ParameterError);
}

TEST_CASE("vowel weights") {
  auto flat = vowel_weights(123.0, 3, VowelShape::flat);
  CHECK(flat == std::vector<double>{1.0, 1.0, 1.0});

  auto a = vowel_weights(100.0, 10, VowelShape::vowel_a);
  CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a[7] ==
        doctest::Approx(envelope_oracle(800.0) / envelope_oracle(100.0))
            .epsilon(1e-12));
  CHECK_THROWS_AS(vowel_weights(100.0, 0, VowelShape::vowel_a),
                  ParameterError);
}

TEST_CASE("harmonic count respects aliasing and the vowel band") {
  const int k80 = choose_harmonic_count(80.0, 350.0, 44100.0);
  CHECK(k80 * 80.0 * std::exp2(350.0 / 1200.0) < 22050.0);
  CHECK(k80 >= 40);  // reaches through the formant region
  const int k400 = choose_harmonic_count(400.0, 350.0, 44100.0);
  CHECK(k400 * 400.0 * std::exp2(350.0 / 1200.0) < 22050.0);
}

TEST_CASE("unmodulated synthesis gives a clean tone") {
  auto traj = make_modulation(shared_set(), 0.0, 0.005, 1);
  TestSignalSpec spec;
  spec.f_tgt_hz = 200.0;
  spec.harmonic_gains = {1.0};
  spec.duration_s = 5.0;
  auto sig = synthesize(spec, traj);

  const auto fs = static_cast<std::size_t>(44100);
  std::size_t crossings = 0;
  for (std::size_t n = 2 * fs; n < 3 * fs; ++n)
    if ((sig.audio[n - 1] < 0.0) != (sig.audio[n] < 0.0)) ++crossings;
  CHECK(crossings >= 399);
  CHECK(crossings <= 401);
}

TEST_CASE("analytic-signal oracle recovers the instantaneous frequency") {
  auto traj = make_modulation(shared_set(), 25.0, 0.005, 1);
  TestSignalSpec spec;
  spec.f_tgt_hz = 220.0;
  spec.harmonic_gains = {1.0};
  spec.duration_s = 5.0;
  auto sig = synthesize(spec, traj);

  // Analytic signal via the zero-padded FFT of the whole take.
  std::size_t nfft = 1;
  while (nfft < sig.audio.size()) nfft <<= 1;
  std::vector<cdouble> a(nfft, cdouble(0.0, 0.0));
  for (std::size_t i = 0; i < sig.audio.size(); ++i) a[i] = sig.audio[i];
  fft(a, false);
  for (std::size_t k = 1; k < nfft / 2; ++k) a[k] *= 2.0;
  for (std::size_t k = nfft / 2 + 1; k < nfft; ++k) a[k] = 0.0;
  fft(a, true);

  const double fs = spec.sample_rate;
  const std::size_t begin = static_cast<std::size_t>(2.2 * fs);
  const std::size_t end = static_cast<std::size_t>(3.2 * fs);
  double rms = 0.0;
  std::size_t count = 0;
  for (std::size_t n = begin; n < end; ++n) {
    const double dphi = std::arg(a[n + 1] * std::conj(a[n - 1]));
    const double f_hat = dphi * fs / (4.0 * M_PI);
    const double err =
        hz_to_cents(f_hat, spec.f_tgt_hz) - sig.reference_cent[n];
    rms += err * err;
    ++count;
  }
  rms = std::sqrt(rms / static_cast<double>(count));
  CHECK(rms < 0.5);
}

TEST_CASE("reference deviation equals the trajectory over the span") {
  auto traj = make_modulation(shared_set(), 50.0, 0.005, 1);
  TestSignalSpec spec;
  spec.f_tgt_hz = 150.0;
  spec.harmonic_gains = vowel_weights(150.0, 5, VowelShape::vowel_a);
  spec.duration_s = 5.0;
  auto sig = synthesize(spec, traj);

  CHECK(sig.span_start == static_cast<std::size_t>(2.0 * 44100));
  for (std::size_t i = 0; i < traj.f_cent.size(); i += 1009)
    CHECK(sig.reference_cent[sig.span_start + i] == traj.f_cent[i]);
  CHECK(sig.reference_cent.front() == 0.0);
  CHECK(sig.reference_cent.back() == 0.0);

  SUBCASE("synthesis is deterministic") {
    auto again = synthesize(spec, traj);
    REQUIRE(again.audio.size() == sig.audio.size());
    for (std::size_t i = 0; i < sig.audio.size(); i += 499)
      CHECK(again.audio[i] == sig.audio[i]);
  }
}

TEST_CASE("aliasing harmonics are rejected by name") {
  auto traj = make_modulation(shared_set(), 100.0, 0.005, 1);
  TestSignalSpec spec;
  spec.f_tgt_hz = 400.0;
  spec.harmonic_gains.assign(80, 1.0);  // 32 kHz top harmonic
  spec.duration_s = 5.0;
  try {
    synthesize(spec, traj);
    FAIL("expected a parameter error");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("80") != std::string::npos);
  }
}

TEST_CASE("wav export: normalization, sidecar, and round trip") {
  auto traj = make_modulation(shared_set(), 0.0, 0.005, 1);
  TestSignalSpec spec;
  spec.f_tgt_hz = 200.0;
  spec.harmonic_gains = {1.0, 0.5};
  spec.duration_s = 5.0;
  auto sig = synthesize(spec, traj);

  const std::string dir = "signalgen_test_out";
  std::filesystem::create_directories(dir);
  const std::string wav_path = dir + "/tone.wav";
  WavExportOptions opt;
  opt.seed = 9;
  opt.fm_depth_cents = 0.0;
  opt.grid_index = 3;
  export_wav(sig, wav_path, opt);

  auto wav = read_wav(wav_path);
  CHECK(wav.bits_per_sample == 24);
  CHECK(wav.sample_rate == 44100.0);
  REQUIRE(wav.samples.size() == sig.audio.size());

  double peak = 0.0;
  for (double v : wav.samples) peak = std::max(peak, std::abs(v));
  const double expected_peak = 0.8 * 8388607.0 / 8388608.0;
  CHECK(std::abs(peak - expected_peak) <= 1.25 / 8388608.0);

  double in_peak = 0.0;
  for (double v : sig.audio) in_peak = std::max(in_peak, std::abs(v));
  const double scale = 0.8 / in_peak;
  for (std::size_t i = 0; i < wav.samples.size(); i += 757)
    CHECK(std::abs(wav.samples[i] - sig.audio[i] * scale) <=
          1.25 / 8388608.0);

  std::ifstream meta_file(dir + "/tone.meta.json");
  REQUIRE(meta_file.good());
  nlohmann::json meta;
  meta_file >> meta;
  CHECK(meta["seed"] == 9);
  CHECK(meta["grid_index"] == 3);
  CHECK(meta["f_tgt_hz"] == doctest::Approx(200.0));
  CHECK(meta["analysis_window"].contains("start"));

  SUBCASE("zero signal cannot be exported") {
    TestSignal silent = sig;
    std::fill(silent.audio.begin(), silent.audio.end(), 0.0);
    CHECK_THROWS_AS(export_wav(silent, dir + "/zero.wav"), ParameterError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("reference csv emission for adapter loop tests") {
  auto traj = make_modulation(shared_set(), 30.0, 0.005, 1);
  TestSignalSpec spec;
  spec.f_tgt_hz = 200.0;
  spec.harmonic_gains = {1.0};
  spec.duration_s = 5.0;
  auto sig = synthesize(spec, traj);

  const std::string dir = "signalgen_ref_out";
  std::filesystem::create_directories(dir);
  WavExportOptions opt;
  opt.emit_reference = true;
  export_wav(sig, dir + "/sig.wav", opt);

  std::ifstream ref(dir + "/sig.ref.csv");
  REQUIRE(ref.good());
  std::string header;
  std::getline(ref, header);
  CHECK(header == "time_sec,f0_hz");
  double t, f;
  char comma;
  ref >> t >> comma >> f;
  CHECK(t == doctest::Approx(0.0));
  CHECK(f == doctest::Approx(200.0).epsilon(1e-6));
  std::filesystem::remove_all(dir);
}
