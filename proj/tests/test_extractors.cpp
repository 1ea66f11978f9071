#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "pitchbench/cents.hpp"
#include "pitchbench/errors.hpp"
#include "pitchbench/extractors.hpp"

using namespace pitchbench;

namespace {

constexpr double kFs = 44100.0;

TestSignal make_tone(double f_hz, double seconds,
                     const std::vector<double>& gains = {1.0}) {
  TestSignal sig;
  sig.spec.f_tgt_hz = f_hz;
  sig.spec.harmonic_gains = gains;
  sig.spec.sample_rate = kFs;
  sig.spec.duration_s = seconds;
  const auto n = static_cast<std::size_t>(seconds * kFs);
  sig.audio.resize(n);
  sig.reference_cent.assign(n, 0.0);
  double theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 1; k <= gains.size(); ++k)
      s += gains[k - 1] * std::sin(k * theta);
    sig.audio[i] = s;
    theta += 2.0 * M_PI * f_hz / kFs;
    if (theta >= 2.0 * M_PI) theta -= 2.0 * M_PI;
  }
  return sig;
}

std::size_t voiced_count(const FoTrajectory& traj) {
  std::size_t count = 0;
  for (double f : traj.f0_hz)
    if (std::isfinite(f) && f > 0.0) ++count;
  return count;
}

struct TempDir {
  std::string path;
  explicit TempDir(const std::string& name) : path(name) {
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("identity extractor returns the reference trajectory") {
  auto sig = make_tone(200.0, 0.5);
  for (std::size_t i = 0; i < sig.reference_cent.size(); ++i)
    sig.reference_cent[i] = 40.0 * std::sin(2.0 * M_PI * 3.0 * i / kFs);

  auto traj = extract_identity(sig);
  REQUIRE(traj.times_s.size() == sig.audio.size());
  for (std::size_t i = 0; i < traj.times_s.size(); i += 997) {
    const double expected =
        200.0 * std::exp2(sig.reference_cent[i] / 1200.0);
    CHECK(traj.f0_hz[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("validation smoother is a one-pole low-pass on the cents") {
  auto sig = make_tone(200.0, 0.5);
  // step in the reference deviation
  for (std::size_t i = sig.reference_cent.size() / 2;
       i < sig.reference_cent.size(); ++i)
    sig.reference_cent[i] = 100.0;

  const double tau = 0.02;
  auto traj = apply_validation_system(sig, tau);
  const std::size_t step_at = sig.reference_cent.size() / 2;
  // one time constant after the step: 1 - 1/e of the way up
  const auto probe = step_at + static_cast<std::size_t>(tau * kFs);
  const double cents = hz_to_cents(traj.f0_hz[probe], 200.0);
  CHECK(cents == doctest::Approx(100.0 * (1.0 - std::exp(-1.0))).epsilon(0.02));
  CHECK_THROWS_AS(apply_validation_system(sig, 0.0), ParameterError);
}

TEST_CASE("quantized cepstrum snaps to integer lags") {
  // harmonic-rich tone, as the vowel-shaped bench signals are
  auto sig = make_tone(200.0, 1.0, std::vector<double>(25, 1.0));
  auto traj = extract_cepstrum(sig, CepstrumMode::quantized, {70.0, 450.0});
  REQUIRE(voiced_count(traj) > traj.f0_hz.size() / 2);
  for (double f : traj.f0_hz) {
    if (!(std::isfinite(f) && f > 0.0)) continue;
    // estimates come only from the two lags bracketing 220.5 samples
    const bool lag220 = std::abs(f - kFs / 220.0) < 1e-9;
    const bool lag221 = std::abs(f - kFs / 221.0) < 1e-9;
    CHECK((lag220 || lag221));
    // fs over an exact integer
    const double lag = kFs / f;
    CHECK(std::abs(lag - std::round(lag)) < 1e-9);
  }
}

TEST_CASE("interpolated cepstrum resolves between lags") {
  auto sig = make_tone(200.0, 1.0, std::vector<double>(25, 1.0));
  auto traj =
      extract_cepstrum(sig, CepstrumMode::interpolated, {70.0, 450.0});
  REQUIRE(voiced_count(traj) > traj.f0_hz.size() / 2);
  for (double f : traj.f0_hz) {
    if (!(std::isfinite(f) && f > 0.0)) continue;
    CHECK(f == doctest::Approx(200.0).epsilon(0.001));
  }
}

TEST_CASE("silence is unvoiced everywhere") {
  auto sig = make_tone(200.0, 0.6);
  std::fill(sig.audio.begin(), sig.audio.end(), 0.0);
  auto cep = extract_cepstrum(sig, CepstrumMode::quantized, {70.0, 450.0});
  CHECK(voiced_count(cep) == 0);
  auto acf = extract_acf(sig, {70.0, 450.0});
  CHECK(voiced_count(acf) == 0);
}

TEST_CASE("white noise is mostly unvoiced for the acf extractor") {
  auto sig = make_tone(200.0, 1.0);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : sig.audio) v = dist(gen);
  auto acf = extract_acf(sig, {70.0, 450.0});
  CHECK(voiced_count(acf) < acf.f0_hz.size() / 2);
}

TEST_CASE("acf tracks a 150 Hz tone closely") {
  auto sig = make_tone(150.0, 1.0, {1.0, 0.4});
  auto traj = extract_acf(sig, {70.0, 450.0});
  REQUIRE(voiced_count(traj) > traj.f0_hz.size() / 2);
  for (double f : traj.f0_hz) {
    if (!(std::isfinite(f) && f > 0.0)) continue;
    CHECK(std::abs(f - 150.0) < 0.1);
  }
}

TEST_CASE("builtins are deterministic") {
  auto sig = make_tone(180.0, 0.8, std::vector<double>(20, 1.0));
  auto a = extract_cepstrum(sig, CepstrumMode::interpolated, {70.0, 450.0});
  auto b = extract_cepstrum(sig, CepstrumMode::interpolated, {70.0, 450.0});
  REQUIRE(a.f0_hz.size() == b.f0_hz.size());
  for (std::size_t i = 0; i < a.f0_hz.size(); ++i) {
    if (std::isnan(a.f0_hz[i])) {
      CHECK(std::isnan(b.f0_hz[i]));
    } else {
      CHECK(a.f0_hz[i] == b.f0_hz[i]);
    }
  }
}

TEST_CASE("search range validation") {
  auto sig = make_tone(200.0, 0.3);
  CHECK_THROWS_AS(extract_cepstrum(sig, CepstrumMode::quantized, {30.0, 450.0}),
                  ParameterError);
  CHECK_THROWS_AS(extract_acf(sig, {70.0, 600.0}), ParameterError);
}

TEST_CASE("csv_time_f0 parsing") {
  TempDir dir("extractor_parse_test");
  const std::string path = dir.path + "/out.csv";
  {
    std::ofstream f(path);
    f << "time_sec,f0_hz\n"
      << "0.00,100.0\n"
      << "0.01,\n"
      << "0.02,NaN\n"
      << "0.03,0\n"
      << "0.04,110.5\n";
  }
  auto traj =
      parse_extractor_output(path, AdapterOutputFormat::csv_time_f0, 0.0);
  REQUIRE(traj.times_s.size() == 5);
  CHECK(traj.f0_hz[0] == 100.0);
  CHECK(std::isnan(traj.f0_hz[1]));
  CHECK(std::isnan(traj.f0_hz[2]));
  CHECK(std::isnan(traj.f0_hz[3]));
  CHECK(traj.f0_hz[4] == 110.5);

  SUBCASE("bad header") {
    const std::string bad = dir.path + "/bad_header.csv";
    std::ofstream f(bad);
    f << "t,f\n0,100\n";
    f.close();
    CHECK_THROWS_AS(
        parse_extractor_output(bad, AdapterOutputFormat::csv_time_f0, 0.0),
        FormatError);
  }

  SUBCASE("non-numeric f0 names the line") {
    const std::string bad = dir.path + "/bad_field.csv";
    std::ofstream f(bad);
    f << "time_sec,f0_hz\n0.00,100\n0.01,oops\n";
    f.close();
    try {
      parse_extractor_output(bad, AdapterOutputFormat::csv_time_f0, 0.0);
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.line() == 3);
    }
  }
}

TEST_CASE("one_column_with_rate parsing") {
  TempDir dir("extractor_col_test");
  const std::string path = dir.path + "/out.txt";
  {
    std::ofstream f(path);
    f << "100\n0\n120\n";
  }
  auto traj = parse_extractor_output(
      path, AdapterOutputFormat::one_column_with_rate, 200.0);
  REQUIRE(traj.times_s.size() == 3);
  CHECK(traj.times_s[1] == doctest::Approx(0.005));
  CHECK(traj.f0_hz[0] == 100.0);
  CHECK(std::isnan(traj.f0_hz[1]));
}

TEST_CASE("loopback adapter reproduces the reference") {
  auto sig = make_tone(200.0, 1.0);
  for (std::size_t i = 0; i < sig.reference_cent.size(); ++i)
    sig.reference_cent[i] = 25.0 * std::sin(2.0 * M_PI * 2.0 * i / kFs);

  TempDir dir("extractor_loopback_test");
  ExtractorAdapter adapter;
  adapter.id = "loopback";
  adapter.command_template =
      "in={input}; cp \"${in%.wav}.ref.csv\" {output}";
  adapter.output_format = AdapterOutputFormat::csv_time_f0;

  WavExportOptions opt;
  opt.emit_reference = true;
  auto traj = run_external(adapter, sig, dir.path, opt);
  CHECK(traj.extractor_id == "loopback");
  REQUIRE(traj.times_s.size() > 1000);
  for (std::size_t i = 0; i < traj.times_s.size(); i += 531) {
    const auto n = static_cast<std::size_t>(
        std::llround(traj.times_s[i] * kFs));
    const double expected =
        200.0 * std::exp2(sig.reference_cent[n] / 1200.0);
    CHECK(traj.f0_hz[i] == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("external failure paths") {
  auto sig = make_tone(200.0, 0.3);

  SUBCASE("missing executable") {
    TempDir dir("extractor_missing_test");
    ExtractorAdapter adapter;
    adapter.id = "ghost";
    adapter.command_template = "/no/such/binary {input} {output}";
    CHECK_THROWS_AS(run_external(adapter, sig, dir.path), ExternalError);
  }

  SUBCASE("nonzero exit carries diagnostics") {
    TempDir dir("extractor_fail_test");
    ExtractorAdapter adapter;
    adapter.id = "grumpy";
    adapter.command_template =
        "echo boom-diagnostic >&2; false # {input} {output}";
    try {
      run_external(adapter, sig, dir.path);
      FAIL("expected an external error");
    } catch (const ExternalError& e) {
      CHECK(std::string(e.what()).find("boom-diagnostic") !=
            std::string::npos);
    }
  }

  SUBCASE("timeout") {
    TempDir dir("extractor_slow_test");
    ExtractorAdapter adapter;
    adapter.id = "sleepy";
    adapter.command_template = "sleep 30; cp {input} {output}";
    adapter.timeout_s = 0.3;
    CHECK_THROWS_AS(run_external(adapter, sig, dir.path), TimeoutError);
  }

  SUBCASE("template must contain both placeholders") {
    TempDir dir("extractor_tpl_test");
    ExtractorAdapter adapter;
    adapter.id = "half";
    adapter.command_template = "cat {input}";
    CHECK_THROWS_AS(run_external(adapter, sig, dir.path), ParameterError);
  }
}

TEST_CASE("adapter registry") {
  TempDir dir("extractor_registry_test");
  const std::string path = dir.path + "/adapters.json";
  {
    std::ofstream f(path);
    f << R"([
      {"id": "tool-a", "command": "tool-a {input} {output}"},
      {"id": "tool-b", "command": "tool-b -i {input} -o {output}",
       "output_format": "one_column_with_rate", "frame_rate": 200.0,
       "time_offset": -0.028, "reentrant": false}
    ])";
  }
  auto adapters = load_adapter_registry(path);
  REQUIRE(adapters.size() == 2);
  CHECK(adapters[0].id == "tool-a");
  CHECK(adapters[0].reentrant);
  CHECK(adapters[1].output_format ==
        AdapterOutputFormat::one_column_with_rate);
  CHECK(adapters[1].time_offset_s == doctest::Approx(-0.028));
  CHECK_FALSE(adapters[1].reentrant);

  SUBCASE("bad template is rejected") {
    const std::string bad = dir.path + "/bad.json";
    std::ofstream f(bad);
    f << R"([{"id": "x", "command": "x {input}"}])";
    f.close();
    CHECK_THROWS_AS(load_adapter_registry(bad), ConfigError);
  }
}
