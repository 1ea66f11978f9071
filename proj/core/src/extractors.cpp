#include "pitchbench/extractors.hpp"

#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <cmath>
#include <csignal>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "pitchbench/cents.hpp"
#include "pitchbench/errors.hpp"
#include "pitchbench/fft.hpp"

#include <json.hpp>

namespace pitchbench {

namespace {

constexpr double kFrameLengthS = 0.040;
constexpr double kFrameHopS = 0.005;
constexpr double kSilenceRms = 1e-7;
constexpr double kCepstrumPeakThreshold = 0.02;
constexpr double kAcfVoicingThreshold = 0.45;
constexpr double kAcfOctaveCost = 0.01;

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct Frame {
  std::size_t center;
  double time_s;
};

std::vector<Frame> frame_centers(std::size_t total, double fs) {
  const auto w = static_cast<std::size_t>(std::lround(kFrameLengthS * fs));
  std::vector<Frame> frames;
  for (std::size_t m = 0;; ++m) {
    const auto center =
        static_cast<std::size_t>(std::llround(m * kFrameHopS * fs));
    if (center + w / 2 >= total) break;
    if (center < w / 2) continue;
    frames.push_back({center, static_cast<double>(center) / fs});
  }
  return frames;
}

void check_range(std::pair<double, double> range_hz) {
  if (!(range_hz.first > 40.0) || !(range_hz.second < 500.0) ||
      !(range_hz.first < range_hz.second))
    throw ParameterError("search range must lie within (40, 500) Hz");
}

double parabolic_offset(double lo, double mid, double hi) {
  const double denom = lo - 2.0 * mid + hi;
  if (denom == 0.0) return 0.0;
  double d = 0.5 * (lo - hi) / denom;
  return std::clamp(d, -0.5, 0.5);
}

std::string substitute(const std::string& tmpl, const std::string& key,
                       const std::string& value) {
  std::string out = tmpl;
  std::size_t pos = 0;
  while ((pos = out.find(key, pos)) != std::string::npos) {
    out.replace(pos, key.size(), value);
    pos += value.size();
  }
  return out;
}

std::string read_tail(const std::string& path, std::size_t max_bytes = 2000) {
  std::ifstream f(path);
  if (!f) return {};
  std::string all((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  if (all.size() > max_bytes) all = all.substr(all.size() - max_bytes);
  return all;
}

// Normalized autocorrelation (r[0] = 1) via the zero-padded FFT.
std::vector<double> autocorrelation_of(const std::vector<double>& x,
                                       std::size_t nfft) {
  std::vector<double> buf(nfft, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  auto spec = rfft(buf);
  std::vector<cdouble> power(nfft);
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    power[k] = cdouble(std::norm(spec[k]), 0.0);
    if (k != 0 && k != nfft / 2) power[nfft - k] = power[k];
  }
  fft(power, true);
  std::vector<double> out(nfft);
  for (std::size_t i = 0; i < nfft; ++i)
    out[i] = power[i].real() / power[0].real();
  return out;
}

}  // namespace

FoTrajectory extract_identity(const TestSignal& sig) {
  const double fs = sig.spec.sample_rate;
  const double f_tgt_c = sig.spec.f_tgt_cents();
  FoTrajectory traj;
  traj.extractor_id = "identity";
  traj.times_s.resize(sig.reference_cent.size());
  traj.f0_hz.resize(sig.reference_cent.size());
  for (std::size_t n = 0; n < sig.reference_cent.size(); ++n) {
    traj.times_s[n] = static_cast<double>(n) / fs;
    traj.f0_hz[n] = cents_to_hz(f_tgt_c + sig.reference_cent[n]);
  }
  return traj;
}

FoTrajectory apply_validation_system(const TestSignal& sig, double tau_s) {
  if (!(tau_s > 0.0)) throw ParameterError("smoother tau must be positive");
  const double fs = sig.spec.sample_rate;
  const double alpha = std::exp(-1.0 / (fs * tau_s));
  const double f_tgt_c = sig.spec.f_tgt_cents();

  FoTrajectory traj;
  traj.extractor_id = "validation";
  traj.times_s.resize(sig.reference_cent.size());
  traj.f0_hz.resize(sig.reference_cent.size());
  double state = sig.reference_cent.empty() ? 0.0 : sig.reference_cent[0];
  for (std::size_t n = 0; n < sig.reference_cent.size(); ++n) {
    state = alpha * state + (1.0 - alpha) * sig.reference_cent[n];
    traj.times_s[n] = static_cast<double>(n) / fs;
    traj.f0_hz[n] = cents_to_hz(f_tgt_c + state);
  }
  return traj;
}

FoTrajectory extract_cepstrum(const TestSignal& sig, CepstrumMode mode,
                              std::pair<double, double> range_hz) {
  check_range(range_hz);
  const double fs = sig.spec.sample_rate;
  const auto w = static_cast<std::size_t>(std::lround(kFrameLengthS * fs));
  std::size_t nfft = 1;
  while (nfft < 2 * w) nfft <<= 1;

  const auto lag_min = static_cast<std::size_t>(
      std::floor(fs / range_hz.second));
  const auto lag_max = static_cast<std::size_t>(
      std::ceil(fs / range_hz.first));

  std::vector<double> window(w);
  for (std::size_t i = 0; i < w; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (i + 0.5) / w);
  std::vector<double> window_acf;
  if (mode == CepstrumMode::interpolated)
    window_acf = autocorrelation_of(window, nfft);

  FoTrajectory traj;
  traj.extractor_id = (mode == CepstrumMode::quantized)
                          ? "cepstrum-quantized"
                          : "cepstrum-interpolated";
  std::vector<double> buf(nfft, 0.0);
  for (const Frame& frame : frame_centers(sig.audio.size(), fs)) {
    std::fill(buf.begin(), buf.end(), 0.0);
    double energy = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      const double v = sig.audio[frame.center - w / 2 + i];
      buf[i] = v * window[i];
      energy += v * v;
    }
    traj.times_s.push_back(frame.time_s);
    if (std::sqrt(energy / w) < kSilenceRms) {
      traj.f0_hz.push_back(quiet_nan());
      continue;
    }

    auto spec = rfft(buf);
    double spec_peak = 0.0;
    for (std::size_t k = 0; k <= nfft / 2; ++k)
      spec_peak = std::max(spec_peak, std::abs(spec[k]));
    // floor relative to the frame peak keeps the cepstrum scale-invariant
    const double floor_mag = spec_peak * 1e-6;
    std::vector<cdouble> logmag(nfft);
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
      const double m = std::max(std::abs(spec[k]), floor_mag);
      logmag[k] = cdouble(std::log(m), 0.0);
      if (k != 0 && k != nfft / 2) logmag[nfft - k] = logmag[k];
    }
    fft(logmag, true);

    std::size_t best = 0;
    double best_val = -1e300;
    for (std::size_t lag = lag_min; lag <= lag_max && lag < nfft / 2; ++lag) {
      const double v = logmag[lag].real();
      if (v > best_val) {
        best_val = v;
        best = lag;
      }
    }
    if (best == 0 || best_val < kCepstrumPeakThreshold) {
      traj.f0_hz.push_back(quiet_nan());
      continue;
    }
    if (mode == CepstrumMode::quantized) {
      // peak position on the discrete quefrency grid only
      traj.f0_hz.push_back(fs / static_cast<double>(best));
      continue;
    }

    // Interpolated mode: the cepstrum picks the lag, the taper-corrected
    // frame autocorrelation around that lag carries the sub-sample
    // parabolic refinement (the raw cepstral peak wanders by a good part
    // of a lag with the comb phase, which would leave quantization-scale
    // errors in place).
    std::vector<cdouble> power(nfft);
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
      power[k] = cdouble(std::norm(spec[k]), 0.0);
      if (k != 0 && k != nfft / 2) power[nfft - k] = power[k];
    }
    fft(power, true);
    const double r0 = power[0].real();
    if (r0 <= 0.0 || best + 1 >= nfft / 2 || best < 1) {
      traj.f0_hz.push_back(fs / static_cast<double>(best));
      continue;
    }
    double r[3];
    for (int i = -1; i <= 1; ++i) {
      const std::size_t lag = best + static_cast<std::size_t>(i + 1) - 1;
      r[i + 1] = power[lag].real() / (r0 * window_acf[lag]);
    }
    // climb to the local autocorrelation maximum if the cepstrum lag is
    // off by a bin
    std::size_t lag = best;
    while (lag + 1 < nfft / 2) {
      const double next =
          power[lag + 1].real() / (r0 * window_acf[lag + 1]);
      if (next <= r[1]) break;
      r[0] = r[1];
      r[1] = next;
      ++lag;
      r[2] = power[lag + 1].real() / (r0 * window_acf[lag + 1]);
    }
    while (lag > 1) {
      const double prev =
          power[lag - 1].real() / (r0 * window_acf[lag - 1]);
      if (prev <= r[1]) break;
      r[2] = r[1];
      r[1] = prev;
      --lag;
      r[0] = power[lag - 1].real() / (r0 * window_acf[lag - 1]);
    }
    const double d = parabolic_offset(r[0], r[1], r[2]);
    traj.f0_hz.push_back(fs / (static_cast<double>(lag) + d));
  }
  return traj;
}

FoTrajectory extract_acf(const TestSignal& sig,
                         std::pair<double, double> range_hz) {
  check_range(range_hz);
  const double fs = sig.spec.sample_rate;
  const auto w = static_cast<std::size_t>(std::lround(kFrameLengthS * fs));
  std::size_t nfft = 1;
  while (nfft < 2 * w) nfft <<= 1;

  const auto lag_min = static_cast<std::size_t>(
      std::floor(fs / range_hz.second));
  const auto lag_max = static_cast<std::size_t>(
      std::ceil(fs / range_hz.first));

  std::vector<double> window(w);
  for (std::size_t i = 0; i < w; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (i + 0.5) / w);

  // Autocorrelation of the analysis window; dividing by it removes the
  // taper from the signal autocorrelation instead of biasing the peak.
  std::vector<double> window_acf = autocorrelation_of(window, nfft);

  FoTrajectory traj;
  traj.extractor_id = "acf";
  std::vector<double> buf(nfft, 0.0);
  std::vector<double> r_norm(nfft, 0.0);
  for (const Frame& frame : frame_centers(sig.audio.size(), fs)) {
    std::fill(buf.begin(), buf.end(), 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < w; ++i)
      mean += sig.audio[frame.center - w / 2 + i];
    mean /= static_cast<double>(w);
    double energy = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      const double v = sig.audio[frame.center - w / 2 + i] - mean;
      buf[i] = v * window[i];
      energy += v * v;
    }
    traj.times_s.push_back(frame.time_s);
    if (std::sqrt(energy / w) < kSilenceRms) {
      traj.f0_hz.push_back(quiet_nan());
      continue;
    }

    auto spec = rfft(buf);
    std::vector<cdouble> power(nfft);
    for (std::size_t k = 0; k <= nfft / 2; ++k) {
      power[k] = cdouble(std::norm(spec[k]), 0.0);
      if (k != 0 && k != nfft / 2) power[nfft - k] = power[k];
    }
    fft(power, true);
    const double r0 = power[0].real();
    if (r0 <= 0.0) {
      traj.f0_hz.push_back(quiet_nan());
      continue;
    }
    for (std::size_t lag = 0; lag <= lag_max + 1 && lag < nfft; ++lag)
      r_norm[lag] = power[lag].real() / (r0 * window_acf[lag]);

    // Local maxima scored with a small octave cost that prefers the higher
    // frequency among comparable peaks.
    std::size_t best = 0;
    double best_score = -1e300;
    double best_r = 0.0;
    for (std::size_t lag = std::max<std::size_t>(lag_min, 2);
         lag <= lag_max && lag + 1 < nfft / 2; ++lag) {
      const double r = r_norm[lag];
      if (r < r_norm[lag - 1] || r < r_norm[lag + 1]) continue;
      const double score =
          r - kAcfOctaveCost * std::log2(static_cast<double>(lag));
      if (score > best_score) {
        best_score = score;
        best = lag;
        best_r = r;
      }
    }
    if (best == 0 || best_r < kAcfVoicingThreshold) {
      traj.f0_hz.push_back(quiet_nan());
      continue;
    }
    const double d =
        parabolic_offset(r_norm[best - 1], r_norm[best], r_norm[best + 1]);
    traj.f0_hz.push_back(fs / (static_cast<double>(best) + d));
  }
  return traj;
}

FoTrajectory parse_extractor_output(const std::string& path,
                                    AdapterOutputFormat format,
                                    double frame_rate_hz) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open extractor output: " + path);

  FoTrajectory traj;
  std::string line;
  long line_no = 0;

  auto parse_f0 = [&](std::string field) -> double {
    // Unvoiced frames may be encoded as an empty field, NaN, or 0.
    auto strip = [](std::string s) {
      auto issp = [](unsigned char c) { return std::isspace(c); };
      while (!s.empty() && issp(s.front())) s.erase(s.begin());
      while (!s.empty() && issp(s.back())) s.pop_back();
      return s;
    };
    field = strip(field);
    if (field.empty()) return quiet_nan();
    std::string lower = field;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == "nan") return quiet_nan();
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      throw FormatError("non-numeric f0 field '" + field + "' at line " +
                            std::to_string(line_no) + " of " + path,
                        line_no);
    }
    if (used != field.size())
      throw FormatError("non-numeric f0 field '" + field + "' at line " +
                            std::to_string(line_no) + " of " + path,
                        line_no);
    return (v > 0.0) ? v : quiet_nan();
  };

  if (format == AdapterOutputFormat::csv_time_f0) {
    if (!std::getline(f, line))
      throw FormatError("empty extractor output: " + path, 0);
    ++line_no;
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(), ::isspace),
                 header.end());
    if (header != "time_sec,f0_hz")
      throw FormatError("expected header 'time_sec,f0_hz' at line 1 of " +
                            path,
                        1);
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw FormatError("missing comma at line " + std::to_string(line_no) +
                              " of " + path,
                          line_no);
      double t;
      try {
        t = std::stod(line.substr(0, comma));
      } catch (const std::exception&) {
        throw FormatError("non-numeric time field at line " +
                              std::to_string(line_no) + " of " + path,
                          line_no);
      }
      traj.times_s.push_back(t);
      traj.f0_hz.push_back(parse_f0(line.substr(comma + 1)));
    }
  } else {
    if (!(frame_rate_hz > 0.0))
      throw ParameterError("one-column format needs a positive frame rate");
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty()) continue;
      traj.times_s.push_back(static_cast<double>(traj.times_s.size()) /
                             frame_rate_hz);
      traj.f0_hz.push_back(parse_f0(line));
    }
  }
  if (traj.times_s.empty())
    throw FormatError("extractor output has no frames: " + path, line_no);
  return traj;
}

FoTrajectory run_external(const ExtractorAdapter& adapter,
                          const TestSignal& sig, const std::string& workdir,
                          const WavExportOptions& wav_options) {
  if (adapter.command_template.find("{input}") == std::string::npos ||
      adapter.command_template.find("{output}") == std::string::npos)
    throw ParameterError("adapter '" + adapter.id +
                         "' command template must contain {input} and "
                         "{output}");

  ::mkdir(workdir.c_str(), 0755);
  // absolute paths: the child changes into the working directory
  const std::string absdir =
      std::filesystem::absolute(workdir).lexically_normal().string();
  const std::string wav_path = absdir + "/input.wav";
  const std::string out_path = absdir + "/output.txt";
  const std::string log_path = absdir + "/command.log";
  export_wav(sig, wav_path, wav_options);

  std::string cmd = substitute(adapter.command_template, "{input}", wav_path);
  cmd = substitute(cmd, "{output}", out_path);

  const pid_t pid = ::fork();
  if (pid < 0) throw ExternalError("fork failed for adapter " + adapter.id);
  if (pid == 0) {
    if (::chdir(absdir.c_str()) != 0) _exit(126);
    if (!::freopen(log_path.c_str(), "w", stdout) ||
        !::freopen(log_path.c_str(), "a", stderr))
      _exit(126);
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(adapter.timeout_s);
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw ExternalError("waitpid failed for adapter " + adapter.id);
    if (std::chrono::steady_clock::now() > deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw TimeoutError("adapter " + adapter.id + " exceeded " +
                         std::to_string(adapter.timeout_s) + " s");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw ExternalError("adapter " + adapter.id + " exited with status " +
                        std::to_string(code) + "; log tail: " +
                        read_tail(log_path));
  }

  FoTrajectory traj = parse_extractor_output(out_path, adapter.output_format,
                                             adapter.frame_rate_hz);
  traj.extractor_id = adapter.id;
  traj.time_offset_s = adapter.time_offset_s;
  return traj;
}

std::vector<ExtractorAdapter> load_adapter_registry(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open adapter registry: " + path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const std::exception& e) {
    throw ConfigError("adapter registry is not valid JSON: " +
                      std::string(e.what()));
  }
  if (!doc.is_array())
    throw ConfigError("adapter registry must be a JSON array");

  std::vector<ExtractorAdapter> adapters;
  for (const auto& entry : doc) {
    ExtractorAdapter a;
    a.id = entry.at("id").get<std::string>();
    a.command_template = entry.at("command").get<std::string>();
    const std::string fmt = entry.value("output_format", "csv_time_f0");
    if (fmt == "csv_time_f0") {
      a.output_format = AdapterOutputFormat::csv_time_f0;
    } else if (fmt == "one_column_with_rate") {
      a.output_format = AdapterOutputFormat::one_column_with_rate;
    } else {
      throw ConfigError("adapter '" + a.id + "' has unknown output_format '" +
                        fmt + "'");
    }
    a.frame_rate_hz = entry.value("frame_rate", 100.0);
    a.time_offset_s = entry.value("time_offset", 0.0);
    a.reentrant = entry.value("reentrant", true);
    a.timeout_s = entry.value("timeout_s", 300.0);
    if (a.command_template.find("{input}") == std::string::npos ||
        a.command_template.find("{output}") == std::string::npos)
      throw ConfigError("adapter '" + a.id +
                        "' command must contain {input} and {output}");
    adapters.push_back(std::move(a));
  }
  return adapters;
}

}  // namespace pitchbench
