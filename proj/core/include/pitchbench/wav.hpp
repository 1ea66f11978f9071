#ifndef PITCHBENCH_WAV_HPP
#define PITCHBENCH_WAV_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace pitchbench {

/// Writes mono 24-bit PCM. Samples are expected in [-1, 1); values outside
/// are clipped at the integer rails.
void write_wav24(const std::string& path, const std::vector<double>& samples,
                 double sample_rate);

struct WavData {
  std::vector<double> samples;  // mono, scaled to [-1, 1)
  double sample_rate = 0.0;
  int bits_per_sample = 0;
};

/// Reads mono PCM WAV (16 or 24 bit). Used by tests and available to
/// adapter authors for round-trip checks.
WavData read_wav(const std::string& path);

}  // namespace pitchbench

#endif  // PITCHBENCH_WAV_HPP
