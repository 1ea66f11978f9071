#include "pitchbench/modulation.hpp"

#include <cmath>
#include <string>

#include "pitchbench/errors.hpp"
#include "pitchbench/fft.hpp"

namespace pitchbench {

namespace {

// The 20 s signal budget minus the 2 s carrier lead-in, at 44100 Hz.
constexpr std::size_t kModulationBudgetSamples = 793800;

}  // namespace

GaussianKernel gaussian_kernel(double sigma_s, double sample_rate) {
  if (sigma_s <= 0.0) throw ParameterError("gaussian sigma must be positive");
  const double sigma_n = sigma_s * sample_rate;
  // Truncate where the amplitude falls to 1e-8 of the peak.
  const double cutoff = std::sqrt(2.0 * std::log(1e8));
  GaussianKernel kernel;
  kernel.radius = static_cast<std::size_t>(std::ceil(sigma_n * cutoff));
  kernel.taps.resize(2 * kernel.radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < kernel.taps.size(); ++i) {
    double d = (static_cast<double>(i) - static_cast<double>(kernel.radius)) /
               sigma_n;
    kernel.taps[i] = std::exp(-0.5 * d * d);
    sum += kernel.taps[i];
  }
  for (auto& t : kernel.taps) t /= sum;
  return kernel;
}

ModulationTrajectory make_modulation(const CapricepSet& set,
                                     double fm_depth_cents, double sigma_s,
                                     std::size_t n_segments) {
  if (fm_depth_cents < 0.0)
    throw ParameterError("modulation depth must be nonnegative");
  if (n_segments < 1) throw ParameterError("need at least one segment");
  const std::size_t total = n_segments * set.unit_period;
  if (total > kModulationBudgetSamples)
    throw ParameterError("modulation span of " + std::to_string(total) +
                         " samples exceeds the test-signal budget");

  std::vector<double> tiled(total);
  for (std::size_t i = 0; i < total; ++i)
    tiled[i] = set.x_mix[i % set.unit_period];

  const double fs = set.units[0].sample_rate;
  GaussianKernel kernel = gaussian_kernel(sigma_s, fs);
  std::vector<double> smoothed = convolve_same(tiled, kernel.taps,
                                               kernel.radius);

  double mean = 0.0;
  for (double v : smoothed) mean += v;
  mean /= static_cast<double>(smoothed.size());
  double var = 0.0;
  for (double v : smoothed) var += (v - mean) * (v - mean);
  var /= static_cast<double>(smoothed.size());
  const double sd = std::sqrt(var);
  const double scale = (sd > 0.0) ? fm_depth_cents / sd : 0.0;

  ModulationTrajectory traj;
  traj.f_cent.resize(total);
  for (std::size_t i = 0; i < total; ++i) traj.f_cent[i] = smoothed[i] * scale;
  traj.fm_depth_cents = fm_depth_cents;
  traj.gaussian_sigma_s = sigma_s;
  traj.n_segments = n_segments;
  traj.unit_period = set.unit_period;
  traj.sample_rate = fs;
  return traj;
}

}  // namespace pitchbench
