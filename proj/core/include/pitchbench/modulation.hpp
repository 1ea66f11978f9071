#ifndef PITCHBENCH_MODULATION_HPP
#define PITCHBENCH_MODULATION_HPP

#include <cstddef>
#include <vector>

#include "pitchbench/capricep.hpp"

namespace pitchbench {

/// Frequency-modulation trajectory in musical cents, sample-synchronous with
/// the audio clock. Standard deviation equals the modulation depth.
struct ModulationTrajectory {
  std::vector<double> f_cent;
  double fm_depth_cents = 0.0;
  double gaussian_sigma_s = 0.0;
  std::size_t n_segments = 0;
  std::size_t unit_period = 0;
  double sample_rate = 0.0;
};

/// Sampled Gaussian used to smooth the mixed base signal. Taps run from
/// -radius to +radius and are truncated where the amplitude falls below
/// 1e-8 of the peak; the taps sum to 1.
struct GaussianKernel {
  std::vector<double> taps;
  std::size_t radius = 0;
};

GaussianKernel gaussian_kernel(double sigma_s, double sample_rate);

/// Concatenates n_segments unit periods of the mixed base signal, smooths
/// them with the Gaussian, and scales the result so its sample standard
/// deviation equals fm_depth_cents.
ModulationTrajectory make_modulation(const CapricepSet& set,
                                     double fm_depth_cents, double sigma_s,
                                     std::size_t n_segments = 9);

}  // namespace pitchbench

#endif  // PITCHBENCH_MODULATION_HPP
