#ifndef PITCHBENCH_TRAJECTORY_HPP
#define PITCHBENCH_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "pitchbench/signal.hpp"

namespace pitchbench {

/// A pitch extractor's output: timestamped fundamental estimates. Unvoiced
/// frames carry NaN (nonpositive values are treated the same on ingest).
struct FoTrajectory {
  std::vector<double> times_s;
  std::vector<double> f0_hz;
  std::string extractor_id;
  double time_offset_s = 0.0;  // alignment correction added to every time
};

struct ResampledCents {
  std::vector<double> cents;  // deviation from the carrier, full signal length
  double missing_fraction = 0.0;
};

/// Converts the trajectory to a 44100 Hz cent-deviation sequence: applies the
/// time offset, bridges unvoiced gaps by linear interpolation between voiced
/// neighbors (holding at the edges), interpolates to the sample clock, and
/// subtracts the carrier. missing_fraction is the unvoiced share of the
/// analysis window; above 0.5 the measurement is rejected.
ResampledCents resample_to_cents(const FoTrajectory& traj, double f_tgt_cents,
                                 double sample_rate,
                                 const AnalysisWindow& window,
                                 std::size_t total_samples,
                                 std::size_t unit_period);

}  // namespace pitchbench

#endif  // PITCHBENCH_TRAJECTORY_HPP
