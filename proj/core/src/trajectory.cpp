#include "pitchbench/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "pitchbench/cents.hpp"
#include "pitchbench/errors.hpp"

namespace pitchbench {

ResampledCents resample_to_cents(const FoTrajectory& traj, double f_tgt_cents,
                                 double sample_rate,
                                 const AnalysisWindow& window,
                                 std::size_t total_samples,
                                 std::size_t unit_period) {
  if (traj.times_s.empty() || traj.times_s.size() != traj.f0_hz.size())
    throw ParameterError("empty or inconsistent trajectory");
  for (std::size_t i = 1; i < traj.times_s.size(); ++i)
    if (!(traj.times_s[i] > traj.times_s[i - 1]))
      throw ParameterError("trajectory times must be strictly increasing");

  // Voiced support in cents, with the alignment offset applied.
  std::vector<double> vt, vc;
  vt.reserve(traj.times_s.size());
  vc.reserve(traj.times_s.size());
  for (std::size_t i = 0; i < traj.times_s.size(); ++i) {
    const double f = traj.f0_hz[i];
    if (std::isfinite(f) && f > 0.0) {
      vt.push_back(traj.times_s[i] + traj.time_offset_s);
      vc.push_back(hz_to_cents(f) - f_tgt_cents);
    }
  }

  const std::size_t w_begin = window.start;
  const std::size_t w_end = window.start + window.periods * unit_period;
  if (w_end > total_samples)
    throw ParameterError("analysis window exceeds the signal length");

  // A sample counts as unvoiced when its nearest frame is unvoiced (or when
  // no frame covers it at all).
  std::size_t missing = 0;
  const std::size_t w_count = w_end - w_begin;
  if (vt.empty()) {
    throw MeasurementError("trajectory has no voiced frames", 1.0);
  }
  {
    std::size_t j = 0;  // frame index walking with the sample clock
    for (std::size_t n = w_begin; n < w_end; ++n) {
      const double t = static_cast<double>(n) / sample_rate;
      while (j + 1 < traj.times_s.size() &&
             std::abs(traj.times_s[j + 1] + traj.time_offset_s - t) <=
                 std::abs(traj.times_s[j] + traj.time_offset_s - t))
        ++j;
      const double f = traj.f0_hz[j];
      if (!(std::isfinite(f) && f > 0.0)) ++missing;
    }
  }
  const double missing_fraction =
      static_cast<double>(missing) / static_cast<double>(w_count);
  if (missing_fraction > 0.5)
    throw MeasurementError(
        "unvoiced fraction " + std::to_string(missing_fraction) +
            " exceeds 0.5 inside the analysis window",
        missing_fraction);

  ResampledCents out;
  out.missing_fraction = missing_fraction;
  out.cents.resize(total_samples);
  std::size_t j = 0;
  for (std::size_t n = 0; n < total_samples; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    while (j + 1 < vt.size() && vt[j + 1] <= t) ++j;
    double c;
    if (t <= vt.front()) {
      c = vc.front();
    } else if (t >= vt.back()) {
      c = vc.back();
    } else {
      const double span = vt[j + 1] - vt[j];
      const double a = (t - vt[j]) / span;
      c = vc[j] + a * (vc[j + 1] - vc[j]);
    }
    out.cents[n] = c;
  }
  return out;
}

}  // namespace pitchbench
