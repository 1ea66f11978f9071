#ifndef PITCHBENCH_RESPONSE_HPP
#define PITCHBENCH_RESPONSE_HPP

#include <cstdint>
#include <vector>

#include "pitchbench/capricep.hpp"
#include "pitchbench/signal.hpp"

namespace pitchbench {

enum class ResponseRole { measured, reference };

/// Impulse-level responses recovered from a cent-deviation sequence.
/// u_long holds one extended response per analyzed period (unit-period
/// samples each); u_short holds the per-sequence, per-combination responses
/// (allocation-interval samples each), indexed (period, sequence, anchor).
struct ResponseSet {
  std::vector<std::vector<double>> u_long;   // periods x unit_period
  std::vector<std::vector<double>> u_short;  // periods*3*4 x N_p
  std::size_t allocation_interval = 0;
  std::size_t unit_period = 0;
  double sample_rate = 0.0;
  ResponseRole role = ResponseRole::measured;

  std::size_t periods() const { return u_long.size(); }
  const std::vector<double>& short_response(std::size_t period, int sequence,
                                            int anchor) const {
    return u_short[(period * 3 + sequence) * 4 + anchor];
  }
};

/// Recovers the response set from a cent-deviation signal. The window must
/// cover at least six periods; one extra period of signal beyond the window
/// is read so the four short-response anchors per period can slide across
/// the period boundary without wrapping.
ResponseSet compute_responses(const std::vector<double>& cent_signal,
                              const CapricepSet& set,
                              const AnalysisWindow& window,
                              ResponseRole role = ResponseRole::measured);

/// Modulation-frequency transfer function and disturbance power estimates on
/// the discrete modulation-frequency axes of the long (unit period) and
/// short (allocation interval) analyses.
struct TransferAnalysis {
  std::vector<double> freq_long;   // Hz, bins 0..N/2
  std::vector<double> freq_short;
  std::vector<cdouble> H;              // period-averaged transfer function
  std::vector<double> p_lti;           // |H|^2
  std::vector<double> sigma2_tv;       // long grid
  std::vector<double> sigma2_nlti;     // short grid
  std::vector<double> sigma2_nlti_long;  // power-interpolated to the long grid
  std::vector<double> p_td;            // sigma2_tv + sigma2_nlti_long
  std::vector<std::uint8_t> valid_long;   // reference above the bin floor
  std::vector<std::uint8_t> valid_short;
  std::vector<std::uint8_t> valid_td;     // both curves defined
  double f_tgt_hz = 0.0;
  double fm_depth_cents = 0.0;
};

/// Ratio of measured to reference long-response spectra, averaged over the
/// analyzed periods, on bins where the reference stays above 1e-6 of its
/// spectral peak.
TransferAnalysis transfer_function(const ResponseSet& meas,
                                   const ResponseSet& ref);

/// Unbiased sample variance of the per-period transfer functions.
std::vector<double> tv_variance(const ResponseSet& meas,
                                const ResponseSet& ref);

struct NltiVariance {
  std::vector<double> short_grid;
  std::vector<double> long_grid;
  std::vector<std::uint8_t> valid_short;
  std::vector<std::uint8_t> valid_long;
};

/// Variance of the transfer function across the three sequences within each
/// (period, anchor) cell, averaged over all cells; measures nonlinear
/// time-invariant distortion.
NltiVariance nlti_variance(const ResponseSet& meas, const ResponseSet& ref);

/// Runs the three estimators and assembles the total-disturbance power.
TransferAnalysis analyze_responses(const ResponseSet& meas,
                                   const ResponseSet& ref, double f_tgt_hz,
                                   double fm_depth_cents);

/// Delay of the energy peak of the mean long response, in seconds. The
/// magnitude curves are delay-invariant, so this only matters for phase
/// reporting; it gives adapter authors a measured value for time_offset.
double estimate_alignment_offset(const ResponseSet& meas);

}  // namespace pitchbench

#endif  // PITCHBENCH_RESPONSE_HPP
