#ifndef PITCHBENCH_INDICES_HPP
#define PITCHBENCH_INDICES_HPP

#include <string>
#include <vector>

#include "pitchbench/response.hpp"

namespace pitchbench {

struct BandwidthResult {
  double bw_hz = 0.0;    // second-order-moment bandwidth of the LTI power
  double f_hl_hz = 0.0;  // first LTI/TD crossing (or the band edge if none)
  bool crossed = false;  // false when the curves never cross in the band
};

/// Crossing search runs over valid bins up to eval_cap_hz. The moment sum
/// excludes the zero-frequency bin.
BandwidthResult bandwidth(const TransferAnalysis& analysis,
                          double eval_cap_hz = 100.0);

/// In-band LTI-to-total-disturbance ratio in dB over 0 < f < bw_hz.
double snr_fm(const TransferAnalysis& analysis, double bw_hz);

/// RMS gain-change rate along the modulation-frequency axis, dB/Hz,
/// over bin pairs with 0 < f[k] and f[k+1] < 10 Hz.
double sd_fd(const TransferAnalysis& analysis);

/// Average LTI gain over 0 < f < 10 Hz, in dB.
double mean_gain_db(const TransferAnalysis& analysis);

/// RMS gain-change rate across the carrier grid, dB/semitone. Input pairs
/// are (carrier position in semitones re 1 Hz, mean gain in dB) and must be
/// uniformly spaced.
double sd_td(const std::vector<std::pair<double, double>>& per_target_gain,
             double f_low_hz, double f_high_hz);

struct MapRecord {
  std::string extractor_id;
  double bw_hz_median = 0.0;
  double snr_fm_db_median = 0.0;
  double sd_fd_median = 0.0;
  double sd_td = 0.0;
  std::size_t targets_ok = 0;
};

struct ExtractorSweepIndices {
  std::string extractor_id;
  std::vector<double> bw_hz;      // completed targets only
  std::vector<double> snr_fm_db;
  std::vector<double> sd_fd;
  double sd_td = 0.0;
};

std::vector<MapRecord> performance_map(
    const std::vector<ExtractorSweepIndices>& collection);

double median(std::vector<double> values);

}  // namespace pitchbench

#endif  // PITCHBENCH_INDICES_HPP
