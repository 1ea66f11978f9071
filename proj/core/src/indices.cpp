#include "pitchbench/indices.hpp"

#include <algorithm>
#include <cmath>

#include "pitchbench/errors.hpp"

namespace pitchbench {

BandwidthResult bandwidth(const TransferAnalysis& analysis,
                          double eval_cap_hz) {
  const auto& f = analysis.freq_long;
  std::size_t k_b = 0;
  bool crossed = false;
  std::size_t k_top = 0;
  for (std::size_t k = 1; k < f.size() && f[k] <= eval_cap_hz; ++k) {
    if (!analysis.valid_td[k]) continue;
    k_top = k;
    if (!crossed && analysis.p_lti[k] < analysis.p_td[k]) {
      k_b = k;
      crossed = true;
      break;
    }
  }
  if (!crossed) k_b = k_top;
  if (k_b == 0) throw IndexUndefinedError("no usable bins below the band cap");

  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k <= k_b; ++k) {
    if (!analysis.valid_long[k]) continue;
    num += f[k] * f[k] * analysis.p_lti[k];
    den += analysis.p_lti[k];
  }
  if (den <= 0.0) throw IndexUndefinedError("empty bandwidth evaluation set");

  BandwidthResult r;
  r.bw_hz = std::sqrt(num / den);
  r.f_hl_hz = f[k_b];
  r.crossed = crossed;
  return r;
}

double snr_fm(const TransferAnalysis& analysis, double bw_hz) {
  const auto& f = analysis.freq_long;
  double lti = 0.0, td = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 1; k < f.size() && f[k] < bw_hz; ++k) {
    if (!analysis.valid_td[k]) continue;
    lti += analysis.p_lti[k];
    td += analysis.p_td[k];
    ++count;
  }
  if (count == 0 || td <= 0.0)
    throw IndexUndefinedError("no bins below the bandwidth for the SNR");
  return 10.0 * std::log10(lti / td);
}

double sd_fd(const TransferAnalysis& analysis) {
  const auto& f = analysis.freq_long;
  const double df = f[1] - f[0];
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t k = 1; k + 1 < f.size() && f[k + 1] < 10.0; ++k) {
    if (!analysis.valid_long[k] || !analysis.valid_long[k + 1]) continue;
    if (analysis.p_lti[k] <= 0.0 || analysis.p_lti[k + 1] <= 0.0) continue;
    const double step =
        10.0 * std::log10(analysis.p_lti[k + 1] / analysis.p_lti[k]);
    acc += step * step;
    ++pairs;
  }
  if (pairs == 0)
    throw IndexUndefinedError("no bin pairs below 10 Hz for the gain change");
  return std::sqrt(acc / (static_cast<double>(pairs) * df));
}

double mean_gain_db(const TransferAnalysis& analysis) {
  const auto& f = analysis.freq_long;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 1; k < f.size() && f[k] < 10.0; ++k) {
    if (!analysis.valid_long[k]) continue;
    acc += analysis.p_lti[k];
    ++count;
  }
  if (count == 0)
    throw IndexUndefinedError("no bins below 10 Hz for the mean gain");
  return 10.0 * std::log10(acc / static_cast<double>(count));
}

double sd_td(const std::vector<std::pair<double, double>>& per_target_gain,
             double f_low_hz, double f_high_hz) {
  const double lo = 12.0 * std::log2(f_low_hz);
  const double hi = 12.0 * std::log2(f_high_hz);
  std::vector<std::pair<double, double>> in_range;
  for (const auto& g : per_target_gain)
    if (g.first >= lo - 1e-9 && g.first <= hi + 1e-9) in_range.push_back(g);
  if (in_range.size() < 2)
    throw IndexUndefinedError("need at least two targets inside the range");
  std::sort(in_range.begin(), in_range.end());

  const double step = in_range[1].first - in_range[0].first;
  for (std::size_t i = 1; i + 1 < in_range.size(); ++i)
    if (std::abs((in_range[i + 1].first - in_range[i].first) - step) > 1e-9)
      throw ParameterError("target grid is not uniform in semitones");

  double acc = 0.0;
  const std::size_t pairs = in_range.size() - 1;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double d = in_range[i + 1].second - in_range[i].second;
    acc += d * d;
  }
  return std::sqrt(acc / (static_cast<double>(pairs) * step));
}

double median(std::vector<double> values) {
  if (values.empty())
    throw ParameterError("median of an empty set is undefined");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return (n % 2 == 1) ? values[n / 2]
                      : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<MapRecord> performance_map(
    const std::vector<ExtractorSweepIndices>& collection) {
  std::vector<MapRecord> records;
  records.reserve(collection.size());
  for (const auto& sweep : collection) {
    if (sweep.bw_hz.empty()) continue;
    MapRecord rec;
    rec.extractor_id = sweep.extractor_id;
    rec.bw_hz_median = median(sweep.bw_hz);
    rec.snr_fm_db_median = median(sweep.snr_fm_db);
    rec.sd_fd_median = median(sweep.sd_fd);
    rec.sd_td = sweep.sd_td;
    rec.targets_ok = sweep.bw_hz.size();
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace pitchbench
