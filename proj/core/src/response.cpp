#include "pitchbench/response.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "pitchbench/errors.hpp"

namespace pitchbench {

namespace {

constexpr double kReferenceBinFloor = 1e-6;

std::vector<std::vector<cdouble>> long_spectra(const ResponseSet& rs) {
  std::vector<std::vector<cdouble>> specs(rs.periods());
  for (std::size_t p = 0; p < rs.periods(); ++p) specs[p] = rfft(rs.u_long[p]);
  return specs;
}

std::vector<cdouble> mean_spectrum(const std::vector<std::vector<cdouble>>& s) {
  std::vector<cdouble> mean(s.front().size(), cdouble(0.0, 0.0));
  for (const auto& spec : s)
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += spec[k];
  const double inv = 1.0 / static_cast<double>(s.size());
  for (auto& v : mean) v *= inv;
  return mean;
}

std::vector<std::uint8_t> floor_mask(const std::vector<cdouble>& ref) {
  double peak = 0.0;
  for (const auto& v : ref) peak = std::max(peak, std::abs(v));
  std::vector<std::uint8_t> mask(ref.size(), 0);
  for (std::size_t k = 0; k < ref.size(); ++k)
    mask[k] = std::abs(ref[k]) > kReferenceBinFloor * peak ? 1 : 0;
  return mask;
}

void check_compatible(const ResponseSet& meas, const ResponseSet& ref) {
  if (meas.unit_period != ref.unit_period ||
      meas.allocation_interval != ref.allocation_interval ||
      meas.periods() != ref.periods())
    throw ParameterError("measured and reference response sets do not match");
  if (meas.periods() == 0) throw ParameterError("empty response set");
}

}  // namespace

ResponseSet compute_responses(const std::vector<double>& cent_signal,
                              const CapricepSet& set,
                              const AnalysisWindow& window,
                              ResponseRole role) {
  const std::size_t n = set.unit_period;
  const std::size_t np = set.allocation_interval;
  if (window.periods < 6)
    throw ParameterError("analysis window must cover at least 6 unit periods");
  const std::size_t periods = window.periods;
  if (cent_signal.size() < window.start + (periods + 1) * n)
    throw ParameterError(
        "signal too short: the analysis reads one period beyond the window");

  // Recovered (matched-filtered) responses for each period in the window
  // plus the read-ahead period.
  std::vector<std::array<std::vector<double>, 3>> recovered(periods + 1);
  std::vector<double> segment(n);
  for (std::size_t q = 0; q <= periods; ++q) {
    const auto begin = cent_signal.begin() + window.start + q * n;
    std::copy(begin, begin + n, segment.begin());
    for (int i = 0; i < 3; ++i)
      recovered[q][i] = recover_pulses(segment, i, set);
  }

  ResponseSet rs;
  rs.allocation_interval = np;
  rs.unit_period = n;
  rs.sample_rate = set.units[0].sample_rate;
  rs.role = role;

  rs.u_long.resize(periods);
  for (std::size_t p = 0; p < periods; ++p)
    rs.u_long[p] = extend(orthogonalize(recovered[p][0], 0, set),
                          orthogonalize(recovered[p][1], 1, set),
                          orthogonalize(recovered[p][2], 2, set));

  // Short responses: for each anchor j the four consecutive segments
  // starting at (period p, segment j) are folded, each weighted by its own
  // polarity. This is the only four-segment combination that cancels the
  // other two sequences exactly while keeping unit gain at every anchor;
  // anchors past the period edge take segments from the next period. The
  // read window is centered on the pulse (offsets -N_p/2 .. N_p/2, stored
  // circularly) so the response's wrapped tail keeps a single aligned
  // weight for every polarity column.
  rs.u_short.resize(periods * 3 * 4);
  const auto half_np = static_cast<std::ptrdiff_t>(np / 2);
  for (std::size_t p = 0; p < periods; ++p) {
    for (int i = 0; i < 3; ++i) {
      const double scale = 1.0 / (4.0 * set.units[i].energy);
      for (int j = 0; j < 4; ++j) {
        auto& out = rs.u_short[(p * 3 + i) * 4 + j];
        out.assign(np, 0.0);
        for (int l = 0; l < 4; ++l) {
          const int s = j + l;
          const int m = s % 4;
          const std::size_t q = p + static_cast<std::size_t>(s / 4);
          const double c = CapricepSet::kPolarity[m][i] * scale;
          const double* src = recovered[q][i].data();
          const auto base = static_cast<std::ptrdiff_t>(m * np);
          for (std::size_t t = 0; t < np; ++t) {
            const std::ptrdiff_t off =
                static_cast<std::ptrdiff_t>(t) -
                (static_cast<std::ptrdiff_t>(t) >= half_np
                     ? static_cast<std::ptrdiff_t>(np)
                     : 0);
            const std::size_t idx = static_cast<std::size_t>(
                (base + off + static_cast<std::ptrdiff_t>(n)) %
                static_cast<std::ptrdiff_t>(n));
            out[t] += c * src[idx];
          }
        }
      }
    }
  }
  return rs;
}

TransferAnalysis transfer_function(const ResponseSet& meas,
                                   const ResponseSet& ref) {
  check_compatible(meas, ref);
  const std::size_t n = meas.unit_period;
  const double fs = meas.sample_rate;

  auto meas_specs = long_spectra(meas);
  auto ref_mean = mean_spectrum(long_spectra(ref));
  auto valid = floor_mask(ref_mean);

  TransferAnalysis ta;
  ta.freq_long.resize(n / 2 + 1);
  for (std::size_t k = 0; k < ta.freq_long.size(); ++k)
    ta.freq_long[k] = static_cast<double>(k) * fs / static_cast<double>(n);
  ta.freq_short.resize(meas.allocation_interval / 2 + 1);
  for (std::size_t k = 0; k < ta.freq_short.size(); ++k)
    ta.freq_short[k] = static_cast<double>(k) * fs /
                       static_cast<double>(meas.allocation_interval);

  bool index_band_reachable = false;
  for (std::size_t k = 0; k < valid.size(); ++k)
    if (valid[k] && ta.freq_long[k] > 0.0 && ta.freq_long[k] < 10.0)
      index_band_reachable = true;
  if (!index_band_reachable)
    throw ConfigError(
        "reference bin floor excludes the whole 0-10 Hz index band");

  ta.H.assign(valid.size(), cdouble(0.0, 0.0));
  ta.p_lti.assign(valid.size(), 0.0);
  ta.valid_long = valid;
  const double inv_p = 1.0 / static_cast<double>(meas.periods());
  for (std::size_t k = 0; k < valid.size(); ++k) {
    if (!valid[k]) continue;
    cdouble acc(0.0, 0.0);
    for (std::size_t p = 0; p < meas.periods(); ++p)
      acc += meas_specs[p][k] / ref_mean[k];
    ta.H[k] = acc * inv_p;
    ta.p_lti[k] = std::norm(ta.H[k]);
  }
  return ta;
}

std::vector<double> tv_variance(const ResponseSet& meas,
                                const ResponseSet& ref) {
  check_compatible(meas, ref);
  if (meas.periods() < 2)
    throw ParameterError("variance needs at least two periods");

  auto meas_specs = long_spectra(meas);
  auto ref_mean = mean_spectrum(long_spectra(ref));
  auto valid = floor_mask(ref_mean);

  const std::size_t bins = ref_mean.size();
  const std::size_t np = meas.periods();
  std::vector<double> out(bins, 0.0);
  std::vector<cdouble> h(np);
  for (std::size_t k = 0; k < bins; ++k) {
    if (!valid[k]) continue;
    cdouble mean(0.0, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
      h[p] = meas_specs[p][k] / ref_mean[k];
      mean += h[p];
    }
    mean /= static_cast<double>(np);
    double acc = 0.0;
    for (std::size_t p = 0; p < np; ++p) acc += std::norm(h[p] - mean);
    out[k] = acc / static_cast<double>(np - 1);
  }
  return out;
}

NltiVariance nlti_variance(const ResponseSet& meas, const ResponseSet& ref) {
  check_compatible(meas, ref);
  const std::size_t np = meas.allocation_interval;
  const std::size_t bins = np / 2 + 1;
  const std::size_t periods = meas.periods();

  std::vector<std::vector<cdouble>> meas_specs(periods * 12);
  std::vector<std::vector<cdouble>> ref_specs(periods * 12);
  for (std::size_t idx = 0; idx < periods * 12; ++idx) {
    meas_specs[idx] = rfft(meas.u_short[idx]);
    ref_specs[idx] = rfft(ref.u_short[idx]);
  }

  std::vector<cdouble> ref_mean(bins, cdouble(0.0, 0.0));
  for (std::size_t idx = 0; idx < periods * 12; ++idx)
    for (std::size_t k = 0; k < bins; ++k) ref_mean[k] += ref_specs[idx][k];
  for (auto& v : ref_mean) v /= static_cast<double>(periods * 12);

  NltiVariance nv;
  nv.valid_short = floor_mask(ref_mean);
  nv.short_grid.assign(bins, 0.0);

  // Each cell is normalized by its own reference cell, which divides out
  // the small deterministic per-sequence edge effects of the short window;
  // then the mean over the three sequences within each (period, anchor)
  // cell and the unbiased variance across them, averaged over all cells.
  for (std::size_t k = 0; k < bins; ++k) {
    if (!nv.valid_short[k]) continue;
    double cell_sum = 0.0;
    for (std::size_t p = 0; p < periods; ++p) {
      for (int j = 0; j < 4; ++j) {
        cdouble h[3];
        cdouble mean(0.0, 0.0);
        for (int i = 0; i < 3; ++i) {
          const std::size_t idx = (p * 3 + i) * 4 + j;
          h[i] = meas_specs[idx][k] / ref_specs[idx][k];
          mean += h[i];
        }
        mean /= 3.0;
        double var = 0.0;
        for (int i = 0; i < 3; ++i) var += std::norm(h[i] - mean);
        cell_sum += var / 2.0;
      }
    }
    nv.short_grid[k] = cell_sum / static_cast<double>(periods * 4);
  }

  // Power-domain linear interpolation onto the long grid.
  const double fs = meas.sample_rate;
  const std::size_t n_long = meas.unit_period;
  const std::size_t long_bins = n_long / 2 + 1;
  nv.long_grid.assign(long_bins, 0.0);
  nv.valid_long.assign(long_bins, 0);
  std::size_t last_valid_short = 0;
  for (std::size_t k = 0; k < bins; ++k)
    if (nv.valid_short[k]) last_valid_short = k;
  const double f_max = static_cast<double>(last_valid_short) * fs /
                       static_cast<double>(np);
  const double df_short = fs / static_cast<double>(np);
  for (std::size_t k = 0; k < long_bins; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n_long);
    if (f > f_max) break;
    const double pos = f / df_short;
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, last_valid_short);
    if (!nv.valid_short[lo] || !nv.valid_short[hi]) continue;
    const double a = pos - static_cast<double>(lo);
    nv.long_grid[k] =
        (1.0 - a) * nv.short_grid[lo] + a * nv.short_grid[hi];
    nv.valid_long[k] = 1;
  }
  return nv;
}

double estimate_alignment_offset(const ResponseSet& meas) {
  if (meas.periods() == 0) throw ParameterError("empty response set");
  const std::size_t n = meas.unit_period;
  std::vector<double> mean(n, 0.0);
  for (const auto& u : meas.u_long)
    for (std::size_t i = 0; i < n; ++i) mean[i] += u[i];
  std::size_t peak = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = mean[i] * mean[i];
    if (e > best) {
      best = e;
      peak = i;
    }
  }
  // circular: the second half of the period is a negative delay
  const auto signed_peak =
      (peak <= n / 2) ? static_cast<std::ptrdiff_t>(peak)
                      : static_cast<std::ptrdiff_t>(peak) -
                            static_cast<std::ptrdiff_t>(n);
  return static_cast<double>(signed_peak) / meas.sample_rate;
}

TransferAnalysis analyze_responses(const ResponseSet& meas,
                                   const ResponseSet& ref, double f_tgt_hz,
                                   double fm_depth_cents) {
  TransferAnalysis ta = transfer_function(meas, ref);
  ta.sigma2_tv = tv_variance(meas, ref);
  NltiVariance nv = nlti_variance(meas, ref);
  ta.sigma2_nlti = std::move(nv.short_grid);
  ta.sigma2_nlti_long = std::move(nv.long_grid);
  ta.valid_short = std::move(nv.valid_short);

  ta.p_td.assign(ta.p_lti.size(), 0.0);
  ta.valid_td.assign(ta.p_lti.size(), 0);
  for (std::size_t k = 0; k < ta.p_td.size(); ++k) {
    if (ta.valid_long[k] && nv.valid_long[k]) {
      ta.p_td[k] = ta.sigma2_tv[k] + ta.sigma2_nlti_long[k];
      ta.valid_td[k] = 1;
    }
  }
  ta.f_tgt_hz = f_tgt_hz;
  ta.fm_depth_cents = fm_depth_cents;
  return ta;
}

}  // namespace pitchbench
