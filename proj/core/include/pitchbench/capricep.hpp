#ifndef PITCHBENCH_CAPRICEP_HPP
#define PITCHBENCH_CAPRICEP_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "pitchbench/fft.hpp"

namespace pitchbench {

/// One all-pass test signal built from a cascade of second-order sections
/// with randomized center frequencies and phase polarities. Defined
/// circularly over one unit period; every DFT bin has unit magnitude, and
/// nearly all energy is packed into the central allocation interval.
struct UnitCapricep {
  std::vector<double> samples;   // one unit period
  std::vector<cdouble> spectrum; // DFT of samples, bins 0..N/2
  std::uint64_t seed = 0;
  int section_count = 0;
  double pole_radius = 0.0;
  double sample_rate = 0.0;
  double energy = 0.0;           // sum of squared samples (~1 by construction)

  std::size_t period() const { return samples.size(); }
};

struct CapricepParams {
  int section_count = 2048;
  double pole_radius = 0.998;
  double sample_rate = 44100.0;
  double min_energy_ratio = 0.9999;  // compactness contract within N_p
};

/// Generate one unit-CAPRICEP. `period` must be a power of two; the signal
/// is rotated so its energy centroid sits at sample 0.
/// Throws ParameterError on bad arguments and GenerationError (carrying the
/// achieved energy ratio) when the envelope is not compact enough.
UnitCapricep generate_unit_capricep(std::uint64_t seed, int section_count,
                                    double pole_radius, std::size_t period,
                                    double sample_rate,
                                    double min_energy_ratio = 0.9999);

/// Three unit-CAPRICEPs mixed into the periodic base test signal. Each base
/// sequence places polarity-weighted copies of its unit every N_p samples;
/// the polarity pattern is one column of the 4x3 matrix kPolarity whose
/// columns are mutually orthogonal over the four-segment cycle.
struct CapricepSet {
  static constexpr int kPolarity[4][3] = {
      {1, 1, 1},
      {1, -1, 1},
      {1, 1, -1},
      {1, -1, -1},
  };

  std::array<UnitCapricep, 3> units;
  std::size_t allocation_interval = 0;            // N_p
  std::size_t unit_period = 0;                    // 4 * N_p
  std::array<std::vector<double>, 3> base;        // one period each
  std::vector<double> x_mix;                      // sum of the base sequences
};

CapricepSet build_capricep_set(const std::array<std::uint64_t, 3>& seeds,
                               std::size_t allocation_interval,
                               const CapricepParams& params = {});

/// Circular cross-correlation of y with the selected unit, period by period.
/// For y = x_mix the result carries pulses at multiples of N_p whose signs
/// follow the unit's polarity column. y must span whole unit periods.
std::vector<double> recover_pulses(const std::vector<double>& y, int unit_index,
                                   const CapricepSet& set);

/// Periodic shift-and-add with the unit's polarity column, normalized by the
/// cycle length and the unit energy. Cancels cross-correlation from the other
/// two sequences to numerical precision.
std::vector<double> orthogonalize(const std::vector<double>& w, int unit_index,
                                  const CapricepSet& set);

/// Weighted sum (1/4)z1 + (1/4)z2 + (1/2)z3 of the orthogonalized sequences.
/// A pure x_mix input collapses to a single unit impulse per period.
std::vector<double> extend(const std::vector<double>& z1,
                           const std::vector<double>& z2,
                           const std::vector<double>& z3);

}  // namespace pitchbench

#endif  // PITCHBENCH_CAPRICEP_HPP
