#ifndef PITCHBENCH_CENTS_HPP
#define PITCHBENCH_CENTS_HPP

#include <cmath>

#include "pitchbench/errors.hpp"

namespace pitchbench {

// Musical-cent mapping: f = ref * 2^(c/1200).

inline double cents_to_hz(double cents, double reference_hz = 1.0) {
  if (reference_hz <= 0.0)
    throw ParameterError("cent conversion needs a positive reference");
  return reference_hz * std::exp2(cents / 1200.0);
}

inline double hz_to_cents(double hz, double reference_hz = 1.0) {
  if (hz <= 0.0 || reference_hz <= 0.0)
    throw ParameterError("cent conversion needs positive frequencies");
  return 1200.0 * std::log2(hz / reference_hz);
}

inline double hz_to_semitones(double hz) { return hz_to_cents(hz) / 100.0; }

}  // namespace pitchbench

#endif  // PITCHBENCH_CENTS_HPP
