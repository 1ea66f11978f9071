#include "pitchbench/capricep.hpp"

#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "pitchbench/errors.hpp"

namespace pitchbench {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// mt19937_64 with explicit mappings instead of std distributions, which are
// implementation-defined and would break cross-platform reproducibility.
struct SeededRng {
  explicit SeededRng(std::uint64_t seed) : gen(seed) {}
  double uniform01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  int polarity() { return (gen() & 1u) ? 1 : -1; }
  std::mt19937_64 gen;
};

std::size_t centroid_shift(const std::vector<double>& x) {
  // Circular mean of the energy distribution; robust for compact signals.
  const std::size_t n = x.size();
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = x[i] * x[i];
    double ang = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    re += e * std::cos(ang);
    im += e * std::sin(ang);
  }
  double psi = std::atan2(im, re);
  if (psi < 0) psi += kTwoPi;
  auto shift = static_cast<std::size_t>(
      std::llround(psi / kTwoPi * static_cast<double>(n)));
  return shift % n;
}

void check_unit_index(int unit_index) {
  if (unit_index < 0 || unit_index > 2)
    throw ParameterError("unit index must be 0..2, got " +
                         std::to_string(unit_index));
}

}  // namespace

UnitCapricep generate_unit_capricep(std::uint64_t seed, int section_count,
                                    double pole_radius, std::size_t period,
                                    double sample_rate,
                                    double min_energy_ratio) {
  if (!is_power_of_two(period))
    throw ParameterError("unit period must be a power of two, got " +
                         std::to_string(period));
  if (pole_radius <= 0.0 || pole_radius >= 1.0)
    throw ParameterError("pole radius must lie in (0, 1)");
  if (section_count < 1) throw ParameterError("need at least one section");

  SeededRng rng(seed);
  // Velvet-noise style allocation: one section per frequency slot of width
  // fs/(2*sections), jittered by up to half a slot, with a random polarity
  // that flips the section's phase contribution.
  std::vector<double> cos_theta(section_count);
  std::vector<int> polarity(section_count);
  const double spacing = sample_rate / (2.0 * section_count);
  for (int i = 0; i < section_count; ++i) {
    double center = (i + 0.5 + (rng.uniform01() - 0.5)) * spacing;
    cos_theta[i] = std::cos(kTwoPi * center / sample_rate);
    polarity[i] = rng.polarity();
  }

  // Each section is evaluated as conj(d)/d with d the all-pass denominator
  // on the unit circle, so every factor has exactly unit magnitude; negative
  // polarity uses the reciprocal. Linear-phase prefactors are dropped since
  // the result is re-centered below anyway.
  const std::size_t half = period / 2;
  const double r = pole_radius;
  const double r2 = r * r;
  std::vector<cdouble> spec_half(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    double w = kTwoPi * static_cast<double>(k) / static_cast<double>(period);
    cdouble e1(std::cos(w), -std::sin(w));
    cdouble e2 = e1 * e1;
    cdouble acc(1.0, 0.0);
    for (int i = 0; i < section_count; ++i) {
      cdouble d = 1.0 - (2.0 * r * cos_theta[i]) * e1 + r2 * e2;
      cdouble rot = std::conj(d) / d;
      acc *= (polarity[i] > 0) ? rot : std::conj(rot);
    }
    spec_half[k] = acc / std::abs(acc);
  }
  spec_half[0] = cdouble(1.0, 0.0);
  spec_half[half] = cdouble(spec_half[half].real() >= 0 ? 1.0 : -1.0, 0.0);

  std::vector<double> x = irfft(spec_half, period);

  std::size_t shift = centroid_shift(x);
  if (shift != 0) {
    std::vector<double> rotated(period);
    for (std::size_t i = 0; i < period; ++i)
      rotated[i] = x[(i + shift) % period];
    x.swap(rotated);
  }

  double total = 0.0;
  for (double v : x) total += v * v;
  const std::size_t np = period / 4;
  double central = 0.0;
  for (std::size_t i = 0; i < np / 2; ++i) central += x[i] * x[i];
  for (std::size_t i = period - np / 2; i < period; ++i) central += x[i] * x[i];
  const double ratio = central / total;
  if (ratio < min_energy_ratio)
    throw GenerationError(
        "unit-CAPRICEP envelope not compact: energy ratio " +
            std::to_string(ratio) + " below " +
            std::to_string(min_energy_ratio) + " (seed " +
            std::to_string(seed) + ")",
        ratio);

  UnitCapricep unit;
  unit.samples = std::move(x);
  unit.spectrum = rfft(unit.samples);
  unit.seed = seed;
  unit.section_count = section_count;
  unit.pole_radius = pole_radius;
  unit.sample_rate = sample_rate;
  unit.energy = total;
  return unit;
}

CapricepSet build_capricep_set(const std::array<std::uint64_t, 3>& seeds,
                               std::size_t allocation_interval,
                               const CapricepParams& params) {
  if (seeds[0] == seeds[1] || seeds[0] == seeds[2] || seeds[1] == seeds[2])
    throw ParameterError("the three unit seeds must be distinct");

  CapricepSet set;
  set.allocation_interval = allocation_interval;
  set.unit_period = 4 * allocation_interval;
  // The three units are independent; generate them concurrently.
  std::array<std::exception_ptr, 3> errors{};
  std::array<std::thread, 3> workers;
  for (int k = 0; k < 3; ++k) {
    workers[k] = std::thread([&, k]() {
      try {
        set.units[k] = generate_unit_capricep(
            seeds[k], params.section_count, params.pole_radius,
            set.unit_period, params.sample_rate, params.min_energy_ratio);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::size_t n = set.unit_period;
  const std::size_t np = allocation_interval;
  set.x_mix.assign(n, 0.0);
  for (int k = 0; k < 3; ++k) {
    auto& b = set.base[k];
    b.assign(n, 0.0);
    const auto& u = set.units[k].samples;
    for (int m = 0; m < 4; ++m) {
      const double sign = CapricepSet::kPolarity[m][k];
      const std::size_t offset = m * np;
      for (std::size_t i = 0; i < n; ++i)
        b[(i + offset) % n] += sign * u[i];
    }
    for (std::size_t i = 0; i < n; ++i) set.x_mix[i] += b[i];
  }
  return set;
}

std::vector<double> recover_pulses(const std::vector<double>& y, int unit_index,
                                   const CapricepSet& set) {
  check_unit_index(unit_index);
  const std::size_t n = set.unit_period;
  if (y.empty() || y.size() % n != 0)
    throw ParameterError("input length must be a multiple of the unit period");

  const auto& unit_spec = set.units[unit_index].spectrum;
  std::vector<double> out(y.size());
  std::vector<double> segment(n);
  for (std::size_t p = 0; p < y.size() / n; ++p) {
    std::copy(y.begin() + p * n, y.begin() + (p + 1) * n, segment.begin());
    auto spec = rfft(segment);
    for (std::size_t k = 0; k < spec.size(); ++k)
      spec[k] *= std::conj(unit_spec[k]);
    auto w = irfft(spec, n);
    std::copy(w.begin(), w.end(), out.begin() + p * n);
  }
  return out;
}

std::vector<double> orthogonalize(const std::vector<double>& w, int unit_index,
                                  const CapricepSet& set) {
  check_unit_index(unit_index);
  const std::size_t n = set.unit_period;
  if (w.empty() || w.size() % n != 0)
    throw ParameterError("input length must be a multiple of the unit period");

  const std::size_t np = set.allocation_interval;
  const double scale = 1.0 / (4.0 * set.units[unit_index].energy);
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t p = 0; p < w.size() / n; ++p) {
    const double* wp = w.data() + p * n;
    double* zp = out.data() + p * n;
    for (int m = 0; m < 4; ++m) {
      const double c = CapricepSet::kPolarity[m][unit_index] * scale;
      const std::size_t offset = m * np;
      for (std::size_t i = 0; i < n; ++i) zp[i] += c * wp[(i + offset) % n];
    }
  }
  return out;
}

std::vector<double> extend(const std::vector<double>& z1,
                           const std::vector<double>& z2,
                           const std::vector<double>& z3) {
  if (z1.size() != z2.size() || z1.size() != z3.size())
    throw ParameterError("extend: sequences must have equal length");
  std::vector<double> out(z1.size());
  for (std::size_t i = 0; i < z1.size(); ++i)
    out[i] = 0.25 * z1[i] + 0.25 * z2[i] + 0.5 * z3[i];
  return out;
}

}  // namespace pitchbench
