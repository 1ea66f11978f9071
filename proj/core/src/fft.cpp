#include "pitchbench/fft.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "pitchbench/errors.hpp"

namespace pitchbench {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct FftPlan {
  std::vector<std::uint32_t> bitrev;
  std::vector<cdouble> twiddle;  // exp(-2*pi*i*j/n), j in [0, n/2)
};

// Plans are immutable once built; the registry hands out shared pointers so
// concurrent transforms of the same size never contend after first use.
std::shared_ptr<const FftPlan> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;

  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  auto plan = std::make_shared<FftPlan>();
  plan->bitrev.resize(n);
  int log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (int b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) r |= std::uint32_t{1} << (log2n - 1 - b);
    plan->bitrev[i] = r;
  }
  plan->twiddle.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    double ang = -kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    plan->twiddle[j] = cdouble(std::cos(ang), std::sin(ang));
  }
  cache.emplace(n, plan);
  return plan;
}

}  // namespace

void fft(std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0) return;
  if (!is_power_of_two(n))
    throw ParameterError("fft size must be a power of two, got " +
                         std::to_string(n));
  if (n == 1) return;

  auto plan = plan_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t j = plan->bitrev[i];
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        cdouble w = plan->twiddle[j * stride];
        if (inverse) w = std::conj(w);
        cdouble& lo = a[start + j];
        cdouble& hi = a[start + j + half];
        cdouble t = hi * w;
        hi = lo - t;
        lo += t;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= scale;
  }
}

std::vector<cdouble> rfft(const std::vector<double>& x) {
  std::vector<cdouble> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = cdouble(x[i], 0.0);
  fft(a, false);
  a.resize(x.size() / 2 + 1);
  return a;
}

std::vector<double> irfft(const std::vector<cdouble>& half, std::size_t n) {
  if (half.size() != n / 2 + 1)
    throw ParameterError("irfft: spectrum size does not match signal length");
  std::vector<cdouble> a(n);
  for (std::size_t k = 0; k <= n / 2; ++k) a[k] = half[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) a[k] = std::conj(half[n - k]);
  fft(a, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real();
  return out;
}

std::vector<double> convolve_same(const std::vector<double>& x,
                                  const std::vector<double>& kernel,
                                  std::size_t radius) {
  if (kernel.size() != 2 * radius + 1)
    throw ParameterError("convolve_same: kernel length must be 2*radius+1");
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < n + kernel.size()) m <<= 1;

  std::vector<cdouble> xa(m), ka(m);
  for (std::size_t i = 0; i < n; ++i) xa[i] = x[i];
  // Kernel tap for offset d lives at index (d mod m) so the product aligns
  // the output with the input positions.
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    std::ptrdiff_t d = static_cast<std::ptrdiff_t>(i) -
                       static_cast<std::ptrdiff_t>(radius);
    std::size_t idx = (d >= 0) ? static_cast<std::size_t>(d)
                               : m - static_cast<std::size_t>(-d);
    ka[idx] += kernel[i];
  }
  fft(xa, false);
  fft(ka, false);
  for (std::size_t i = 0; i < m; ++i) xa[i] *= ka[i];
  fft(xa, true);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = xa[i].real();
  return out;
}

}  // namespace pitchbench
