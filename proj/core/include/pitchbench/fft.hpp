#ifndef PITCHBENCH_FFT_HPP
#define PITCHBENCH_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace pitchbench {

using cdouble = std::complex<double>;

constexpr bool is_power_of_two(std::size_t n) {
  return n != 0 && (n & (n - 1)) == 0;
}

/// In-place iterative radix-2 FFT. Size must be a power of two.
/// Forward transform is unscaled; the inverse applies the 1/N factor.
void fft(std::vector<cdouble>& a, bool inverse);

/// Real-input FFT. Returns bins 0..n/2 (the rest is the conjugate mirror).
std::vector<cdouble> rfft(const std::vector<double>& x);

/// Inverse of rfft for a real signal of length n (power of two).
std::vector<double> irfft(const std::vector<cdouble>& half, std::size_t n);

/// Linear convolution of x with a symmetric kernel given as taps
/// [-radius..radius], evaluated at the positions of x ("same" length).
/// Uses a zero-padded power-of-two FFT internally.
std::vector<double> convolve_same(const std::vector<double>& x,
                                  const std::vector<double>& kernel,
                                  std::size_t radius);

}  // namespace pitchbench

#endif  // PITCHBENCH_FFT_HPP
