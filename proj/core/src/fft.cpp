#include "pitchtrack/fft.hpp"

#include <algorithm>
#include <cmath>

#include "pitchtrack/errors.hpp"
#include "pitchtrack/rng.hpp"

namespace pitchtrack {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  require(is_pow2(n), "fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / double(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / double(n);
    for (auto& x : a) x *= inv;
  }
}

std::vector<std::complex<double>> rfft(const float* x, std::size_t len, std::size_t n) {
  std::vector<std::complex<double>> a(n);
  const std::size_t m = std::min(len, n);
  for (std::size_t i = 0; i < m; ++i) a[i] = double(x[i]);
  fft(a, false);
  return a;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n) {
  std::vector<std::complex<double>> a(n);
  const std::size_t m = std::min(x.size(), n);
  for (std::size_t i = 0; i < m; ++i) a[i] = x[i];
  fft(a, false);
  return a;
}

}  // namespace pitchtrack
