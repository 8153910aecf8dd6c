#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace pitchtrack {

constexpr bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }
std::size_t next_pow2(std::size_t n);

// In-place radix-2 transform; size must be a power of two.
// The inverse transform scales by 1/n.
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

// Forward transform of a real signal, zero-padded (or truncated) to n points.
std::vector<std::complex<double>> rfft(const float* x, std::size_t len, std::size_t n);
std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n);

}  // namespace pitchtrack
