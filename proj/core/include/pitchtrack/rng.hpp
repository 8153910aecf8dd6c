#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pitchtrack {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t& state);

// Seed for a named subsystem stream, so one root seed drives many
// independent deterministic generators.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

// Deterministic generator with platform-independent output: mt19937_64 is
// fully specified by the standard, and the derived uniforms/normals below
// use only its raw bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal (Box-Muller).
  double normal();

  // Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

}  // namespace pitchtrack
