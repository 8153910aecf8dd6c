#include "pitchtrack/cents.hpp"

#include <cmath>

#include "pitchtrack/errors.hpp"

namespace pitchtrack {

double freq_to_cents(double hz) {
  require(hz > 0.0, "freq_to_cents: frequency must be positive");
  return 1200.0 * std::log2(hz / kFreqRefHz);
}

double cents_to_freq(double cents) { return kFreqRefHz * std::exp2(cents / 1200.0); }

const std::array<double, kNumBins>& bin_centers_cents() {
  static const std::array<double, kNumBins> grid = [] {
    std::array<double, kNumBins> g{};
    const double c1 = std::round(freq_to_cents(kGridLowHz) * 1048576.0) / 1048576.0;
    for (int i = 0; i < kNumBins; ++i) g[i] = c1 + kCentsPerBin * i;
    return g;
  }();
  return grid;
}

void encode_target(double c_true_cents, float* out) {
  const auto& g = bin_centers_cents();
  const double denom = 2.0 * kTargetSigmaCents * kTargetSigmaCents;
  for (int i = 0; i < kNumBins; ++i) {
    const double d = g[i] - c_true_cents;
    out[i] = float(std::exp(-d * d / denom));
  }
}

std::optional<double> decode_activation(const float* act) {
  const auto& g = bin_centers_cents();
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < kNumBins; ++i) {
    num += double(act[i]) * g[i];
    den += double(act[i]);
  }
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

double confidence(const float* act) {
  double best = 0.0;
  for (int i = 0; i < kNumBins; ++i) {
    if (double(act[i]) > best) best = double(act[i]);
  }
  return best;
}

}  // namespace pitchtrack
