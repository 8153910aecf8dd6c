#pragma once

#include <array>
#include <optional>

namespace pitchtrack {

inline constexpr int kNumBins = 360;
inline constexpr double kCentsPerBin = 20.0;
inline constexpr double kFreqRefHz = 10.0;       // 0-cent reference
inline constexpr double kGridLowHz = 32.70;      // pitch of the first bin center
inline constexpr double kTargetSigmaCents = 25.0;

double freq_to_cents(double hz);
double cents_to_freq(double cents);

// Bin centers c_i = freq_to_cents(32.70) + 20*(i-1), i = 1..360.  The anchor
// is quantized to 2^-20 cents so every center and the 20-cent spacing are
// exact doubles.
const std::array<double, kNumBins>& bin_centers_cents();

// Gaussian target, peak 1 when the true pitch sits on a bin center:
// y_i = exp(-(c_i - c_true)^2 / (2 * 25^2)).  Not renormalized.
void encode_target(double c_true_cents, float* out);

// Weighted average over all 360 bins; nullopt when the activation sums to
// zero (no estimate).
std::optional<double> decode_activation(const float* act);

double confidence(const float* act);  // max activation

}  // namespace pitchtrack
