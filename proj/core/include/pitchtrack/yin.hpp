#pragma once

#include <vector>

#include "pitchtrack/audio.hpp"
#include "pitchtrack/pitch_track.hpp"

namespace pitchtrack {

struct YinParams {
  double f_min = 32.70;
  double f_max = 1975.5;
  double threshold = 0.1;
  int frame_len = kFrameLength;
  int sample_rate = kModelSampleRate;
};

struct YinResult {
  double freq_hz = 0.0;   // best estimate, even when unvoiced
  bool voiced = false;
  double aperiodicity = 1.0;  // min of the normalized difference curve
};

// d(tau) = sum_j (x_j - x_{j+tau})^2 over a fixed window of
// frame_len - tau_max samples, tau = 0..tau_max.
std::vector<double> difference_function(const float* frame, int frame_len, int tau_max);

// Cumulative mean normalization: d'(0) = 1, d'(tau) = d(tau)*tau / sum_{1..tau} d.
// A difference curve that is zero everywhere yields d' = 1 (no periodicity).
std::vector<double> cmndf(const std::vector<double>& d);

// First dip of d' below the threshold, walked to its local minimum and
// refined by parabolic interpolation; unvoiced when no dip crosses the
// threshold (the global minimum lag is still reported as freq_hz).
YinResult yin_pitch(const float* frame, const YinParams& params = {});

// Frame, normalize and estimate per frame; unvoiced frames get frequency 0
// and confidence is 1 - aperiodicity clamped to [0, 1].
PitchTrack yin_track(const Audio& audio, int hop = kDefaultHop,
                     const YinParams& params = {});

}  // namespace pitchtrack
