#include "pitchtrack/yin.hpp"

#include <algorithm>
#include <cmath>

#include "pitchtrack/errors.hpp"

namespace pitchtrack {

std::vector<double> difference_function(const float* frame, int frame_len, int tau_max) {
  require(tau_max < frame_len, "difference_function: frame too short for tau_max");
  const int window = frame_len - tau_max;
  std::vector<double> d(std::size_t(tau_max) + 1, 0.0);
  for (int tau = 0; tau <= tau_max; ++tau) {
    double acc = 0.0;
    const float* a = frame;
    const float* b = frame + tau;
    for (int j = 0; j < window; ++j) {
      const double diff = double(a[j]) - double(b[j]);
      acc += diff * diff;
    }
    d[std::size_t(tau)] = acc;
  }
  return d;
}

std::vector<double> cmndf(const std::vector<double>& d) {
  std::vector<double> out(d.size(), 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau < d.size(); ++tau) {
    running += d[tau];
    out[tau] = running > 0.0 ? d[tau] * double(tau) / running : 1.0;
  }
  return out;
}

YinResult yin_pitch(const float* frame, const YinParams& params) {
  require(params.f_min < params.f_max && params.f_max < params.sample_rate / 2.0,
          "yin_pitch: need f_min < f_max < Nyquist");
  require(params.threshold > 0.0 && params.threshold < 1.0,
          "yin_pitch: threshold must be in (0, 1)");
  const int tau_max = int(std::floor(params.sample_rate / params.f_min));
  const int tau_min = std::max(2, int(std::floor(params.sample_rate / params.f_max)));
  require(tau_min < tau_max, "yin_pitch: empty lag range for given f_min/f_max");

  const std::vector<double> d = difference_function(frame, params.frame_len, tau_max);
  const std::vector<double> dp = cmndf(d);

  int best = tau_min;
  double best_v = dp[std::size_t(tau_min)];
  for (int tau = tau_min + 1; tau <= tau_max; ++tau) {
    if (dp[std::size_t(tau)] < best_v) {
      best_v = dp[std::size_t(tau)];
      best = tau;
    }
  }

  YinResult res;
  res.aperiodicity = best_v;

  int cand = -1;
  for (int tau = tau_min; tau <= tau_max; ++tau) {
    if (dp[std::size_t(tau)] < params.threshold) {
      cand = tau;
      while (cand + 1 <= tau_max && dp[std::size_t(cand) + 1] < dp[std::size_t(cand)]) {
        ++cand;
      }
      break;
    }
  }
  res.voiced = cand >= 0;
  if (cand < 0) cand = best;

  double lag = double(cand);
  if (cand - 1 >= 1 && cand + 1 <= tau_max) {
    const double dm = dp[std::size_t(cand) - 1];
    const double d0 = dp[std::size_t(cand)];
    const double dpl = dp[std::size_t(cand) + 1];
    const double denom = dm - 2.0 * d0 + dpl;
    if (std::abs(denom) > 1e-12) {
      const double delta = std::clamp(0.5 * (dm - dpl) / denom, -0.5, 0.5);
      lag += delta;
    }
  }

  const double lo = params.f_min * std::exp2(-50.0 / 1200.0);
  const double hi = params.f_max * std::exp2(50.0 / 1200.0);
  res.freq_hz = std::clamp(params.sample_rate / lag, lo, hi);
  return res;
}

PitchTrack yin_track(const Audio& audio, int hop, const YinParams& params) {
  const Audio* buf = &audio;
  Audio resampled;
  if (audio.sample_rate != params.sample_rate) {
    resampled = resample(audio, params.sample_rate);
    buf = &resampled;
  }
  FrameSequence frames = frame_signal(*buf, params.frame_len, hop);
  PitchTrack out;
  out.time.resize(frames.count);
  out.freq.resize(frames.count);
  out.conf.resize(frames.count);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < std::int64_t(frames.count); ++k) {
    float* frame = frames.frame(std::size_t(k));
    normalize_frame(frame, frames.frame_len);
    const YinResult r = yin_pitch(frame, params);
    out.time[std::size_t(k)] = frames.timestamp(std::size_t(k));
    out.freq[std::size_t(k)] = r.voiced ? r.freq_hz : 0.0;
    out.conf[std::size_t(k)] = std::clamp(1.0 - r.aperiodicity, 0.0, 1.0);
  }
  return out;
}

}  // namespace pitchtrack
