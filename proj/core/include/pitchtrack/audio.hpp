#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pitchtrack {

inline constexpr int kModelSampleRate = 16000;
inline constexpr int kFrameLength = 1024;
inline constexpr int kDefaultHop = 160;  // 10 ms at 16 kHz

struct Audio {
  int sample_rate = 0;
  std::vector<float> samples;  // mono, nominal range [-1, 1]

  double duration_sec() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavFormat { pcm16, float32 };

// RIFF/WAVE reader: PCM16 or float32, 1-2 channels (stereo is averaged),
// PCM16 scaled by 1/32768.
Audio read_wav(const std::string& path);
void write_wav(const std::string& path, const Audio& audio,
               WavFormat format = WavFormat::float32);

// Band-limited polyphase resampler (Kaiser-windowed sinc, 64 taps per output
// sample).  Output length = round(len * target / source).
Audio resample(const Audio& in, int target_rate);

// Centered frames: the signal is zero-padded by frame_len/2 on both ends and
// frame k covers samples [k*hop - frame_len/2, k*hop + frame_len/2).
// Frame count = floor(len / hop) + 1.
struct FrameSequence {
  int frame_len = kFrameLength;
  int hop = kDefaultHop;
  int sample_rate = kModelSampleRate;
  std::size_t count = 0;
  std::vector<float> data;  // count x frame_len, row-major

  float* frame(std::size_t k) { return data.data() + k * frame_len; }
  const float* frame(std::size_t k) const { return data.data() + k * frame_len; }
  double timestamp(std::size_t k) const { return double(k) * hop / sample_rate; }
};

FrameSequence frame_signal(const Audio& buf, int frame_len = kFrameLength,
                           int hop = kDefaultHop);

// Copies one centered frame without materializing the whole sequence.
void extract_frame(const std::vector<float>& samples, std::size_t center,
                   int frame_len, float* out);

// In place: zero mean, unit standard deviation; frames with std below 1e-8
// become all zero.
void normalize_frame(float* frame, int len);

// Peak-normalizes to |x| <= peak; silence is left untouched.
void normalize_peak(std::vector<float>& x, float peak);

}  // namespace pitchtrack
