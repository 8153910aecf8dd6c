#include "pitchtrack/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pitchtrack/errors.hpp"
#include "pitchtrack/rng.hpp"

namespace pitchtrack {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
  s.push_back(char((v >> 16) & 0xff));
  s.push_back(char((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
}

float f32_from_le(const unsigned char* p) {
  const std::uint32_t u = read_u32(p);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

Audio read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("read_wav: cannot open " + path, ErrCode::missing_file);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail("read_wav: not a RIFF/WAVE file: " + path, ErrCode::bad_format);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_off = 0, data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      require(body + 16 <= bytes.size(), "read_wav: truncated fmt chunk in " + path,
              ErrCode::truncated);
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_size = size;
      have_data = true;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || !have_data) {
    fail("read_wav: missing fmt or data chunk in " + path, ErrCode::bad_format);
  }
  if (!((format == kFormatPcm && bits == 16) || (format == kFormatFloat && bits == 32))) {
    fail("read_wav: unsupported codec (need PCM16 or float32) in " + path,
         ErrCode::bad_format);
  }
  require(channels == 1 || channels == 2, "read_wav: need 1 or 2 channels in " + path,
          ErrCode::bad_format);
  require(rate > 0, "read_wav: bad sample rate in " + path, ErrCode::bad_format);
  if (data_off + data_size > bytes.size()) {
    fail("read_wav: truncated data chunk in " + path, ErrCode::truncated);
  }

  const std::size_t bytes_per = std::size_t(bits / 8) * channels;
  const std::size_t n = data_size / bytes_per;
  Audio out;
  out.sample_rate = int(rate);
  out.samples.resize(n);
  const unsigned char* p = bytes.data() + data_off;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      if (format == kFormatPcm) {
        const std::int16_t v = std::int16_t(read_u16(p));
        acc += double(v) / 32768.0;
        p += 2;
      } else {
        acc += double(f32_from_le(p));
        p += 4;
      }
    }
    out.samples[i] = float(acc / channels);
  }
  return out;
}

void write_wav(const std::string& path, const Audio& audio, WavFormat format) {
  require(audio.sample_rate > 0, "write_wav: sample rate must be positive");
  const bool f32 = format == WavFormat::float32;
  const std::uint32_t sample_bytes = f32 ? 4 : 2;
  const std::uint32_t data_size = std::uint32_t(audio.samples.size() * sample_bytes);
  const std::uint32_t fact_size = f32 ? 12 : 0;  // float WAV carries a fact chunk

  std::string s;
  s.reserve(44 + fact_size + data_size);
  s += "RIFF";
  put_u32(s, 4 + 24 + fact_size + 8 + data_size);
  s += "WAVE";
  s += "fmt ";
  put_u32(s, 16);
  put_u16(s, f32 ? kFormatFloat : kFormatPcm);
  put_u16(s, 1);
  put_u32(s, std::uint32_t(audio.sample_rate));
  put_u32(s, std::uint32_t(audio.sample_rate) * sample_bytes);
  put_u16(s, std::uint16_t(sample_bytes));
  put_u16(s, std::uint16_t(sample_bytes * 8));
  if (f32) {
    s += "fact";
    put_u32(s, 4);
    put_u32(s, std::uint32_t(audio.samples.size()));
  }
  s += "data";
  put_u32(s, data_size);
  for (const float v : audio.samples) {
    if (f32) {
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      put_u32(s, u);
    } else {
      const double scaled = std::round(double(v) * 32767.0);
      const auto q = std::int16_t(std::clamp(scaled, -32768.0, 32767.0));
      put_u16(s, std::uint16_t(q));
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("write_wav: cannot open " + path + " for writing", ErrCode::missing_file);
  out.write(s.data(), std::streamsize(s.size()));
  require(bool(out), "write_wav: short write to " + path, ErrCode::truncated);
}

namespace {

// Kaiser window (beta 8.6) sampled on [0, 1]; linear interpolation is far
// below the stopband ripple.
const std::array<double, 4097>& kaiser_table() {
  static const std::array<double, 4097> table = [] {
    std::array<double, 4097> t{};
    const double beta = 8.6;
    const double denom = std::cyl_bessel_i(0.0, beta);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x = double(i) / double(t.size() - 1);
      t[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - x * x))) / denom;
    }
    return t;
  }();
  return table;
}

double kaiser(double x) {
  x = std::abs(x);
  if (x >= 1.0) return 0.0;
  const auto& t = kaiser_table();
  const double pos = x * double(t.size() - 1);
  const auto i = std::size_t(pos);
  const double frac = pos - double(i);
  return t[i] + (t[std::min(i + 1, t.size() - 1)] - t[i]) * frac;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

}  // namespace

Audio resample(const Audio& in, int target_rate) {
  require(target_rate > 0, "resample: target rate must be positive");
  require(in.sample_rate > 0, "resample: source rate must be positive");
  if (in.sample_rate == target_rate) return in;

  const std::int64_t src_len = std::int64_t(in.samples.size());
  const std::int64_t out_len =
      (src_len * target_rate + in.sample_rate / 2) / in.sample_rate;

  constexpr int kHalfTaps = 32;  // 64-tap filter
  // Cutoff slightly under the tighter Nyquist, in cycles per source sample.
  const double ratio = double(target_rate) / double(in.sample_rate);
  const double fc = 0.475 * std::min(1.0, ratio);

  Audio out;
  out.sample_rate = target_rate;
  out.samples.resize(std::size_t(std::max<std::int64_t>(out_len, 0)));
  const double step = double(in.sample_rate) / double(target_rate);
  for (std::int64_t n = 0; n < out_len; ++n) {
    const double center = double(n) * step;
    const auto k0 = std::int64_t(std::floor(center)) - kHalfTaps + 1;
    double acc = 0.0, wsum = 0.0;
    for (int t = 0; t < 2 * kHalfTaps; ++t) {
      const std::int64_t k = k0 + t;
      const double d = double(k) - center;
      const double w = 2.0 * fc * sinc(2.0 * fc * d) * kaiser(d / kHalfTaps);
      wsum += w;
      if (k >= 0 && k < src_len) acc += w * double(in.samples[std::size_t(k)]);
    }
    out.samples[std::size_t(n)] = float(wsum != 0.0 ? acc / wsum : 0.0);
  }
  return out;
}

FrameSequence frame_signal(const Audio& buf, int frame_len, int hop) {
  require(buf.sample_rate == kModelSampleRate,
          "frame_signal: expected a 16 kHz buffer");
  require(!buf.samples.empty(), "frame_signal: empty buffer");
  require(frame_len > 0 && hop > 0, "frame_signal: frame_len and hop must be positive");

  FrameSequence seq;
  seq.frame_len = frame_len;
  seq.hop = hop;
  seq.sample_rate = buf.sample_rate;
  seq.count = buf.samples.size() / std::size_t(hop) + 1;
  seq.data.assign(seq.count * std::size_t(frame_len), 0.0f);
  for (std::size_t k = 0; k < seq.count; ++k) {
    extract_frame(buf.samples, k * std::size_t(hop), frame_len, seq.frame(k));
  }
  return seq;
}

void extract_frame(const std::vector<float>& samples, std::size_t center,
                   int frame_len, float* out) {
  const std::int64_t half = frame_len / 2;
  const std::int64_t len = std::int64_t(samples.size());
  const std::int64_t begin = std::int64_t(center) - half;
  for (std::int64_t i = 0; i < frame_len; ++i) {
    const std::int64_t j = begin + i;
    out[i] = (j >= 0 && j < len) ? samples[std::size_t(j)] : 0.0f;
  }
}

void normalize_frame(float* frame, int len) {
  double mean = 0.0;
  for (int i = 0; i < len; ++i) mean += frame[i];
  mean /= len;
  double var = 0.0;
  for (int i = 0; i < len; ++i) {
    const double d = frame[i] - mean;
    var += d * d;
  }
  const double std_dev = std::sqrt(var / len);
  if (std_dev < 1e-8) {
    std::fill(frame, frame + len, 0.0f);
    return;
  }
  const double inv = 1.0 / std_dev;
  for (int i = 0; i < len; ++i) frame[i] = float((frame[i] - mean) * inv);
}

void normalize_peak(std::vector<float>& x, float peak) {
  float maxabs = 0.0f;
  for (const float v : x) maxabs = std::max(maxabs, std::abs(v));
  if (maxabs <= 0.0f) return;
  const float scale = peak / maxabs;
  for (float& v : x) v *= scale;
}

}  // namespace pitchtrack
