#include "pitchtrack/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "pitchtrack/cents.hpp"
#include "pitchtrack/errors.hpp"
#include "pitchtrack/fft.hpp"
#include "pitchtrack/rng.hpp"

namespace fs = std::filesystem;

namespace pitchtrack {

TrajectoryKind trajectory_kind_from_name(const std::string& name) {
  if (name == "constant") return TrajectoryKind::constant;
  if (name == "glissando") return TrajectoryKind::glissando;
  if (name == "vibrato") return TrajectoryKind::vibrato;
  if (name == "random-walk") return TrajectoryKind::random_walk;
  fail("unknown trajectory kind: " + name, ErrCode::bad_argument);
}

std::string trajectory_kind_name(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::constant: return "constant";
    case TrajectoryKind::glissando: return "glissando";
    case TrajectoryKind::vibrato: return "vibrato";
    case TrajectoryKind::random_walk: return "random-walk";
  }
  fail("unknown trajectory kind value", ErrCode::bad_argument);
}

namespace {

double reflect_into(double c, double lo, double hi) {
  while (c < lo || c > hi) {
    if (c < lo) c = 2.0 * lo - c;
    if (c > hi) c = 2.0 * hi - c;
  }
  return c;
}

}  // namespace

PitchTrack gen_f0_trajectory(const TrajectoryParams& params, double duration_sec,
                             double step_sec) {
  require(duration_sec > 0.0, "gen_f0_trajectory: duration must be positive");
  require(step_sec > 0.0, "gen_f0_trajectory: step must be positive");
  require(params.min_hz > 0.0 && params.min_hz < params.max_hz,
          "gen_f0_trajectory: bad frequency range");

  const double lo = freq_to_cents(params.min_hz);
  const double hi = freq_to_cents(params.max_hz);
  const double c_start = freq_to_cents(params.start_hz);
  auto check_range = [&](double c, const char* what) {
    require(c >= lo - 1e-9 && c <= hi + 1e-9,
            std::string("gen_f0_trajectory: ") + what + " outside the frequency range",
            ErrCode::bad_argument);
  };

  const std::size_t n = std::size_t(std::floor(duration_sec / step_sec + 1e-9)) + 1;
  PitchTrack track;
  track.time.resize(n);
  track.freq.resize(n);

  switch (params.kind) {
    case TrajectoryKind::constant: {
      check_range(c_start, "level");
      for (std::size_t i = 0; i < n; ++i) {
        track.time[i] = double(i) * step_sec;
        track.freq[i] = cents_to_freq(c_start);
      }
      break;
    }
    case TrajectoryKind::glissando: {
      const double c_end = freq_to_cents(params.end_hz);
      check_range(c_start, "start");
      check_range(c_end, "end");
      for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) * step_sec;
        const double u = std::min(t / duration_sec, 1.0);
        track.time[i] = t;
        track.freq[i] = cents_to_freq(c_start + u * (c_end - c_start));
      }
      break;
    }
    case TrajectoryKind::vibrato: {
      require(params.vibrato_rate_hz > 0.0, "gen_f0_trajectory: vibrato rate must be positive");
      require(params.vibrato_depth_cents >= 0.0, "gen_f0_trajectory: negative vibrato depth");
      check_range(c_start - params.vibrato_depth_cents, "vibrato low extent");
      check_range(c_start + params.vibrato_depth_cents, "vibrato high extent");
      for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) * step_sec;
        track.time[i] = t;
        track.freq[i] = cents_to_freq(
            c_start + params.vibrato_depth_cents *
                          std::sin(2.0 * kPi * params.vibrato_rate_hz * t));
      }
      break;
    }
    case TrajectoryKind::random_walk: {
      check_range(c_start, "start");
      require(params.walk_step_cents >= 0.0, "gen_f0_trajectory: negative walk step");
      Rng rng(params.seed);
      double c = c_start;
      for (std::size_t i = 0; i < n; ++i) {
        track.time[i] = double(i) * step_sec;
        track.freq[i] = cents_to_freq(c);
        c = reflect_into(c + params.walk_step_cents * rng.normal(), lo, hi);
      }
      break;
    }
  }
  return track;
}

Audio synth_harmonic(const PitchTrack& f0, const TimbreSpec& timbre, int sample_rate) {
  require(sample_rate > 0, "synth_harmonic: sample rate must be positive");
  require(f0.size() >= 2, "synth_harmonic: need at least two trajectory points");
  require(!timbre.partial_amps.empty() && timbre.partial_amps[0] > 0.0,
          "synth_harmonic: first partial amplitude must be positive");
  for (const double a : timbre.partial_amps) {
    require(a >= 0.0, "synth_harmonic: negative partial amplitude");
  }
  for (const double f : f0.freq) {
    require(f > 0.0, "synth_harmonic: trajectory must be fully voiced");
  }

  const std::size_t points = f0.size();
  std::vector<double> cents(points);
  for (std::size_t i = 0; i < points; ++i) cents[i] = freq_to_cents(f0.freq[i]);

  const auto n_samples = std::int64_t(std::llround(f0.time.back() * sample_rate));
  require(n_samples > 0, "synth_harmonic: trajectory too short");

  const int partials = int(timbre.partial_amps.size());
  std::vector<double> phase(std::size_t(partials), 0.0);
  const double nyquist = sample_rate / 2.0;
  const double phase_step = 2.0 * kPi / sample_rate;

  Audio out;
  out.sample_rate = sample_rate;
  out.samples.resize(std::size_t(n_samples));
  std::size_t seg = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double t = double(i) / sample_rate;
    while (seg + 2 < points && f0.time[seg + 1] <= t) ++seg;
    const double t0 = f0.time[seg];
    const double t1 = f0.time[seg + 1];
    const double u = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    const double f = cents_to_freq(cents[seg] + u * (cents[seg + 1] - cents[seg]));

    double s = 0.0;
    for (int p = 0; p < partials; ++p) {
      const double fp = f * (p + 1);
      if (fp < nyquist) s += timbre.partial_amps[std::size_t(p)] * std::sin(phase[std::size_t(p)]);
      phase[std::size_t(p)] += phase_step * fp;
      while (phase[std::size_t(p)] >= 2.0 * kPi) phase[std::size_t(p)] -= 2.0 * kPi;
    }
    out.samples[std::size_t(i)] = float(s);
  }
  normalize_peak(out.samples, 0.9f);
  return out;
}

NoiseSpec parse_noise_spec(const std::string& text) {
  NoiseSpec spec;
  if (text == "white") {
    spec.kind = NoiseKind::white;
  } else if (text == "pink") {
    spec.kind = NoiseKind::pink;
  } else if (text == "brown") {
    spec.kind = NoiseKind::brown;
  } else if (text.rfind("file:", 0) == 0 && text.size() > 5) {
    spec.kind = NoiseKind::file;
    spec.file_path = text.substr(5);
  } else {
    fail("unknown noise kind: " + text + " (want white|pink|brown|file:PATH)",
         ErrCode::bad_argument);
  }
  return spec;
}

std::string noise_spec_name(const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::white: return "white";
    case NoiseKind::pink: return "pink";
    case NoiseKind::brown: return "brown";
    case NoiseKind::file: return "file:" + spec.file_path;
  }
  fail("unknown noise kind value", ErrCode::bad_argument);
}

namespace {

void scale_to_unit_rms(std::vector<float>& x) {
  double power = 0.0;
  for (const float v : x) power += double(v) * double(v);
  power /= double(x.size());
  require(power > 0.0, "gen_noise: zero-power noise");
  const double scale = 1.0 / std::sqrt(power);
  for (float& v : x) v = float(v * scale);
}

}  // namespace

Audio gen_noise(const NoiseSpec& spec, std::size_t length, int sample_rate,
                std::uint64_t seed) {
  require(length > 0, "gen_noise: length must be positive");
  require(sample_rate > 0, "gen_noise: sample rate must be positive");

  Audio out;
  out.sample_rate = sample_rate;
  out.samples.resize(length);

  if (spec.kind == NoiseKind::file) {
    Audio file_noise = read_wav(spec.file_path);
    require(!file_noise.samples.empty(), "gen_noise: empty noise file " + spec.file_path);
    if (file_noise.sample_rate != sample_rate) {
      file_noise = resample(file_noise, sample_rate);
    }
    for (std::size_t i = 0; i < length; ++i) {
      out.samples[i] = file_noise.samples[i % file_noise.samples.size()];
    }
  } else if (spec.kind == NoiseKind::white) {
    Rng rng(seed);
    for (std::size_t i = 0; i < length; ++i) out.samples[i] = float(rng.normal());
  } else {
    const std::size_t n2 = next_pow2(length);
    Rng rng(seed);
    std::vector<std::complex<double>> buf(n2);
    for (std::size_t i = 0; i < n2; ++i) buf[i] = rng.normal();
    fft(buf, false);
    buf[0] = 0.0;
    for (std::size_t k = 1; k <= n2 / 2; ++k) {
      const double gain = spec.kind == NoiseKind::pink ? 1.0 / std::sqrt(double(k))
                                                       : 1.0 / double(k);
      if (k == n2 - k) {
        buf[k] = buf[k].real() * gain;
      } else {
        buf[k] *= gain;
        buf[n2 - k] = std::conj(buf[k]);
      }
    }
    fft(buf, true);
    for (std::size_t i = 0; i < length; ++i) out.samples[i] = float(buf[i].real());
  }

  scale_to_unit_rms(out.samples);
  return out;
}

Audio mix_at_snr(const Audio& signal, const Audio& noise, double snr_db) {
  require(!signal.samples.empty(), "mix_at_snr: empty signal");
  if (std::isinf(snr_db) && snr_db > 0.0) return signal;
  require(std::isfinite(snr_db), "mix_at_snr: SNR must be finite or +inf");
  require(signal.sample_rate == noise.sample_rate, "mix_at_snr: sample rates differ");
  require(noise.samples.size() >= signal.samples.size(),
          "mix_at_snr: noise shorter than signal");

  const std::size_t n = signal.samples.size();
  double p_signal = 0.0, p_noise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p_signal += double(signal.samples[i]) * double(signal.samples[i]);
    p_noise += double(noise.samples[i]) * double(noise.samples[i]);
  }
  require(p_signal > 0.0, "mix_at_snr: zero-power signal");
  require(p_noise > 0.0, "mix_at_snr: zero-power noise");

  const float scale = float(std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0))));
  Audio out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(n);
  float peak = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = signal.samples[i] + scale * noise.samples[i];
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  if (peak > 1.0f) {
    const float renorm = 1.0f / peak;
    for (float& v : out.samples) v *= renorm;
  }
  return out;
}

CorpusProfile default_corpus_profile() { return CorpusProfile{}; }

namespace {

void validate_profile(const CorpusProfile& p) {
  require(p.num_tracks >= 1, "corpus profile: num_tracks must be >= 1");
  require(p.tracks_per_group >= 1, "corpus profile: tracks_per_group must be >= 1");
  require(p.duration_sec > 0.0, "corpus profile: duration must be positive");
  require(p.annotation_step_sec > 0.0, "corpus profile: annotation step must be positive");
  require(p.sample_rate > 0, "corpus profile: sample rate must be positive");
  require(p.f0_min_hz > 0.0 && p.f0_min_hz < p.f0_max_hz, "corpus profile: bad f0 range");
  require(p.f0_max_hz < p.sample_rate / 2.0, "corpus profile: f0 range above Nyquist");
  require(p.partials_min >= 1 && p.partials_min <= p.partials_max,
          "corpus profile: bad partial count range");
  require(p.rolloff_min >= 0.0 && p.rolloff_min <= p.rolloff_max,
          "corpus profile: bad rolloff range");
  require(p.vibrato_rate_min_hz > 0.0 && p.vibrato_rate_min_hz <= p.vibrato_rate_max_hz,
          "corpus profile: bad vibrato rate range");
  require(p.vibrato_depth_min_cents >= 0.0 &&
              p.vibrato_depth_min_cents <= p.vibrato_depth_max_cents,
          "corpus profile: bad vibrato depth range");
  require(p.glissando_span_cents >= 0.0, "corpus profile: negative glissando span");
  require(p.walk_step_cents >= 0.0, "corpus profile: negative walk step");
  const double span = freq_to_cents(p.f0_max_hz) - freq_to_cents(p.f0_min_hz);
  require(p.glissando_span_cents <= span,
          "corpus profile: glissando span exceeds the f0 range");
  require(2.0 * p.vibrato_depth_max_cents <= span,
          "corpus profile: vibrato depth exceeds the f0 range");
}

}  // namespace

CorpusProfile corpus_profile_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("corpus profile: bad JSON: ") + e.what(), ErrCode::bad_format);
  }
  CorpusProfile d;
  CorpusProfile p;
  p.name = j.value("name", d.name);
  p.num_tracks = j.value("num_tracks", d.num_tracks);
  p.tracks_per_group = j.value("tracks_per_group", d.tracks_per_group);
  p.duration_sec = j.value("duration_sec", d.duration_sec);
  p.annotation_step_sec = j.value("annotation_step_sec", d.annotation_step_sec);
  p.sample_rate = j.value("sample_rate", d.sample_rate);
  p.f0_min_hz = j.value("f0_min_hz", d.f0_min_hz);
  p.f0_max_hz = j.value("f0_max_hz", d.f0_max_hz);
  p.partials_min = j.value("partials_min", d.partials_min);
  p.partials_max = j.value("partials_max", d.partials_max);
  p.rolloff_min = j.value("rolloff_min", d.rolloff_min);
  p.rolloff_max = j.value("rolloff_max", d.rolloff_max);
  p.vibrato_rate_min_hz = j.value("vibrato_rate_min_hz", d.vibrato_rate_min_hz);
  p.vibrato_rate_max_hz = j.value("vibrato_rate_max_hz", d.vibrato_rate_max_hz);
  p.vibrato_depth_min_cents = j.value("vibrato_depth_min_cents", d.vibrato_depth_min_cents);
  p.vibrato_depth_max_cents = j.value("vibrato_depth_max_cents", d.vibrato_depth_max_cents);
  p.glissando_span_cents = j.value("glissando_span_cents", d.glissando_span_cents);
  p.walk_step_cents = j.value("walk_step_cents", d.walk_step_cents);
  p.seed = j.value("seed", d.seed);
  validate_profile(p);
  return p;
}

std::string corpus_profile_to_json(const CorpusProfile& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["num_tracks"] = p.num_tracks;
  j["tracks_per_group"] = p.tracks_per_group;
  j["duration_sec"] = p.duration_sec;
  j["annotation_step_sec"] = p.annotation_step_sec;
  j["sample_rate"] = p.sample_rate;
  j["f0_min_hz"] = p.f0_min_hz;
  j["f0_max_hz"] = p.f0_max_hz;
  j["partials_min"] = p.partials_min;
  j["partials_max"] = p.partials_max;
  j["rolloff_min"] = p.rolloff_min;
  j["rolloff_max"] = p.rolloff_max;
  j["vibrato_rate_min_hz"] = p.vibrato_rate_min_hz;
  j["vibrato_rate_max_hz"] = p.vibrato_rate_max_hz;
  j["vibrato_depth_min_cents"] = p.vibrato_depth_min_cents;
  j["vibrato_depth_max_cents"] = p.vibrato_depth_max_cents;
  j["glissando_span_cents"] = p.glissando_span_cents;
  j["walk_step_cents"] = p.walk_step_cents;
  j["seed"] = p.seed;
  return j.dump(2) + "\n";
}

CorpusProfile resolve_corpus_profile(const std::string& name_or_path) {
  if (name_or_path.empty() || name_or_path == "default") return default_corpus_profile();
  std::ifstream in(name_or_path);
  if (!in) fail("corpus profile: cannot open " + name_or_path, ErrCode::missing_file);
  std::stringstream ss;
  ss << in.rdbuf();
  return corpus_profile_from_json(ss.str());
}

namespace {

std::string padded_index(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03d", prefix, i);
  return buf;
}

}  // namespace

DatasetManifest generate_corpus(const CorpusProfile& profile, const std::string& out_dir) {
  validate_profile(profile);
  fs::create_directories(out_dir);

  const int num_groups = (profile.num_tracks + profile.tracks_per_group - 1) /
                         profile.tracks_per_group;
  std::vector<TimbreSpec> group_timbre(std::size_t(num_groups), TimbreSpec{});
  for (int g = 0; g < num_groups; ++g) {
    Rng rng(derive_seed(profile.seed, "timbre:" + padded_index("artist", g)));
    const int partials =
        profile.partials_min +
        int(rng.index(std::size_t(profile.partials_max - profile.partials_min + 1)));
    const double rolloff = rng.uniform(profile.rolloff_min, profile.rolloff_max);
    TimbreSpec t;
    t.partial_amps.resize(std::size_t(partials));
    for (int p = 0; p < partials; ++p) t.partial_amps[std::size_t(p)] = std::pow(rolloff, p);
    group_timbre[std::size_t(g)] = std::move(t);
  }

  const double lo = freq_to_cents(profile.f0_min_hz);
  const double hi = freq_to_cents(profile.f0_max_hz);
  const TrajectoryKind kinds[] = {TrajectoryKind::constant, TrajectoryKind::glissando,
                                  TrajectoryKind::vibrato, TrajectoryKind::random_walk};

  DatasetManifest manifest;
  manifest.dir = out_dir;
  std::vector<TrajectoryParams> params(std::size_t(profile.num_tracks));
  for (int i = 0; i < profile.num_tracks; ++i) {
    const int g = i / profile.tracks_per_group;
    TrackEntry entry;
    entry.id = padded_index("track", i);
    entry.audio = entry.id + ".wav";
    entry.annotation = entry.id + ".csv";
    entry.group = padded_index("artist", g);
    entry.duration_sec = profile.duration_sec;

    Rng rng(derive_seed(profile.seed, "track:" + entry.id));
    TrajectoryParams p;
    p.kind = kinds[i % 4];
    p.min_hz = profile.f0_min_hz;
    p.max_hz = profile.f0_max_hz;
    p.seed = derive_seed(profile.seed, "walk:" + entry.id);
    switch (p.kind) {
      case TrajectoryKind::constant:
        p.start_hz = cents_to_freq(rng.uniform(lo, hi));
        break;
      case TrajectoryKind::glissando: {
        const bool up = rng.uniform() < 0.5;
        const double base = rng.uniform(lo, hi - profile.glissando_span_cents);
        const double c0 = up ? base : base + profile.glissando_span_cents;
        const double c1 = up ? base + profile.glissando_span_cents : base;
        p.start_hz = cents_to_freq(c0);
        p.end_hz = cents_to_freq(c1);
        break;
      }
      case TrajectoryKind::vibrato: {
        p.vibrato_depth_cents =
            rng.uniform(profile.vibrato_depth_min_cents, profile.vibrato_depth_max_cents);
        p.vibrato_rate_hz =
            rng.uniform(profile.vibrato_rate_min_hz, profile.vibrato_rate_max_hz);
        p.start_hz = cents_to_freq(
            rng.uniform(lo + p.vibrato_depth_cents, hi - p.vibrato_depth_cents));
        break;
      }
      case TrajectoryKind::random_walk:
        p.start_hz = cents_to_freq(rng.uniform(lo, hi));
        p.walk_step_cents = profile.walk_step_cents;
        break;
    }
    params[std::size_t(i)] = p;
    manifest.tracks.push_back(std::move(entry));
  }

  std::string first_error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < profile.num_tracks; ++i) {
    const TrackEntry& entry = manifest.tracks[std::size_t(i)];
    try {
      const PitchTrack f0 = gen_f0_trajectory(params[std::size_t(i)], profile.duration_sec,
                                              profile.annotation_step_sec);
      const Audio audio = synth_harmonic(
          f0, group_timbre[std::size_t(i / profile.tracks_per_group)], profile.sample_rate);
      write_wav(track_audio_path(manifest, entry), audio, WavFormat::float32);
      write_pitch_csv(track_annotation_path(manifest, entry), f0);
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = entry.id + ": " + e.what();
    }
  }
  if (!first_error.empty()) fail("generate_corpus: " + first_error);

  save_manifest(manifest, manifest_path_in(out_dir));
  return manifest;
}

}  // namespace pitchtrack
