#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pitchtrack/audio.hpp"
#include "pitchtrack/dataset.hpp"
#include "pitchtrack/pitch_track.hpp"

namespace pitchtrack {

enum class TrajectoryKind { constant, glissando, vibrato, random_walk };

TrajectoryKind trajectory_kind_from_name(const std::string& name);
std::string trajectory_kind_name(TrajectoryKind kind);

struct TrajectoryParams {
  TrajectoryKind kind = TrajectoryKind::constant;
  double start_hz = 440.0;  // constant level, glissando start, vibrato carrier, walk start
  double end_hz = 440.0;    // glissando endpoint
  double vibrato_rate_hz = 5.0;
  double vibrato_depth_cents = 50.0;
  double walk_step_cents = 5.0;  // step std in cents per grid point
  double min_hz = 32.70;         // random walk reflects at these edges
  double max_hz = 1975.5;
  std::uint64_t seed = 0;  // drives the random walk only
};

// Uniform time grid, count = floor(duration/step) + 1, fully voiced.
// Glissando is linear in cents; vibrato is carrier + depth * sin(2*pi*rate*t).
PitchTrack gen_f0_trajectory(const TrajectoryParams& params, double duration_sec,
                             double step_sec);

struct TimbreSpec {
  std::vector<double> partial_amps;  // partial_amps[p] scales partial p+1
};

// Additive synthesis with one phase accumulator per partial; the trajectory is
// interpolated linearly in cents between annotation points.  Partials at or
// above Nyquist are skipped sample by sample while their phase keeps running.
// Output is peak-normalized to 0.9.
Audio synth_harmonic(const PitchTrack& f0, const TimbreSpec& timbre, int sample_rate);

enum class NoiseKind { white, pink, brown, file };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::white;
  std::string file_path;  // file kind only
};

// "white" | "pink" | "brown" | "file:PATH"
NoiseSpec parse_noise_spec(const std::string& text);
std::string noise_spec_name(const NoiseSpec& spec);

// White is i.i.d. Gaussian; pink and brown shape a white spectrum by 1/sqrt(f)
// and 1/f with the DC bin zeroed.  File noise is loaded, resampled, and tiled.
// All kinds come back scaled to unit RMS.
Audio gen_noise(const NoiseSpec& spec, std::size_t length, int sample_rate,
                std::uint64_t seed);

// Scales the noise so 10*log10(P_signal/P_noise) equals snr_db over the whole
// track, then sums.  snr_db = +infinity returns the clean signal.  The mix is
// rescaled (both components jointly) only when its peak exceeds 1.
Audio mix_at_snr(const Audio& signal, const Audio& noise, double snr_db);

struct CorpusProfile {
  std::string name = "sine-corpus";
  int num_tracks = 40;
  int tracks_per_group = 4;
  double duration_sec = 30.0;
  double annotation_step_sec = 0.01;
  int sample_rate = kModelSampleRate;
  double f0_min_hz = 80.0;
  double f0_max_hz = 800.0;
  int partials_min = 1;
  int partials_max = 6;
  double rolloff_min = 0.3;
  double rolloff_max = 0.9;
  double vibrato_rate_min_hz = 4.0;
  double vibrato_rate_max_hz = 7.0;
  double vibrato_depth_min_cents = 20.0;
  double vibrato_depth_max_cents = 80.0;
  double glissando_span_cents = 700.0;
  double walk_step_cents = 5.0;
  std::uint64_t seed = 42;
};

CorpusProfile default_corpus_profile();
CorpusProfile corpus_profile_from_json(const std::string& json_text);
std::string corpus_profile_to_json(const CorpusProfile& profile);
// Built-in name "default" or a path to a JSON profile.
CorpusProfile resolve_corpus_profile(const std::string& name_or_path);

// Writes <id>.wav + <id>.csv per track plus manifest.json under out_dir and
// returns the manifest.  Generation is deterministic in profile.seed.
DatasetManifest generate_corpus(const CorpusProfile& profile, const std::string& out_dir);

}  // namespace pitchtrack
