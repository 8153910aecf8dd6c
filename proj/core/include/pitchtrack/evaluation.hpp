#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pitchtrack/audio.hpp"
#include "pitchtrack/datagen.hpp"
#include "pitchtrack/dataset.hpp"
#include "pitchtrack/network.hpp"
#include "pitchtrack/pitch_track.hpp"

namespace pitchtrack {

struct FramePair {
  double ref_hz = 0.0;
  double est_hz = 0.0;  // 0 = unvoiced or unmatched
};

// Pairs every reference timestamp with the estimate nearest in time, accepted
// when the gap is at most half the reference grid step; unmatched reference
// frames pair with an unvoiced estimate.
std::vector<FramePair> align(const PitchTrack& ref, const PitchTrack& est);

// Fraction of voiced reference frames whose estimate is voiced and within
// threshold_cents.  Unvoiced estimates on voiced frames count as misses.
double rpa(const std::vector<FramePair>& pairs, double threshold_cents);
// Same, with the cent error folded to the nearest octave.
double rca(const std::vector<FramePair>& pairs, double threshold_cents);

struct TrackMetrics {
  std::string track_id;
  double threshold_cents = 50.0;
  double rpa = 0.0;
  double rca = 0.0;
};

struct AggregateMetrics {
  double threshold_cents = 0.0;
  double rpa_mean = 0.0, rpa_std = 0.0;  // unweighted mean, population std
  double rca_mean = 0.0, rca_std = 0.0;
};

struct EvalReport {
  std::vector<TrackMetrics> per_track;
  std::vector<AggregateMetrics> aggregate;
  std::vector<std::string> errors;  // "track_id: message"
};

// One aggregate row per distinct threshold, in first-seen order.
std::vector<AggregateMetrics> aggregate_metrics(const std::vector<TrackMetrics>& rows);
void write_eval_report(const std::string& path, const EvalReport& report);

using TrackPredictor = std::function<PitchTrack(const Audio& audio)>;

struct NoiseCurveRow {
  std::string noise;
  double snr_db = 0.0;  // +inf = clean
  double rpa_mean = 0.0;
  double rpa_std = 0.0;
  int failed_tracks = 0;
};

// Degrade -> predict -> score sweep over (kind, snr).  The noise realization
// is fixed per (kind, track) across the SNR ladder, and the clean column is
// computed once and shared by every kind.  Predictor failures mark the cell
// instead of aborting the sweep.
std::vector<NoiseCurveRow> noise_curve(const TrackPredictor& predictor,
                                       const DatasetManifest& corpus,
                                       const std::vector<NoiseSpec>& kinds,
                                       const std::vector<double>& snrs_db,
                                       double threshold_cents, std::uint64_t seed);
void write_noise_curve(const std::string& path, const std::vector<NoiseCurveRow>& rows);

struct FilterSpectrum {
  int filter_index = 0;  // channel index in the first conv layer
  double peak_hz = 0.0;
  std::vector<double> magnitude;  // 1025 bins of a 2048-point FFT at 16 kHz
};

// First-layer kernel spectra, sorted ascending by peak frequency (stable).
std::vector<FilterSpectrum> filter_spectra(const Network& net);
void write_filter_spectra(const std::string& path, const std::vector<FilterSpectrum>& rows);

}  // namespace pitchtrack
