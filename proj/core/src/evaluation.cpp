#include "pitchtrack/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "pitchtrack/cents.hpp"
#include "pitchtrack/errors.hpp"
#include "pitchtrack/fft.hpp"
#include "pitchtrack/rng.hpp"

namespace pitchtrack {

std::vector<FramePair> align(const PitchTrack& ref, const PitchTrack& est) {
  require(ref.size() > 0, "align: empty reference track");
  require(est.size() > 0, "align: empty estimate track");

  double step = std::numeric_limits<double>::infinity();
  if (ref.size() >= 2) {
    step = (ref.time.back() - ref.time.front()) / double(ref.size() - 1);
  } else if (est.size() >= 2) {
    step = (est.time.back() - est.time.front()) / double(est.size() - 1);
  }
  const double half = step / 2.0 + 1e-9;

  std::vector<FramePair> pairs(ref.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = ref.time[i];
    while (j + 1 < est.size() &&
           std::abs(est.time[j + 1] - t) <= std::abs(est.time[j] - t)) {
      ++j;
    }
    pairs[i].ref_hz = ref.freq[i];
    pairs[i].est_hz = std::abs(est.time[j] - t) <= half ? est.freq[j] : 0.0;
  }
  return pairs;
}

namespace {

double scored_fraction(const std::vector<FramePair>& pairs, double threshold_cents,
                       bool fold_octaves, const char* who) {
  std::int64_t voiced = 0, hits = 0;
  for (const FramePair& p : pairs) {
    if (p.ref_hz <= 0.0) continue;
    ++voiced;
    if (p.est_hz <= 0.0) continue;
    double err = 1200.0 * std::log2(p.est_hz / p.ref_hz);
    if (fold_octaves) err -= 1200.0 * std::round(err / 1200.0);
    if (std::abs(err) <= threshold_cents) ++hits;
  }
  require(voiced > 0, std::string(who) + ": no voiced reference frames");
  return double(hits) / double(voiced);
}

}  // namespace

double rpa(const std::vector<FramePair>& pairs, double threshold_cents) {
  return scored_fraction(pairs, threshold_cents, false, "rpa");
}

double rca(const std::vector<FramePair>& pairs, double threshold_cents) {
  return scored_fraction(pairs, threshold_cents, true, "rca");
}

std::vector<AggregateMetrics> aggregate_metrics(const std::vector<TrackMetrics>& rows) {
  require(!rows.empty(), "aggregate_metrics: no per-track rows");
  std::vector<double> thresholds;
  for (const TrackMetrics& r : rows) {
    if (std::find(thresholds.begin(), thresholds.end(), r.threshold_cents) ==
        thresholds.end()) {
      thresholds.push_back(r.threshold_cents);
    }
  }

  std::vector<AggregateMetrics> out;
  for (const double th : thresholds) {
    double n = 0.0, rpa_sum = 0.0, rca_sum = 0.0;
    for (const TrackMetrics& r : rows) {
      if (r.threshold_cents != th) continue;
      n += 1.0;
      rpa_sum += r.rpa;
      rca_sum += r.rca;
    }
    AggregateMetrics a;
    a.threshold_cents = th;
    a.rpa_mean = rpa_sum / n;
    a.rca_mean = rca_sum / n;
    double rpa_var = 0.0, rca_var = 0.0;
    for (const TrackMetrics& r : rows) {
      if (r.threshold_cents != th) continue;
      rpa_var += (r.rpa - a.rpa_mean) * (r.rpa - a.rpa_mean);
      rca_var += (r.rca - a.rca_mean) * (r.rca - a.rca_mean);
    }
    a.rpa_std = std::sqrt(rpa_var / n);
    a.rca_std = std::sqrt(rca_var / n);
    out.push_back(a);
  }
  return out;
}

void write_eval_report(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("write_eval_report: cannot open " + path + " for writing",
                 ErrCode::missing_file);
  out << "# per-track\n";
  out << "track_id,threshold_cents,rpa,rca\n";
  for (const TrackMetrics& r : report.per_track) {
    out << r.track_id << "," << format_f6(r.threshold_cents) << "," << format_f6(r.rpa)
        << "," << format_f6(r.rca) << "\n";
  }
  out << "# aggregate (unweighted mean, population std over tracks)\n";
  out << "threshold_cents,rpa_mean,rpa_std,rca_mean,rca_std\n";
  for (const AggregateMetrics& a : report.aggregate) {
    out << format_f6(a.threshold_cents) << "," << format_f6(a.rpa_mean) << ","
        << format_f6(a.rpa_std) << "," << format_f6(a.rca_mean) << ","
        << format_f6(a.rca_std) << "\n";
  }
  if (!report.errors.empty()) {
    out << "# errors\n";
    out << "track_id,message\n";
    for (const std::string& e : report.errors) out << e << "\n";
  }
  require(bool(out), "write_eval_report: short write to " + path, ErrCode::truncated);
}

std::vector<NoiseCurveRow> noise_curve(const TrackPredictor& predictor,
                                       const DatasetManifest& corpus,
                                       const std::vector<NoiseSpec>& kinds,
                                       const std::vector<double>& snrs_db,
                                       double threshold_cents, std::uint64_t seed) {
  require(!corpus.tracks.empty(), "noise_curve: empty corpus");
  require(!kinds.empty() && !snrs_db.empty(), "noise_curve: empty sweep");

  const std::size_t n_tracks = corpus.tracks.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // clean per-track RPA, shared by the +inf column of every kind
  std::vector<double> clean(n_tracks, nan);
  const bool want_clean = std::any_of(snrs_db.begin(), snrs_db.end(), [](double s) {
    return std::isinf(s) && s > 0.0;
  });

  struct Cell {
    std::vector<double> values;
    int failed = 0;
  };
  std::vector<std::vector<Cell>> cells(kinds.size(),
                                       std::vector<Cell>(snrs_db.size()));

  for (std::size_t ti = 0; ti < n_tracks; ++ti) {
    const TrackEntry& track = corpus.tracks[ti];
    const Audio audio = read_wav(track_audio_path(corpus, track));
    const PitchTrack ref = load_annotation(corpus, track);

    if (want_clean) {
      try {
        clean[ti] = rpa(align(ref, predictor(audio)), threshold_cents);
      } catch (const std::exception&) {
        // stays NaN; counted per cell below
      }
    }

    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
      Audio noise;
      bool have_noise = false;
      for (std::size_t si = 0; si < snrs_db.size(); ++si) {
        Cell& cell = cells[ki][si];
        const double snr = snrs_db[si];
        if (std::isinf(snr) && snr > 0.0) {
          if (std::isnan(clean[ti])) ++cell.failed;
          else cell.values.push_back(clean[ti]);
          continue;
        }
        try {
          if (!have_noise) {
            noise = gen_noise(kinds[ki], audio.samples.size(), audio.sample_rate,
                              derive_seed(seed, noise_spec_name(kinds[ki]) + ":" + track.id));
            have_noise = true;
          }
          const Audio degraded = mix_at_snr(audio, noise, snr);
          cell.values.push_back(rpa(align(ref, predictor(degraded)), threshold_cents));
        } catch (const std::exception&) {
          ++cell.failed;
        }
      }
    }
  }

  std::vector<NoiseCurveRow> rows;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    for (std::size_t si = 0; si < snrs_db.size(); ++si) {
      const Cell& cell = cells[ki][si];
      NoiseCurveRow row;
      row.noise = noise_spec_name(kinds[ki]);
      row.snr_db = snrs_db[si];
      row.failed_tracks = cell.failed;
      if (cell.values.empty()) {
        row.rpa_mean = nan;
        row.rpa_std = nan;
      } else {
        double mean = 0.0;
        for (const double v : cell.values) mean += v;
        mean /= double(cell.values.size());
        double var = 0.0;
        for (const double v : cell.values) var += (v - mean) * (v - mean);
        row.rpa_mean = mean;
        row.rpa_std = std::sqrt(var / double(cell.values.size()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_noise_curve(const std::string& path, const std::vector<NoiseCurveRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("write_noise_curve: cannot open " + path + " for writing",
                 ErrCode::missing_file);
  out << "noise_kind,snr_db,rpa_mean,rpa_std\n";
  for (const NoiseCurveRow& r : rows) {
    out << r.noise << "," << format_f6(r.snr_db) << "," << format_f6(r.rpa_mean) << ","
        << format_f6(r.rpa_std) << "\n";
  }
  require(bool(out), "write_noise_curve: short write to " + path, ErrCode::truncated);
}

std::vector<FilterSpectrum> filter_spectra(const Network& net) {
  const Stage* conv = nullptr;
  for (const Stage& s : net.plan.stages) {
    if (s.kind == StageKind::conv) {
      conv = &s;
      break;
    }
  }
  require(conv != nullptr, "filter_spectra: model has no conv layer");
  require(conv->in_ch == 1, "filter_spectra: first conv layer must read raw audio");

  constexpr std::size_t kFftLen = 2048;
  const std::vector<float>& kernel = net.params.t[std::size_t(conv->weight)];
  const int width = conv->width;

  std::vector<FilterSpectrum> rows(std::size_t(conv->out_ch));
  for (int oc = 0; oc < conv->out_ch; ++oc) {
    const float* k = kernel.data() + std::size_t(oc) * std::size_t(width);
    const auto spec = rfft(k, std::size_t(width), kFftLen);
    FilterSpectrum& row = rows[std::size_t(oc)];
    row.filter_index = oc;
    row.magnitude.resize(kFftLen / 2 + 1);  // one-sided, the rest mirrors it
    std::size_t peak = 0;
    for (std::size_t b = 0; b < row.magnitude.size(); ++b) {
      row.magnitude[b] = std::abs(spec[b]);
      if (row.magnitude[b] > row.magnitude[peak]) peak = b;
    }
    row.peak_hz = double(peak) * double(kModelSampleRate) / double(kFftLen);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FilterSpectrum& a, const FilterSpectrum& b) {
                     return a.peak_hz < b.peak_hz;
                   });
  return rows;
}

void write_filter_spectra(const std::string& path,
                          const std::vector<FilterSpectrum>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("write_filter_spectra: cannot open " + path + " for writing",
                 ErrCode::missing_file);
  out << "filter_index,peak_hz";
  if (!rows.empty()) {
    for (std::size_t b = 0; b < rows.front().magnitude.size(); ++b) {
      out << ",mag_" << b;
    }
  }
  out << "\n";
  for (const FilterSpectrum& r : rows) {
    out << r.filter_index << "," << format_f6(r.peak_hz);
    for (const double m : r.magnitude) out << "," << format_f6(m);
    out << "\n";
  }
  require(bool(out), "write_filter_spectra: short write to " + path, ErrCode::truncated);
}

}  // namespace pitchtrack
