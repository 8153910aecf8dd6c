// End-to-end acceptance gate: one PASS/FAIL line per criterion, exit 0 only
// when every executed criterion passes.  Slow pipeline criteria reuse one
// trained model; --only runs a subset, --scratch keeps the artifacts.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pitchtrack/cents.hpp"
#include "pitchtrack/datagen.hpp"
#include "pitchtrack/dataset.hpp"
#include "pitchtrack/evaluation.hpp"
#include "pitchtrack/model_io.hpp"
#include "pitchtrack/net_config.hpp"
#include "pitchtrack/network.hpp"
#include "pitchtrack/training.hpp"
#include "pitchtrack/yin.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace pitchtrack;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_sec() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string str(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

std::string tail_of(const std::string& text, std::size_t n = 300) {
  if (text.size() <= n) return text;
  return "..." + text.substr(text.size() - n);
}

// criterion 1: analytic gradients vs 64-bit central differences

NetworkConfig gradcheck_config() {
  NetworkConfig cfg;
  cfg.name = "gradcheck";
  cfg.input_len = 64;
  LayerConfig c1;
  c1.kind = LayerConfig::Kind::conv1d;
  c1.out_channels = 4;
  c1.kernel_width = 8;
  LayerConfig c2 = c1;
  c2.out_channels = 8;
  LayerConfig mp;
  mp.kind = LayerConfig::Kind::maxpool;
  LayerConfig dense;
  dense.kind = LayerConfig::Kind::dense_sigmoid;
  cfg.layers = {c1, mp, c2, mp, dense};
  return cfg;
}

// loss for the finite-difference side, written independently of bce_loss
double reference_bce(const std::vector<double>& target, const std::vector<double>& act) {
  double loss = 0.0;
  for (std::size_t i = 0; i < act.size(); ++i) {
    double y = act[i];
    if (y < kBceClamp) y = kBceClamp;
    if (y > 1.0 - kBceClamp) y = 1.0 - kBceClamp;
    loss -= target[i] * std::log(y) + (1.0 - target[i]) * std::log1p(-y);
  }
  return loss;
}

Outcome criterion_gradcheck() {
  const double t0 = now_sec();
  const Plan plan = build_plan(gradcheck_config());
  ParamSet<double> params = init_params<double>(plan, 11);
  const int batch = 3;
  const std::uint64_t drop_seed = 77;

  Rng data_rng(21);
  std::vector<double> input(std::size_t(batch) * plan.input_len);
  for (auto& v : input) v = data_rng.normal();
  std::vector<double> target(std::size_t(batch) * plan.output_dim);
  std::vector<float> row(kNumBins);
  for (int b = 0; b < batch; ++b) {
    encode_target(data_rng.uniform(2200.0, 7000.0), row.data());
    for (int j = 0; j < kNumBins; ++j) target[std::size_t(b) * kNumBins + j] = row[j];
  }

  // fixed dropout seed per call keeps the loss surface differentiable in theta
  const auto loss_at = [&](ParamSet<double>& p) {
    Rng rng(drop_seed);
    Workspace<double> ws;
    forward(plan, p, input.data(), batch, Mode::train, &rng, ws);
    return reference_bce(target, ws.act.back());
  };

  Rng fwd_rng(drop_seed);
  Workspace<double> ws;
  forward(plan, params, input.data(), batch, Mode::train, &fwd_rng, ws);
  std::vector<double> dLdy(target.size());
  bce_loss(target.data(), ws.act.back().data(), batch, plan.output_dim, dLdy.data());
  ParamSet<double> grads = make_params<double>(plan);
  backward(plan, params, ws, dLdy.data(), grads);

  const double h = 1e-4;  // truncation and roundoff balance near 1e-6 relative
  Rng pick(31);
  double max_rel = 0.0;
  int checked = 0;
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    if (!plan.tensors[i].learnable) continue;
    const std::size_t n = params.t[i].size();
    const std::size_t coords = std::min(n, std::size_t(80));
    for (std::size_t s = 0; s < coords; ++s) {
      const std::size_t k = pick.index(n);
      const double saved = params.t[i][k];
      params.t[i][k] = saved + h;
      const double lp = loss_at(params);
      params.t[i][k] = saved - h;
      const double lm = loss_at(params);
      params.t[i][k] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = grads.t[i][k];
      const double denom = std::max(std::fabs(analytic), std::fabs(numeric));
      if (denom < 1e-6) continue;  // both at the finite-difference noise floor
      max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
      ++checked;
    }
  }
  const double elapsed = now_sec() - t0;
  Outcome out;
  out.pass = max_rel < 1e-5 && checked >= 200 && elapsed < 120.0;
  out.detail = str("max rel err %.3e over %d coords, %.1f s (need <1e-5, >=200, <120 s)",
                   max_rel, checked, elapsed);
  return out;
}

// criterion 3: decode(encode) within 1 cent in the grid interior

Outcome criterion_encode_decode() {
  const auto& g = bin_centers_cents();
  Rng rng(404);
  double max_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c = rng.uniform(g[0] + 100.0, g[kNumBins - 1] - 100.0);
    std::vector<float> y(kNumBins);
    encode_target(c, y.data());
    const auto back = decode_activation(y.data());
    if (!back) return {false, "decode returned no estimate"};
    max_err = std::max(max_err, std::fabs(*back - c));
  }
  return {max_err < 1.0,
          str("max roundtrip error %.4f cents over 1000 samples (need <1)", max_err)};
}

// criterion 4: rpa/rca vs a brute-force oracle on random track pairs

Outcome criterion_metric_oracle() {
  Rng rng(515);
  double max_diff = 0.0;
  int fold_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FramePair> pairs(300);
    for (auto& p : pairs) {
      const double ref = 60.0 * std::pow(2.0, rng.uniform(0.0, 4.7));
      const double u = rng.uniform();
      if (u < 0.05) {
        p = {0.0, 220.0};  // unvoiced reference
      } else if (u < 0.15) {
        p = {ref, 0.0};  // unvoiced estimate
      } else if (u < 0.35) {
        p = {ref, ref * std::pow(2.0, rng.uniform(-3.0, 3.0))};  // wild
      } else {
        p = {ref, ref * std::pow(2.0, rng.normal() * 40.0 / 1200.0)};  // near miss
      }
    }
    for (const double th : {50.0, 25.0, 10.0}) {
      const double a = rpa(pairs, th), ba = oracles::brute_rpa(pairs, th);
      const double c = rca(pairs, th), bc = oracles::brute_rca(pairs, th);
      max_diff = std::max({max_diff, std::fabs(a - ba), std::fabs(c - bc)});
      if (c < a) ++fold_violations;
    }
  }
  return {max_diff <= 1e-12 && fold_violations == 0,
          str("max |lib - brute| %.2e over 100 trials x 3 thresholds, rca<rpa %d times",
              max_diff, fold_violations)};
}

// criterion 5: colored-noise PSD slopes and SNR mixing accuracy

Outcome criterion_noise() {
  const struct {
    const char* name;
    double target, tol;
  } kinds[] = {{"white", 0.0, 1.0}, {"pink", -10.0, 1.5}, {"brown", -20.0, 2.0}};
  std::string detail;
  bool pass = true;
  for (const auto& k : kinds) {
    const Audio noise = gen_noise(parse_noise_spec(k.name), std::size_t(1) << 19,
                                  kModelSampleRate, 4242);
    std::vector<double> freq, psd;
    oracles::welch_psd(noise.samples, kModelSampleRate, 4096, freq, psd);
    const double slope = oracles::psd_slope_db_per_decade(freq, psd, 50.0, 6000.0);
    if (std::fabs(slope - k.target) > k.tol) pass = false;
    detail += str("%s %.2f ", k.name, slope);
  }

  PitchTrack f0;
  for (int i = 0; i <= 200; ++i) {
    f0.time.push_back(i * 0.01);
    f0.freq.push_back(220.0);
  }
  const Audio signal = synth_harmonic(f0, TimbreSpec{{1.0, 0.5}}, kModelSampleRate);
  const Audio noise =
      gen_noise(parse_noise_spec("white"), signal.samples.size(), kModelSampleRate, 99);
  double max_dev = 0.0;
  for (const double snr : {40.0, 30.0, 20.0, 10.0, 5.0, 0.0}) {
    const Audio mixed = mix_at_snr(signal, noise, snr);
    const double got = oracles::measured_snr_db(signal.samples, noise.samples, mixed.samples);
    max_dev = std::max(max_dev, std::fabs(got - snr));
  }
  if (max_dev > 0.1) pass = false;
  detail += str("dB/dec, max snr dev %.4f dB (need <=0.1)", max_dev);
  return {pass, detail};
}

// criterion 7: full config latent and first-layer width

Outcome criterion_shapes() {
  const Plan plan = build_plan(full_network_config());
  const bool pass = plan.latent == 2048 && plan.first_conv_channels == 1024;
  return {pass, str("full config: latent %d (need 2048), first-layer filters %d (need 1024)",
                    plan.latent, plan.first_conv_channels)};
}

// criterion 9: baseline accuracy on a clean pure-tone staircase sweep

Outcome criterion_yin_sweep() {
  const double c_lo = freq_to_cents(60.0), c_hi = freq_to_cents(1500.0);
  const double step_cents = 10.0, step_dur = 0.1, grid = 0.01;
  const int steps = int((c_hi - c_lo) / step_cents) + 1;
  const double total = steps * step_dur;

  PitchTrack ref;
  const int n = int(std::floor(total / grid + 0.5)) + 1;
  for (int i = 0; i < n; ++i) {
    const double t = i * grid;
    const int idx = std::min(int(t / step_dur), steps - 1);
    ref.time.push_back(t);
    ref.freq.push_back(cents_to_freq(c_lo + step_cents * idx));
  }
  const Audio audio = synth_harmonic(ref, TimbreSpec{{1.0}}, kModelSampleRate);
  const PitchTrack est = yin_track(audio);
  const double score = rpa(align(ref, est), 50.0);
  return {score >= 0.99, str("RPA@50 %.4f on a %d-step 60..1500 Hz sweep, %zu frames "
                             "(need >=0.99)",
                             score, steps, est.size())};
}

// criterion 2: desk-scale training through the CLI

struct PipelineArtifacts {
  std::string corpus_dir, model_path;
  std::vector<std::string> test_ids;
  bool trained = false;
};

Outcome criterion_training(const std::string& cli, const std::string& scratch,
                           PipelineArtifacts& art) {
  const double t0 = now_sec();
  std::string out;

  art.corpus_dir = (fs::path(scratch) / "corpus").string();
  if (oracles::run_command(cli, {"synth", "--profile", "default", "--out", art.corpus_dir},
                           &out) != 0) {
    return {false, "synth failed: " + tail_of(out)};
  }

  art.model_path = (fs::path(scratch) / "model.ptm").string();
  if (oracles::run_command(cli, {"--seed", "1234", "train", "--data", art.corpus_dir,
                                 "--config", "toy", "--profile", "toy", "--folds", "5",
                                 "--fold", "0", "--out", art.model_path},
                           &out) != 0) {
    return {false, "train failed: " + tail_of(out)};
  }
  const double train_done = now_sec();

  const std::vector<FoldSplit> folds =
      folds_from_json(oracles::read_file(art.model_path + ".folds.json"));
  if (folds.empty() || folds[0].test_ids.empty()) return {false, "empty fold split"};
  art.test_ids = folds[0].test_ids;

  const DatasetManifest manifest = load_manifest(art.corpus_dir);
  const std::string est_dir = (fs::path(scratch) / "est").string();
  const std::string yin_dir = (fs::path(scratch) / "est_yin").string();
  const std::string ref_dir = (fs::path(scratch) / "ref_heldout").string();
  fs::create_directories(ref_dir);

  for (const std::string& id : art.test_ids) {
    const TrackEntry* track = nullptr;
    for (const TrackEntry& tr : manifest.tracks) {
      if (tr.id == id) {
        track = &tr;
        break;
      }
    }
    if (!track) return {false, "fold test id missing from manifest: " + id};
    const std::string wav = track_audio_path(manifest, *track);
    if (oracles::run_command(cli, {"predict", "--model", art.model_path, "--in", wav,
                                   "--out", est_dir + "/" + id + ".csv"},
                             &out) != 0) {
      return {false, "predict failed on " + id + ": " + tail_of(out)};
    }
    if (oracles::run_command(cli, {"predict-yin", "--in", wav, "--out",
                                   yin_dir + "/" + id + ".csv"},
                             &out) != 0) {
      return {false, "predict-yin failed on " + id + ": " + tail_of(out)};
    }
    fs::copy_file(track_annotation_path(manifest, *track), ref_dir + "/" + id + ".csv",
                  fs::copy_options::overwrite_existing);
  }

  const std::string report = (fs::path(scratch) / "report.csv").string();
  if (oracles::run_command(cli, {"eval", "--ref", ref_dir, "--est", est_dir,
                                 "--thresholds", "50,10", "--out", report},
                           &out) != 0) {
    return {false, "eval failed: " + tail_of(out)};
  }

  double rpa50 = 0.0, rpa10 = 0.0, yin50 = 0.0, yin10 = 0.0;
  for (const std::string& id : art.test_ids) {
    const PitchTrack ref = read_pitch_csv(ref_dir + "/" + id + ".csv");
    const auto model_pairs = align(ref, read_pitch_csv(est_dir + "/" + id + ".csv"));
    const auto yin_pairs = align(ref, read_pitch_csv(yin_dir + "/" + id + ".csv"));
    rpa50 += rpa(model_pairs, 50.0);
    rpa10 += rpa(model_pairs, 10.0);
    yin50 += rpa(yin_pairs, 50.0);
    yin10 += rpa(yin_pairs, 10.0);
  }
  const double nt = double(art.test_ids.size());
  rpa50 /= nt;
  rpa10 /= nt;
  yin50 /= nt;
  yin10 /= nt;

  const double elapsed = now_sec() - t0;
  art.trained = true;
  Outcome o;
  o.pass = rpa50 >= 0.95 && rpa10 >= 0.80 && rpa10 > yin10 && elapsed <= 2700.0;
  o.detail = str("held-out RPA@50 %.4f (need >=0.95), RPA@10 %.4f (need >=0.80), baseline "
                 "RPA@10 %.4f / RPA@50 %.4f, %zu tracks, train %.0f s, total %.0f s "
                 "(need <=2700)",
                 rpa50, rpa10, yin10, yin50, art.test_ids.size(), train_done - t0, elapsed);
  return o;
}

// criterion 6: white-noise robustness of the trained model vs the baseline

Outcome criterion_robustness(const std::string& scratch, const PipelineArtifacts& art) {
  if (!art.trained) return {false, "no trained model (criterion 2 did not complete)"};

  Network net = load_model(art.model_path);
  const DatasetManifest full = load_manifest(art.corpus_dir);
  DatasetManifest sub;
  sub.dir = full.dir;
  for (const TrackEntry& tr : full.tracks) {
    for (std::size_t i = 0; i < art.test_ids.size() && i < 4; ++i) {
      if (tr.id == art.test_ids[i]) sub.tracks.push_back(tr);
    }
  }
  if (sub.tracks.empty()) return {false, "no held-out tracks found"};

  const std::vector<NoiseSpec> kinds = {parse_noise_spec("white")};
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> snrs = {inf, 40.0, 30.0, 20.0, 10.0, 5.0, 0.0};
  const TrackPredictor model_pred = [&net](const Audio& a) { return predict_audio(net, a); };
  const std::vector<NoiseCurveRow> rows =
      noise_curve(model_pred, sub, kinds, snrs, 50.0, 2026);
  write_noise_curve((fs::path(scratch) / "robustness.csv").string(), rows);

  int failed = 0;
  double worst_step = 0.0;
  std::string curve;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    failed += rows[i].failed_tracks;
    if (i > 0) worst_step = std::max(worst_step, rows[i].rpa_mean - rows[i - 1].rpa_mean);
    curve += str("%.3f ", rows[i].rpa_mean);
  }

  const TrackPredictor yin_pred = [](const Audio& a) { return yin_track(a); };
  const std::vector<NoiseCurveRow> yin_rows =
      noise_curve(yin_pred, sub, kinds, {0.0}, 50.0, 2026);
  const double model0 = rows.back().rpa_mean;
  const double yin0 = yin_rows.front().rpa_mean;

  const bool pass = failed == 0 && worst_step <= 0.02 && model0 > yin0;
  return {pass, str("RPA@50 by snr [inf..0dB]: %s| worst uphill step %.4f (need <=0.02), "
                    "0 dB model %.4f vs baseline %.4f, %zu tracks",
                    curve.c_str(), worst_step, model0, yin0, sub.tracks.size())};
}

// criterion 8: byte-identical train and predict runs at fixed seed

Outcome criterion_determinism(const std::string& cli, const std::string& scratch) {
  std::string out;

  CorpusProfile cp = default_corpus_profile();
  cp.name = "micro";
  cp.num_tracks = 6;
  cp.tracks_per_group = 1;
  cp.duration_sec = 2.0;
  cp.seed = 7;
  const std::string cp_path = (fs::path(scratch) / "micro_profile.json").string();
  std::ofstream(cp_path) << corpus_profile_to_json(cp);

  TrainProfile tp = toy_train_profile();
  tp.name = "micro";
  tp.batches_per_epoch = 4;
  tp.batch_size = 8;
  tp.max_epochs = 2;
  tp.patience = 2;
  tp.val_stride = 4;
  const std::string tp_path = (fs::path(scratch) / "micro_train.json").string();
  std::ofstream(tp_path) << train_profile_to_json(tp);

  const std::string corpus = (fs::path(scratch) / "micro").string();
  if (oracles::run_command(cli, {"synth", "--profile", cp_path, "--out", corpus}, &out) != 0) {
    return {false, "synth failed: " + tail_of(out)};
  }

  std::vector<std::string> models, preds;
  for (const char* run : {"a", "b"}) {
    const std::string model = (fs::path(scratch) / (std::string("det_") + run + ".ptm")).string();
    if (oracles::run_command(cli, {"--seed", "99", "--threads", "1", "train", "--data",
                                   corpus, "--config", "toy", "--profile", tp_path,
                                   "--folds", "2", "--fold", "0", "--out", model},
                             &out) != 0) {
      return {false, std::string("train run ") + run + " failed: " + tail_of(out)};
    }
    const std::string pred = (fs::path(scratch) / (std::string("det_pred_") + run)).string();
    if (oracles::run_command(cli, {"--seed", "99", "--threads", "1", "predict", "--model",
                                   model, "--in", corpus, "--out", pred},
                             &out) != 0) {
      return {false, std::string("predict run ") + run + " failed: " + tail_of(out)};
    }
    models.push_back(model);
    preds.push_back(pred);
  }

  int compared = 0;
  for (const char* suffix : {"", ".history.csv", ".folds.json"}) {
    if (oracles::read_file(models[0] + suffix) != oracles::read_file(models[1] + suffix)) {
      return {false, std::string("train outputs differ: model") + suffix};
    }
    ++compared;
  }
  const DatasetManifest m = load_manifest(corpus);
  for (const TrackEntry& tr : m.tracks) {
    if (oracles::read_file(preds[0] + "/" + tr.id + ".csv") !=
        oracles::read_file(preds[1] + "/" + tr.id + ".csv")) {
      return {false, "prediction csvs differ for " + tr.id};
    }
    ++compared;
  }
  return {true, str("model, history, folds and %zu prediction csvs byte-identical "
                    "(%d files)",
                    m.tracks.size(), compared)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria runner"};
  std::string cli_path, scratch_arg;
  std::vector<int> only;
  app.add_option("--cli", cli_path, "Path to the pitchtrack CLI binary")->required();
  app.add_option("--scratch", scratch_arg, "Keep artifacts in this directory");
  app.add_option("--only", only, "Run only these criterion numbers")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::optional<oracles::TempDir> tmp;
  std::string scratch = scratch_arg;
  if (scratch.empty()) {
    tmp.emplace("acceptance");
    scratch = tmp->path;
  } else {
    fs::create_directories(scratch);
  }

  const std::set<int> wanted(only.begin(), only.end());
  const auto selected = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

  PipelineArtifacts art;
  int passed = 0, ran = 0;
  const auto report = [&](int id, const Outcome& o) {
    ++ran;
    if (o.pass) ++passed;
    std::printf("criterion %d: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  if (selected(1)) report(1, criterion_gradcheck());
  if (selected(3)) report(3, criterion_encode_decode());
  if (selected(4)) report(4, criterion_metric_oracle());
  if (selected(5)) report(5, criterion_noise());
  if (selected(7)) report(7, criterion_shapes());
  if (selected(9)) report(9, criterion_yin_sweep());
  if (selected(2)) report(2, criterion_training(cli_path, scratch, art));
  if (selected(6)) report(6, criterion_robustness(scratch, art));
  if (selected(8)) report(8, criterion_determinism(cli_path, scratch));

  std::printf("acceptance: %d/%d criteria passed\n", passed, ran);
  return passed == ran ? 0 : 1;
}
