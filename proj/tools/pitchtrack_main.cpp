// Batch frontend: corpus synthesis, noise degradation, training, prediction,
// evaluation, robustness sweeps, filter inspection.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "pitchtrack/audio.hpp"
#include "pitchtrack/datagen.hpp"
#include "pitchtrack/dataset.hpp"
#include "pitchtrack/errors.hpp"
#include "pitchtrack/evaluation.hpp"
#include "pitchtrack/model_io.hpp"
#include "pitchtrack/net_config.hpp"
#include "pitchtrack/network.hpp"
#include "pitchtrack/pitch_track.hpp"
#include "pitchtrack/rng.hpp"
#include "pitchtrack/training.hpp"
#include "pitchtrack/yin.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pitchtrack;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = library default
  bool verbose = false;
  bool seed_given = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    fail("not a number: '" + text + "'", ErrCode::bad_argument);
  }
  require(pos == text.size(), "not a number: '" + text + "'");
  return v;
}

// SNR values: a decibel number or "inf" for the clean pass-through.
double parse_snr(const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  const double v = parse_double(text);
  require(std::isfinite(v), "snr must be finite or 'inf': '" + text + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split_list(text)) out.push_back(parse_double(item));
  return out;
}

ordered_json base_echo(const std::string& command, const GlobalOpts& g) {
  ordered_json j;
  j["command"] = command;
  j["seed"] = g.seed;
  j["threads"] = g.threads;
  j["verbose"] = g.verbose;
  return j;
}

void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "cannot open for writing: " + path, ErrCode::missing_file);
  f << j.dump(2) << "\n";
  f.flush();
  require(f.good(), "write failed: " + path, ErrCode::generic);
}

// The run config echo sits next to the output: <dir>/run.json for directory
// outputs, <file>.run.json for file outputs.
void echo_next_to_dir(const std::string& dir, const ordered_json& j) {
  write_json_file((fs::path(dir) / "run.json").string(), j);
}

void echo_next_to_file(const std::string& path, const ordered_json& j) {
  write_json_file(path + ".run.json", j);
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

struct SynthOpts {
  std::string profile = "default";
  std::string out;
};

int cmd_synth(const GlobalOpts& g, const SynthOpts& o) {
  CorpusProfile profile = resolve_corpus_profile(o.profile);
  if (g.seed_given) profile.seed = g.seed;
  DatasetManifest manifest = generate_corpus(profile, o.out);

  ordered_json echo = base_echo("synth", g);
  echo["profile"] = ordered_json::parse(corpus_profile_to_json(profile));
  echo["out"] = o.out;
  echo["tracks"] = manifest.tracks.size();
  echo_next_to_dir(o.out, echo);
  std::printf("synth: %zu tracks in %s\n", manifest.tracks.size(), o.out.c_str());
  return 0;
}

struct DegradeOpts {
  std::string in;
  std::string noise;
  std::string snr;
  std::string out;
};

int cmd_degrade(const GlobalOpts& g, const DegradeOpts& o) {
  const NoiseSpec spec = parse_noise_spec(o.noise);
  const double snr_db = parse_snr(o.snr);
  const DatasetManifest in_m = load_manifest(o.in);
  fs::create_directories(o.out);

  DatasetManifest out_m;
  out_m.dir = o.out;
  out_m.tracks = in_m.tracks;
  for (const TrackEntry& tr : in_m.tracks) {
    const fs::path audio_dst = fs::path(o.out) / tr.audio;
    const fs::path ann_dst = fs::path(o.out) / tr.annotation;
    ensure_parent_dir(audio_dst.string());
    ensure_parent_dir(ann_dst.string());
    fs::copy_file(track_annotation_path(in_m, tr), ann_dst,
                  fs::copy_options::overwrite_existing);
    if (std::isinf(snr_db)) {
      // Clean pass-through keeps the audio bytes untouched.
      fs::copy_file(track_audio_path(in_m, tr), audio_dst,
                    fs::copy_options::overwrite_existing);
      continue;
    }
    const Audio audio = read_wav(track_audio_path(in_m, tr));
    const Audio noise =
        gen_noise(spec, audio.samples.size(), audio.sample_rate,
                  derive_seed(g.seed, noise_spec_name(spec) + ":" + tr.id));
    write_wav(audio_dst.string(), mix_at_snr(audio, noise, snr_db));
    if (g.verbose) std::fprintf(stderr, "degrade: %s\n", tr.id.c_str());
  }
  save_manifest(out_m, manifest_path_in(o.out));

  ordered_json echo = base_echo("degrade", g);
  echo["in"] = o.in;
  echo["noise"] = noise_spec_name(spec);
  echo["snr_db"] = format_f6(snr_db);
  echo["out"] = o.out;
  echo["tracks"] = out_m.tracks.size();
  echo_next_to_dir(o.out, echo);
  std::printf("degrade: %zu tracks in %s\n", out_m.tracks.size(), o.out.c_str());
  return 0;
}

struct TrainOpts {
  std::string data;
  std::string config = "full";
  std::string profile = "full";
  int fold = 0;
  int folds = 5;
  std::string out;
};

int cmd_train(const GlobalOpts& g, const TrainOpts& o) {
  const NetworkConfig config = resolve_network_config(o.config);
  const TrainProfile profile = resolve_train_profile(o.profile);
  const DatasetManifest manifest = load_manifest(o.data);
  require(o.folds >= 2, "train: --folds must be at least 2");
  require(o.fold >= 0 && o.fold < o.folds,
          "train: --fold " + std::to_string(o.fold) + " out of range for " +
              std::to_string(o.folds) + " folds");

  const std::vector<FoldSplit> folds =
      make_folds(manifest, o.folds, derive_seed(g.seed, "folds"));
  const FoldSplit& split = folds[std::size_t(o.fold)];

  std::vector<std::string> ids = split.train_ids;
  ids.insert(ids.end(), split.val_ids.begin(), split.val_ids.end());
  const Dataset dataset = load_dataset(manifest, ids);

  TrainProgress progress;
  if (g.verbose) {
    progress = [](int epoch, double loss, double val_rpa, bool improved) {
      std::fprintf(stderr, "epoch %d  loss %.6f  val_rpa %.6f%s\n", epoch, loss,
                   val_rpa, improved ? "  *" : "");
    };
  }
  TrainResult result = train_network(config, dataset, split, profile, g.seed, progress);

  ModelMeta meta;
  meta.profile = profile.name;
  meta.fold = o.fold;
  meta.seed = g.seed;
  meta.best_epoch = result.history.best_epoch;
  meta.best_val_rpa = result.history.val_rpa[std::size_t(result.history.best_epoch - 1)];

  ensure_parent_dir(o.out);
  save_model(o.out, result.net, &meta);
  write_history_csv(o.out + ".history.csv", result.history);
  {
    std::ofstream f(o.out + ".folds.json", std::ios::binary);
    require(f.good(), "cannot open for writing: " + o.out + ".folds.json",
            ErrCode::missing_file);
    f << folds_to_json(folds);
  }

  ordered_json echo = base_echo("train", g);
  echo["data"] = o.data;
  echo["config"] = ordered_json::parse(network_config_to_json(config));
  echo["profile"] = ordered_json::parse(train_profile_to_json(profile));
  echo["fold"] = o.fold;
  echo["folds"] = o.folds;
  echo["out"] = o.out;
  echo["best_epoch"] = meta.best_epoch;
  echo["best_val_rpa"] = meta.best_val_rpa;
  echo["model_hash"] = file_hash_hex(o.out);
  echo_next_to_file(o.out, echo);
  std::printf("train: best epoch %d  val_rpa %s  model %s\n", meta.best_epoch,
              format_f6(meta.best_val_rpa).c_str(), o.out.c_str());
  return 0;
}

struct PredictOpts {
  std::string model;
  std::string in;
  std::string out;
  double hop_ms = 10.0;
};

int run_predict(const GlobalOpts& g, const PredictOpts& o, bool use_yin) {
  const int hop = int(std::llround(o.hop_ms * kModelSampleRate / 1000.0));
  require(hop >= 1, "predict: --hop too small");

  Network net;
  std::string model_hash;
  std::function<PitchTrack(const Audio&)> predictor;
  if (use_yin) {
    predictor = [hop](const Audio& a) { return yin_track(a, hop); };
  } else {
    net = load_model(o.model);
    model_hash = file_hash_hex(o.model);
    predictor = [&net, hop](const Audio& a) { return predict_audio(net, a, hop); };
  }

  ordered_json echo = base_echo(use_yin ? "predict-yin" : "predict", g);
  if (!use_yin) {
    echo["model"] = o.model;
    echo["model_hash"] = model_hash;
  }
  echo["in"] = o.in;
  echo["out"] = o.out;
  echo["hop_ms"] = o.hop_ms;

  if (fs::is_directory(o.in)) {
    std::vector<std::pair<std::string, std::string>> items;  // id, wav path
    if (fs::exists(manifest_path_in(o.in))) {
      const DatasetManifest m = load_manifest(o.in);
      for (const TrackEntry& tr : m.tracks) items.emplace_back(tr.id, track_audio_path(m, tr));
    } else {
      for (const auto& entry : fs::directory_iterator(o.in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") {
          items.emplace_back(entry.path().stem().string(), entry.path().string());
        }
      }
      std::sort(items.begin(), items.end());
    }
    require(!items.empty(), "predict: no tracks found in " + o.in,
            ErrCode::missing_file);
    fs::create_directories(o.out);
    for (const auto& [id, wav] : items) {
      const PitchTrack pt = predictor(read_wav(wav));
      write_pitch_csv((fs::path(o.out) / (id + ".csv")).string(), pt);
      if (g.verbose) std::fprintf(stderr, "predict: %s\n", id.c_str());
    }
    echo["tracks"] = items.size();
    echo_next_to_dir(o.out, echo);
    std::printf("%s: %zu tracks in %s\n", use_yin ? "predict-yin" : "predict",
                items.size(), o.out.c_str());
  } else {
    const PitchTrack pt = predictor(read_wav(o.in));
    ensure_parent_dir(o.out);
    write_pitch_csv(o.out, pt);
    echo["frames"] = pt.size();
    echo_next_to_file(o.out, echo);
    std::printf("%s: %zu frames in %s\n", use_yin ? "predict-yin" : "predict",
                pt.size(), o.out.c_str());
  }
  return 0;
}

struct EvalOpts {
  std::string ref;
  std::string est;
  std::string thresholds = "50,25,10";
  std::string out;
};

int cmd_eval(const GlobalOpts& g, const EvalOpts& o) {
  const std::vector<double> thresholds = parse_double_list(o.thresholds);
  require(!thresholds.empty(), "eval: no thresholds given");
  for (const double t : thresholds) require(t > 0.0, "eval: thresholds must be positive");

  struct RefItem {
    std::string id, csv;
  };
  std::vector<RefItem> refs;
  if (fs::exists(manifest_path_in(o.ref))) {
    const DatasetManifest m = load_manifest(o.ref);
    for (const TrackEntry& tr : m.tracks) refs.push_back({tr.id, track_annotation_path(m, tr)});
  } else {
    require(fs::is_directory(o.ref), "eval: --ref is not a directory: " + o.ref,
            ErrCode::missing_file);
    for (const auto& entry : fs::directory_iterator(o.ref)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") {
        refs.push_back({entry.path().stem().string(), entry.path().string()});
      }
    }
    std::sort(refs.begin(), refs.end(),
              [](const RefItem& a, const RefItem& b) { return a.id < b.id; });
  }
  require(!refs.empty(), "eval: no reference annotations in " + o.ref,
          ErrCode::missing_file);

  DatasetManifest est_m;
  bool est_has_manifest = false;
  if (fs::exists(manifest_path_in(o.est))) {
    est_m = load_manifest(o.est);
    est_has_manifest = true;
  }

  EvalReport report;
  for (const RefItem& item : refs) {
    std::string est_csv = (fs::path(o.est) / (item.id + ".csv")).string();
    if (!fs::exists(est_csv) && est_has_manifest) {
      for (const TrackEntry& tr : est_m.tracks) {
        if (tr.id == item.id) {
          est_csv = track_annotation_path(est_m, tr);
          break;
        }
      }
    }
    if (!fs::exists(est_csv)) {
      report.errors.push_back(item.id + ": missing estimate file");
      continue;
    }
    try {
      const PitchTrack ref_track = read_pitch_csv(item.csv);
      const PitchTrack est_track = read_pitch_csv(est_csv);
      const std::vector<FramePair> pairs = align(ref_track, est_track);
      for (const double t : thresholds) {
        report.per_track.push_back({item.id, t, rpa(pairs, t), rca(pairs, t)});
      }
    } catch (const Error& e) {
      report.errors.push_back(item.id + ": " + e.what());
    }
  }
  if (!report.per_track.empty()) report.aggregate = aggregate_metrics(report.per_track);
  ensure_parent_dir(o.out);
  write_eval_report(o.out, report);

  ordered_json echo = base_echo("eval", g);
  echo["ref"] = o.ref;
  echo["est"] = o.est;
  echo["thresholds"] = thresholds;
  echo["out"] = o.out;
  echo["tracks_scored"] = refs.size() - report.errors.size();
  echo_next_to_file(o.out, echo);

  std::printf("eval: %zu tracks scored, %zu errors, report %s\n",
              refs.size() - report.errors.size(), report.errors.size(), o.out.c_str());
  if (!report.errors.empty()) {
    for (const std::string& e : report.errors) std::fprintf(stderr, "eval: %s\n", e.c_str());
    return 1;
  }
  return 0;
}

struct RobustnessOpts {
  std::string model;
  std::string data;
  std::string out;
  std::string noise = "white,pink,brown";
  std::string snrs = "inf,40,30,20,10,5,0";
  std::string tracks;
  double threshold = 50.0;
};

int cmd_robustness(const GlobalOpts& g, const RobustnessOpts& o) {
  Network net = load_model(o.model);
  const std::string model_hash = file_hash_hex(o.model);
  DatasetManifest manifest = load_manifest(o.data);

  std::vector<std::string> track_filter = split_list(o.tracks);
  if (!track_filter.empty()) {
    DatasetManifest filtered;
    filtered.dir = manifest.dir;
    for (const std::string& id : track_filter) {
      bool found = false;
      for (const TrackEntry& tr : manifest.tracks) {
        if (tr.id == id) {
          filtered.tracks.push_back(tr);
          found = true;
          break;
        }
      }
      require(found, "robustness: unknown track id: " + id);
    }
    manifest = std::move(filtered);
  }

  std::vector<NoiseSpec> kinds;
  for (const std::string& name : split_list(o.noise)) kinds.push_back(parse_noise_spec(name));
  require(!kinds.empty(), "robustness: no noise kinds given");
  std::vector<double> snrs;
  for (const std::string& s : split_list(o.snrs)) snrs.push_back(parse_snr(s));
  require(!snrs.empty(), "robustness: no snr values given");
  require(o.threshold > 0.0, "robustness: threshold must be positive");

  const TrackPredictor predictor = [&net](const Audio& a) { return predict_audio(net, a); };
  const std::vector<NoiseCurveRow> rows =
      noise_curve(predictor, manifest, kinds, snrs, o.threshold,
                  derive_seed(g.seed, "robustness"));
  ensure_parent_dir(o.out);
  write_noise_curve(o.out, rows);

  ordered_json echo = base_echo("robustness", g);
  echo["model"] = o.model;
  echo["model_hash"] = model_hash;
  echo["data"] = o.data;
  ordered_json kinds_json = ordered_json::array();
  for (const NoiseSpec& k : kinds) kinds_json.push_back(noise_spec_name(k));
  echo["noise"] = kinds_json;
  ordered_json snrs_json = ordered_json::array();
  for (const double s : snrs) snrs_json.push_back(format_f6(s));
  echo["snrs_db"] = snrs_json;
  echo["threshold_cents"] = o.threshold;
  if (!track_filter.empty()) echo["tracks"] = track_filter;
  echo["out"] = o.out;
  echo_next_to_file(o.out, echo);

  std::printf("robustness: model hash %s, %zu rows in %s\n", model_hash.c_str(),
              rows.size(), o.out.c_str());
  int failed = 0;
  for (const NoiseCurveRow& row : rows) {
    if (row.failed_tracks > 0) {
      failed += row.failed_tracks;
      std::fprintf(stderr, "robustness: %s snr %s: %d tracks failed\n",
                   row.noise.c_str(), format_f6(row.snr_db).c_str(), row.failed_tracks);
    }
  }
  return failed > 0 ? 1 : 0;
}

struct InspectOpts {
  std::string model;
  std::string out;
};

int cmd_inspect_filters(const GlobalOpts& g, const InspectOpts& o) {
  const Network net = load_model(o.model);
  const std::string model_hash = file_hash_hex(o.model);
  const std::vector<FilterSpectrum> rows = filter_spectra(net);
  ensure_parent_dir(o.out);
  write_filter_spectra(o.out, rows);

  ordered_json echo = base_echo("inspect-filters", g);
  echo["model"] = o.model;
  echo["model_hash"] = model_hash;
  echo["filters"] = rows.size();
  echo["out"] = o.out;
  echo_next_to_file(o.out, echo);

  std::printf("inspect-filters: model hash %s, %zu filters in %s\n",
              model_hash.c_str(), rows.size(), o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monophonic pitch tracking: synthesis, training, prediction, evaluation"};
  app.require_subcommand(1);

  GlobalOpts g;
  CLI::Option* seed_opt =
      app.add_option("--seed", g.seed, "Root random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Thread count (0 = library default)")
      ->capture_default_str();
  app.add_flag("--verbose", g.verbose, "Progress logging on standard error");

  SynthOpts synth_o;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic corpus (WAVs, annotation CSVs, manifest)");
  synth->fallthrough();
  synth->add_option("--profile", synth_o.profile, "'default' or a profile JSON file")
      ->capture_default_str();
  synth->add_option("--out", synth_o.out, "Output directory")->required();

  DegradeOpts degrade_o;
  CLI::App* degrade =
      app.add_subcommand("degrade", "Mix noise into a corpus at a fixed SNR");
  degrade->fallthrough();
  degrade->add_option("--in", degrade_o.in, "Input corpus directory or manifest")
      ->required();
  degrade->add_option("--noise", degrade_o.noise, "white, pink, brown, or file:PATH")
      ->required();
  degrade->add_option("--snr", degrade_o.snr, "Signal-to-noise ratio in dB, or 'inf'")
      ->required();
  degrade->add_option("--out", degrade_o.out, "Output directory")->required();

  TrainOpts train_o;
  CLI::App* train = app.add_subcommand("train", "Train a network on a corpus fold");
  train->fallthrough();
  train->add_option("--data", train_o.data, "Corpus directory or manifest")->required();
  train->add_option("--config", train_o.config, "'full', 'toy', or a config JSON file")
      ->capture_default_str();
  train->add_option("--profile", train_o.profile, "'full', 'toy', or a profile JSON file")
      ->capture_default_str();
  train->add_option("--fold", train_o.fold, "Held-out fold index")->capture_default_str();
  train->add_option("--folds", train_o.folds, "Number of folds")->capture_default_str();
  train->add_option("--out", train_o.out, "Output model file")->required();

  PredictOpts predict_o;
  CLI::App* predict = app.add_subcommand("predict", "Run a trained model over audio");
  predict->fallthrough();
  predict->add_option("--model", predict_o.model, "Model file")->required();
  predict->add_option("--in", predict_o.in, "WAV file or corpus directory")->required();
  predict->add_option("--out", predict_o.out, "Output CSV file or directory")->required();
  predict->add_option("--hop", predict_o.hop_ms, "Hop between frames in ms")
      ->capture_default_str();

  PredictOpts yin_o;
  CLI::App* predict_yin =
      app.add_subcommand("predict-yin", "Run the lightweight difference-function baseline");
  predict_yin->fallthrough();
  predict_yin->add_option("--in", yin_o.in, "WAV file or corpus directory")->required();
  predict_yin->add_option("--out", yin_o.out, "Output CSV file or directory")->required();
  predict_yin->add_option("--hop", yin_o.hop_ms, "Hop between frames in ms")
      ->capture_default_str();

  EvalOpts eval_o;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score estimates against reference annotations");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--ref", eval_o.ref, "Reference corpus directory")->required();
  eval_cmd->add_option("--est", eval_o.est, "Directory of estimate CSVs")->required();
  eval_cmd->add_option("--thresholds", eval_o.thresholds, "Comma list of cent thresholds")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_o.out, "Output report CSV")->required();

  RobustnessOpts robust_o;
  CLI::App* robustness =
      app.add_subcommand("robustness", "Accuracy curves over a noise and SNR grid");
  robustness->fallthrough();
  robustness->add_option("--model", robust_o.model, "Model file")->required();
  robustness->add_option("--data", robust_o.data, "Corpus directory or manifest")
      ->required();
  robustness->add_option("--noise", robust_o.noise, "Comma list of noise kinds")
      ->capture_default_str();
  robustness->add_option("--snrs", robust_o.snrs, "Comma list of SNRs in dB ('inf' = clean)")
      ->capture_default_str();
  robustness->add_option("--tracks", robust_o.tracks, "Comma list of track ids (default all)");
  robustness->add_option("--threshold", robust_o.threshold, "Accuracy threshold in cents")
      ->capture_default_str();
  robustness->add_option("--out", robust_o.out, "Output curves CSV")->required();

  InspectOpts inspect_o;
  CLI::App* inspect =
      app.add_subcommand("inspect-filters", "Fourier spectra of the first conv layer");
  inspect->fallthrough();
  inspect->add_option("--model", inspect_o.model, "Model file")->required();
  inspect->add_option("--out", inspect_o.out, "Output spectra CSV")->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;
#ifdef _OPENMP
  if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

  try {
    if (synth->parsed()) return cmd_synth(g, synth_o);
    if (degrade->parsed()) return cmd_degrade(g, degrade_o);
    if (train->parsed()) return cmd_train(g, train_o);
    if (predict->parsed()) return run_predict(g, predict_o, false);
    if (predict_yin->parsed()) return run_predict(g, yin_o, true);
    if (eval_cmd->parsed()) return cmd_eval(g, eval_o);
    if (robustness->parsed()) return cmd_robustness(g, robust_o);
    if (inspect->parsed()) return cmd_inspect_filters(g, inspect_o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code == ErrCode::bad_argument ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
