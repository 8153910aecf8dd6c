#include "pitchtrack/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "pitchtrack/cents.hpp"
#include "pitchtrack/errors.hpp"
#include "pitchtrack/pitch_track.hpp"

namespace pitchtrack {

std::vector<FoldSplit> make_folds(const DatasetManifest& manifest, int k,
                                  std::uint64_t seed) {
  require(k >= 2, "make_folds: need k >= 2");
  std::vector<std::string> groups;
  for (const TrackEntry& t : manifest.tracks) {
    if (std::find(groups.begin(), groups.end(), t.group) == groups.end()) {
      groups.push_back(t.group);
    }
  }
  require(int(groups.size()) >= k, "make_folds: fewer groups than folds");

  Rng rng(seed);
  shuffle(groups, rng);

  const std::size_t g = groups.size();
  auto bucket_begin = [&](int f) { return std::size_t(f) * g / std::size_t(k); };

  std::vector<FoldSplit> folds(std::size_t(k), FoldSplit{});
  for (int f = 0; f < k; ++f) {
    const std::size_t lo = bucket_begin(f), hi = bucket_begin(f + 1);
    std::vector<std::string> test_groups(groups.begin() + std::ptrdiff_t(lo),
                                         groups.begin() + std::ptrdiff_t(hi));
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < g; ++i) {
      if (i < lo || i >= hi) rest.push_back(groups[i]);
    }
    const std::size_t val_count = std::max<std::size_t>(1, (rest.size() + 2) / 4);
    require(rest.size() > val_count,
            "make_folds: not enough groups to split train and validation");
    std::vector<std::string> val_groups(rest.end() - std::ptrdiff_t(val_count), rest.end());
    rest.resize(rest.size() - val_count);

    auto in = [](const std::vector<std::string>& v, const std::string& s) {
      return std::find(v.begin(), v.end(), s) != v.end();
    };
    FoldSplit& split = folds[std::size_t(f)];
    for (const TrackEntry& t : manifest.tracks) {
      if (in(rest, t.group)) split.train_ids.push_back(t.id);
      else if (in(val_groups, t.group)) split.val_ids.push_back(t.id);
      else if (in(test_groups, t.group)) split.test_ids.push_back(t.id);
    }
  }
  return folds;
}

std::string folds_to_json(const std::vector<FoldSplit>& folds) {
  nlohmann::ordered_json j;
  j["folds"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    nlohmann::ordered_json e;
    e["fold"] = f;
    e["train"] = folds[f].train_ids;
    e["val"] = folds[f].val_ids;
    e["test"] = folds[f].test_ids;
    j["folds"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<FoldSplit> folds_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("folds: bad JSON: ") + e.what(), ErrCode::bad_format);
  }
  std::vector<FoldSplit> folds;
  for (const auto& e : j.at("folds")) {
    FoldSplit s;
    s.train_ids = e.at("train").get<std::vector<std::string>>();
    s.val_ids = e.at("val").get<std::vector<std::string>>();
    s.test_ids = e.at("test").get<std::vector<std::string>>();
    folds.push_back(std::move(s));
  }
  return folds;
}

TrainTrack load_train_track(const DatasetManifest& manifest, const TrackEntry& entry,
                            int hop) {
  require(hop > 0, "load_train_track: hop must be positive");
  Audio audio = read_wav(track_audio_path(manifest, entry));
  if (audio.sample_rate != kModelSampleRate) audio = resample(audio, kModelSampleRate);
  require(!audio.samples.empty(), "load_train_track: empty audio for " + entry.id);
  const PitchTrack ann = load_annotation(manifest, entry);
  require(ann.size() > 0, "load_train_track: empty annotation for " + entry.id);

  TrainTrack track;
  track.id = entry.id;
  track.group = entry.group;
  track.samples = std::move(audio.samples);
  track.hop = hop;
  track.frame_count = track.samples.size() / std::size_t(hop) + 1;
  track.frame_cents.assign(track.frame_count, 0.0);
  track.frame_voiced.assign(track.frame_count, 0);

  double step = std::numeric_limits<double>::infinity();
  if (ann.size() >= 2) {
    step = (ann.time.back() - ann.time.front()) / double(ann.size() - 1);
  }
  const double half = step / 2.0 + 1e-9;

  std::size_t j = 0;
  for (std::size_t k = 0; k < track.frame_count; ++k) {
    const double t = double(k) * hop / kModelSampleRate;
    while (j + 1 < ann.size() && std::abs(ann.time[j + 1] - t) <= std::abs(ann.time[j] - t)) {
      ++j;
    }
    if (std::abs(ann.time[j] - t) <= half && ann.freq[j] > 0.0) {
      track.frame_voiced[k] = 1;
      track.frame_cents[k] = freq_to_cents(ann.freq[j]);
    }
  }
  return track;
}

Dataset load_dataset(const DatasetManifest& manifest, const std::vector<std::string>& ids,
                     int hop) {
  Dataset ds;
  for (const TrackEntry& entry : manifest.tracks) {
    if (!ids.empty() &&
        std::find(ids.begin(), ids.end(), entry.id) == ids.end()) {
      continue;
    }
    ds.tracks.push_back(load_train_track(manifest, entry, hop));
  }
  if (!ids.empty()) {
    require(ds.tracks.size() == ids.size(),
            "load_dataset: some requested tracks are missing from the manifest");
  }
  return ds;
}

SampleIndex index_voiced_frames(const Dataset& dataset,
                                const std::vector<std::string>& ids) {
  SampleIndex index;
  for (std::size_t ti = 0; ti < dataset.tracks.size(); ++ti) {
    const TrainTrack& t = dataset.tracks[ti];
    if (!ids.empty() && std::find(ids.begin(), ids.end(), t.id) == ids.end()) continue;
    for (std::size_t k = 0; k < t.frame_count; ++k) {
      if (t.frame_voiced[k]) {
        index.entries.emplace_back(std::int32_t(ti), std::int32_t(k));
      }
    }
  }
  return index;
}

void sample_batch(const Dataset& dataset, const SampleIndex& index, int batch_size,
                  Rng& rng, float* inputs, float* targets) {
  require(batch_size >= 1, "sample_batch: batch size must be >= 1");
  require(!index.entries.empty(), "sample_batch: no voiced frames available");
  for (int b = 0; b < batch_size; ++b) {
    const auto [ti, fi] = index.entries[rng.index(index.entries.size())];
    const TrainTrack& t = dataset.tracks[std::size_t(ti)];
    float* frame = inputs + std::size_t(b) * kFrameLength;
    extract_frame(t.samples, std::size_t(fi) * std::size_t(t.hop), kFrameLength, frame);
    normalize_frame(frame, kFrameLength);
    encode_target(t.frame_cents[std::size_t(fi)], targets + std::size_t(b) * kNumBins);
  }
}

TrainProfile full_train_profile() { return TrainProfile{}; }

TrainProfile toy_train_profile() {
  TrainProfile p;
  p.name = "toy";
  p.batches_per_epoch = 50;
  p.batch_size = 32;
  p.patience = 8;
  p.max_epochs = 80;
  p.val_stride = 16;
  return p;
}

namespace {

void validate_profile(const TrainProfile& p) {
  require(p.batches_per_epoch >= 1, "train profile: batches_per_epoch must be >= 1");
  require(p.batch_size >= 2, "train profile: batch size must be >= 2 for batchnorm");
  require(p.patience >= 1, "train profile: patience must be >= 1");
  require(p.max_epochs >= 1, "train profile: max_epochs must be >= 1");
  require(p.val_stride >= 1, "train profile: val_stride must be >= 1");
}

}  // namespace

TrainProfile train_profile_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("train profile: bad JSON: ") + e.what(), ErrCode::bad_format);
  }
  TrainProfile d;
  TrainProfile p;
  p.name = j.value("name", std::string("custom"));
  p.batches_per_epoch = j.value("batches_per_epoch", d.batches_per_epoch);
  p.batch_size = j.value("batch_size", d.batch_size);
  p.patience = j.value("patience", d.patience);
  p.max_epochs = j.value("max_epochs", d.max_epochs);
  p.val_stride = j.value("val_stride", d.val_stride);
  validate_profile(p);
  return p;
}

std::string train_profile_to_json(const TrainProfile& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["batches_per_epoch"] = p.batches_per_epoch;
  j["batch_size"] = p.batch_size;
  j["patience"] = p.patience;
  j["max_epochs"] = p.max_epochs;
  j["val_stride"] = p.val_stride;
  return j.dump(2) + "\n";
}

TrainProfile resolve_train_profile(const std::string& name_or_path) {
  if (name_or_path == "full") return full_train_profile();
  if (name_or_path == "toy") return toy_train_profile();
  std::ifstream in(name_or_path);
  if (!in) fail("train profile: cannot open " + name_or_path, ErrCode::missing_file);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return train_profile_from_json(text);
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("write_history_csv: cannot open " + path + " for writing",
                 ErrCode::missing_file);
  out << "epoch,train_loss,val_rpa\n";
  for (std::size_t i = 0; i < history.train_loss.size(); ++i) {
    out << (i + 1) << "," << format_f6(history.train_loss[i]) << ","
        << format_f6(history.val_rpa[i]) << "\n";
  }
  require(bool(out), "write_history_csv: short write to " + path, ErrCode::truncated);
}

double validation_rpa(Network& net, const Dataset& dataset,
                      const std::vector<std::string>& ids, int val_stride,
                      double threshold_cents) {
  require(val_stride >= 1, "validation_rpa: stride must be >= 1");
  require(!ids.empty(), "validation_rpa: no validation tracks");

  constexpr int kBatch = 64;
  std::vector<float> frames(std::size_t(kBatch) * kFrameLength);
  std::vector<float> act;
  std::vector<double> batch_cents(kBatch);

  double sum = 0.0;
  int scored_tracks = 0;
  for (const std::string& id : ids) {
    const TrainTrack* t = dataset.find(id);
    require(t != nullptr, "validation_rpa: track " + id + " is not loaded");

    std::int64_t voiced = 0, hits = 0;
    int pending = 0;
    auto flush = [&]() {
      if (pending == 0) return;
      forward_eval(net, frames.data(), pending, act);
      for (int b = 0; b < pending; ++b) {
        const auto dec = decode_activation(act.data() + std::size_t(b) * kNumBins);
        if (dec && std::abs(*dec - batch_cents[std::size_t(b)]) <= threshold_cents) ++hits;
      }
      pending = 0;
    };

    for (std::size_t k = 0; k < t->frame_count; k += std::size_t(val_stride)) {
      if (!t->frame_voiced[k]) continue;
      ++voiced;
      float* frame = frames.data() + std::size_t(pending) * kFrameLength;
      extract_frame(t->samples, k * std::size_t(t->hop), kFrameLength, frame);
      normalize_frame(frame, kFrameLength);
      batch_cents[std::size_t(pending)] = t->frame_cents[k];
      if (++pending == kBatch) flush();
    }
    flush();
    if (voiced == 0) continue;
    sum += double(hits) / double(voiced);
    ++scored_tracks;
  }
  require(scored_tracks > 0, "validation_rpa: no voiced validation frames");
  return sum / double(scored_tracks);
}

TrainResult train_network(const NetworkConfig& config, const Dataset& dataset,
                          const FoldSplit& fold, const TrainProfile& profile,
                          std::uint64_t seed, const TrainProgress& progress) {
  validate_profile(profile);
  require(!fold.train_ids.empty(), "train_network: empty training set");
  require(!fold.val_ids.empty(), "train_network: empty validation set");

  TrainResult result;
  result.net = make_network(config, derive_seed(seed, "init"));
  Network& net = result.net;

  AdamState adam = make_adam_state(net.plan);
  ParamSet<float> grads = make_params<float>(net.plan);
  SampleIndex index = index_voiced_frames(dataset, fold.train_ids);
  require(!index.entries.empty(), "train_network: no voiced training frames");

  Rng sampler_rng(derive_seed(seed, "sampler"));
  Rng dropout_rng(derive_seed(seed, "dropout"));

  const int B = profile.batch_size;
  std::vector<float> inputs(std::size_t(B) * kFrameLength);
  std::vector<float> targets(std::size_t(B) * kNumBins);
  std::vector<float> dLdy(std::size_t(B) * kNumBins);
  Workspace<float> ws;

  EarlyStopper stopper(profile.patience);
  ParamSet<float> best = net.params;

  for (int epoch = 1; epoch <= profile.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int step = 0; step < profile.batches_per_epoch; ++step) {
      sample_batch(dataset, index, B, sampler_rng, inputs.data(), targets.data());
      forward(net.plan, net.params, inputs.data(), B, Mode::train, &dropout_rng, ws);
      const double loss =
          bce_loss(targets.data(), ws.act.back().data(), B, kNumBins, dLdy.data());
      if (!std::isfinite(loss)) {
        fail("train_network: loss diverged at epoch " + std::to_string(epoch),
             ErrCode::divergence);
      }
      loss_sum += loss;
      backward(net.plan, net.params, ws, dLdy.data(), grads);
      adam_step(net.plan, net.params, grads, adam);
    }
    result.history.train_loss.push_back(
        loss_sum / (double(profile.batches_per_epoch) * double(B)));
    const double vr =
        validation_rpa(net, dataset, fold.val_ids, profile.val_stride);
    result.history.val_rpa.push_back(vr);
    const bool improved = stopper.observe(vr);
    if (improved) best = net.params;
    if (progress) progress(epoch, result.history.train_loss.back(), vr, improved);
    if (stopper.should_stop()) break;
  }

  result.history.best_epoch = stopper.best_epoch;
  net.params = std::move(best);
  return result;
}

}  // namespace pitchtrack
