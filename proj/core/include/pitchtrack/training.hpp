#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pitchtrack/audio.hpp"
#include "pitchtrack/dataset.hpp"
#include "pitchtrack/network.hpp"
#include "pitchtrack/rng.hpp"

namespace pitchtrack {

struct FoldSplit {
  std::vector<std::string> train_ids, val_ids, test_ids;
};

// Group keys are shuffled by seed and dealt into k test buckets; each fold's
// remaining groups split 3:1 into train:validation.  No group ever spans two
// of the three sets.
std::vector<FoldSplit> make_folds(const DatasetManifest& manifest, int k,
                                  std::uint64_t seed);

std::string folds_to_json(const std::vector<FoldSplit>& folds);
std::vector<FoldSplit> folds_from_json(const std::string& json_text);

struct TrainTrack {
  std::string id, group;
  std::vector<float> samples;  // 16 kHz mono
  int hop = kDefaultHop;
  std::size_t frame_count = 0;
  std::vector<double> frame_cents;         // per frame; 0 when unvoiced
  std::vector<std::uint8_t> frame_voiced;  // annotated f0 > 0 and within half a step
};

// Audio resampled to 16 kHz; each frame center is matched to the nearest
// annotation point within half the annotation step.
TrainTrack load_train_track(const DatasetManifest& manifest, const TrackEntry& entry,
                            int hop = kDefaultHop);

struct Dataset {
  std::vector<TrainTrack> tracks;

  const TrainTrack* find(const std::string& id) const {
    for (const TrainTrack& t : tracks) {
      if (t.id == id) return &t;
    }
    return nullptr;
  }
};

// Loads the listed track ids (all tracks when ids is empty), in manifest order.
Dataset load_dataset(const DatasetManifest& manifest, const std::vector<std::string>& ids,
                     int hop = kDefaultHop);

// Flat index of (track, frame) positions over the voiced frames of the listed
// tracks; sample_batch draws from it uniformly.
struct SampleIndex {
  std::vector<std::pair<std::int32_t, std::int32_t>> entries;
};

SampleIndex index_voiced_frames(const Dataset& dataset,
                                const std::vector<std::string>& ids);

// Fills inputs [batch, 1024] with normalized frames and targets [batch, 360].
void sample_batch(const Dataset& dataset, const SampleIndex& index, int batch_size,
                  Rng& rng, float* inputs, float* targets);

struct TrainProfile {
  std::string name = "full";
  int batches_per_epoch = 500;
  int batch_size = 32;
  int patience = 32;
  int max_epochs = 1000;
  int val_stride = 1;  // validation scores every val_stride-th frame
};

TrainProfile full_train_profile();
TrainProfile toy_train_profile();
TrainProfile train_profile_from_json(const std::string& json_text);
std::string train_profile_to_json(const TrainProfile& profile);
// Built-in name ("full", "toy") or a path to a JSON profile.
TrainProfile resolve_train_profile(const std::string& name_or_path);

// Patience on strict improvement; epochs are 1-based.
struct EarlyStopper {
  explicit EarlyStopper(int patience_epochs) : patience(patience_epochs) {}

  bool observe(double value) {  // true when this epoch is a new best
    ++epoch;
    if (value > best_value) {
      best_value = value;
      best_epoch = epoch;
      since_best = 0;
      return true;
    }
    ++since_best;
    return false;
  }

  bool should_stop() const { return since_best >= patience; }

  int patience = 0;
  int epoch = 0;
  int best_epoch = 0;
  int since_best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
};

struct TrainHistory {
  std::vector<double> train_loss;  // per-example mean over the epoch
  std::vector<double> val_rpa;     // RPA@50 on the validation tracks
  int best_epoch = 0;              // 1-based
};

void write_history_csv(const std::string& path, const TrainHistory& history);

// Mean per-track RPA over every val_stride-th voiced frame, in eval mode.
double validation_rpa(Network& net, const Dataset& dataset,
                      const std::vector<std::string>& ids, int val_stride,
                      double threshold_cents = 50.0);

struct TrainResult {
  Network net;  // best-epoch weights and running statistics
  TrainHistory history;
};

using TrainProgress =
    std::function<void(int epoch, double train_loss, double val_rpa, bool improved)>;

// Per epoch: batches_per_epoch steps of forward/backward/adam, then
// validation RPA@50; stops after patience epochs without improvement and
// returns the best snapshot.  Aborts with a divergence error on non-finite
// loss.
TrainResult train_network(const NetworkConfig& config, const Dataset& dataset,
                          const FoldSplit& fold, const TrainProfile& profile,
                          std::uint64_t seed, const TrainProgress& progress = {});

}  // namespace pitchtrack
