#pragma once

#include <string>
#include <vector>

#include "pitchtrack/pitch_track.hpp"

namespace pitchtrack {

struct TrackEntry {
  std::string id;
  std::string audio;       // relative to the manifest directory
  std::string annotation;  // relative to the manifest directory
  std::string group;
  double duration_sec = 0.0;
};

struct DatasetManifest {
  std::string dir;  // directory holding the manifest file; base for relative paths
  std::vector<TrackEntry> tracks;
};

// dir/manifest.json
std::string manifest_path_in(const std::string& dir);

// Accepts the manifest file itself or the directory containing manifest.json.
// Verifies that every referenced file exists.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

std::string track_audio_path(const DatasetManifest& manifest, const TrackEntry& track);
std::string track_annotation_path(const DatasetManifest& manifest, const TrackEntry& track);
PitchTrack load_annotation(const DatasetManifest& manifest, const TrackEntry& track);

}  // namespace pitchtrack
