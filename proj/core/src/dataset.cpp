#include "pitchtrack/dataset.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "pitchtrack/errors.hpp"

namespace fs = std::filesystem;

namespace pitchtrack {

std::string manifest_path_in(const std::string& dir) {
  return (fs::path(dir) / "manifest.json").string();
}

DatasetManifest load_manifest(const std::string& path) {
  fs::path file(path);
  if (fs::is_directory(file)) file /= "manifest.json";
  std::ifstream in(file);
  if (!in) fail("load_manifest: cannot open " + file.string(), ErrCode::missing_file);

  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("load_manifest: bad JSON in " + file.string() + ": " + e.what(),
         ErrCode::bad_format);
  }
  require(j.value("format", "") == "pitchtrack-dataset",
          "load_manifest: not a dataset manifest: " + file.string(), ErrCode::bad_format);
  require(j.value("version", 0) == 1, "load_manifest: unsupported manifest version",
          ErrCode::version_mismatch);

  DatasetManifest m;
  m.dir = file.parent_path().string();
  if (m.dir.empty()) m.dir = ".";
  for (const auto& t : j.at("tracks")) {
    TrackEntry e;
    e.id = t.at("id").get<std::string>();
    e.audio = t.at("audio").get<std::string>();
    e.annotation = t.at("annotation").get<std::string>();
    e.group = t.at("group").get<std::string>();
    e.duration_sec = t.at("duration_sec").get<double>();
    require(!e.group.empty(), "load_manifest: empty group key for track " + e.id,
            ErrCode::bad_format);
    require(fs::exists(track_audio_path(m, e)),
            "load_manifest: missing audio file " + track_audio_path(m, e),
            ErrCode::missing_file);
    require(fs::exists(track_annotation_path(m, e)),
            "load_manifest: missing annotation file " + track_annotation_path(m, e),
            ErrCode::missing_file);
    m.tracks.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  fs::path file(path);
  if (fs::is_directory(file)) file /= "manifest.json";
  nlohmann::ordered_json j;
  j["format"] = "pitchtrack-dataset";
  j["version"] = 1;
  j["tracks"] = nlohmann::ordered_json::array();
  for (const auto& t : manifest.tracks) {
    nlohmann::ordered_json e;
    e["id"] = t.id;
    e["audio"] = t.audio;
    e["annotation"] = t.annotation;
    e["group"] = t.group;
    e["duration_sec"] = t.duration_sec;
    j["tracks"].push_back(std::move(e));
  }
  std::ofstream out(file, std::ios::trunc);
  if (!out) fail("save_manifest: cannot open " + file.string() + " for writing",
                 ErrCode::missing_file);
  out << j.dump(2) << "\n";
  require(bool(out), "save_manifest: short write to " + file.string(), ErrCode::truncated);
}

std::string track_audio_path(const DatasetManifest& manifest, const TrackEntry& track) {
  return (fs::path(manifest.dir) / track.audio).string();
}

std::string track_annotation_path(const DatasetManifest& manifest, const TrackEntry& track) {
  return (fs::path(manifest.dir) / track.annotation).string();
}

PitchTrack load_annotation(const DatasetManifest& manifest, const TrackEntry& track) {
  return read_pitch_csv(track_annotation_path(manifest, track));
}

}  // namespace pitchtrack
