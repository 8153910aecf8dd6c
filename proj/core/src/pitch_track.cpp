#include "pitchtrack/pitch_track.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pitchtrack/errors.hpp"

namespace pitchtrack {

std::string format_f6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

PitchTrack read_pitch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("read_pitch_csv: cannot open " + path, ErrCode::missing_file);
  PitchTrack t;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (!line.empty() && !(std::isdigit((unsigned char)line[0]) || line[0] == '-' ||
                             line[0] == '+' || line[0] == '.')) {
        continue;  // header row
      }
    }
    std::istringstream ss(line);
    std::string cell;
    double vals[3] = {0, 0, 0};
    int n = 0;
    while (n < 3 && std::getline(ss, cell, ',')) {
      try {
        vals[n] = std::stod(cell);
      } catch (...) {
        fail("read_pitch_csv: bad number at " + path + ":" + std::to_string(line_no),
             ErrCode::bad_format);
      }
      ++n;
    }
    require(n >= 2, "read_pitch_csv: need at least 2 columns at " + path + ":" +
                        std::to_string(line_no),
            ErrCode::bad_format);
    if (!t.time.empty()) {
      require(vals[0] > t.time.back(),
              "read_pitch_csv: timestamps must be strictly increasing in " + path,
              ErrCode::bad_format);
    }
    require(vals[1] >= 0.0, "read_pitch_csv: negative frequency in " + path,
            ErrCode::bad_format);
    t.time.push_back(vals[0]);
    t.freq.push_back(vals[1]);
    if (n >= 3) t.conf.push_back(vals[2]);
  }
  if (!t.conf.empty() && t.conf.size() != t.time.size()) {
    fail("read_pitch_csv: ragged confidence column in " + path, ErrCode::bad_format);
  }
  return t;
}

void write_pitch_csv(const std::string& path, const PitchTrack& track) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("write_pitch_csv: cannot open " + path + " for writing",
                 ErrCode::missing_file);
  const bool with_conf = !track.conf.empty();
  require(!with_conf || track.conf.size() == track.time.size(),
          "write_pitch_csv: ragged confidence column");
  require(track.freq.size() == track.time.size(), "write_pitch_csv: ragged columns");
  out << (with_conf ? "time_sec,frequency_hz,confidence\n" : "time_sec,frequency_hz\n");
  for (std::size_t i = 0; i < track.size(); ++i) {
    out << format_f6(track.time[i]) << ',' << format_f6(track.freq[i]);
    if (with_conf) out << ',' << format_f6(track.conf[i]);
    out << '\n';
  }
  require(bool(out), "write_pitch_csv: short write to " + path, ErrCode::truncated);
}

}  // namespace pitchtrack
