#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pitchtrack {

// Time-stamped frequency sequence; frequency 0 marks an unvoiced frame.
struct PitchTrack {
  std::vector<double> time;  // seconds, strictly increasing
  std::vector<double> freq;  // Hz, >= 0
  std::vector<double> conf;  // [0,1]; empty when absent

  std::size_t size() const { return time.size(); }
};

// CSV with header `time_sec,frequency_hz[,confidence]`; floats use 6
// decimals.  The reader accepts both 2- and 3-column files.
PitchTrack read_pitch_csv(const std::string& path);
void write_pitch_csv(const std::string& path, const PitchTrack& track);

std::string format_f6(double v);  // fixed 6-decimal rendering used by all CSVs

}  // namespace pitchtrack
