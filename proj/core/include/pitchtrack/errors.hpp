#pragma once

#include <stdexcept>
#include <string>

namespace pitchtrack {

enum class ErrCode {
  generic,
  missing_file,
  bad_format,
  truncated,
  bad_argument,
  shape_mismatch,
  version_mismatch,
  unvoiced,
  divergence,
};

struct Error : std::runtime_error {
  ErrCode code;
  explicit Error(const std::string& what, ErrCode c = ErrCode::generic)
      : std::runtime_error(what), code(c) {}
};

[[noreturn]] inline void fail(const std::string& msg, ErrCode c = ErrCode::generic) {
  throw Error(msg, c);
}

inline void require(bool ok, const std::string& msg, ErrCode c = ErrCode::bad_argument) {
  if (!ok) fail(msg, c);
}

}  // namespace pitchtrack
