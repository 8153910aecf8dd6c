#pragma once

#include <cstdint>
#include <string>

#include "pitchtrack/network.hpp"

namespace pitchtrack {

// Training metadata recorded in the model manifest.
struct ModelMeta {
  std::string profile;
  int fold = -1;
  std::uint64_t seed = 0;
  int best_epoch = -1;
  double best_val_rpa = -1.0;
};

// File layout: 8-byte magic "PTMODEL1", little-endian u64 manifest length,
// manifest JSON (config echo, hyperparameters, tensor table), then all
// tensors as little-endian float32 in manifest order.
void save_model(const std::string& path, const Network& net,
                const ModelMeta* meta = nullptr);

// Validates magic, version, layer order, tensor shapes, and blob length;
// throws without returning a partial model.
Network load_model(const std::string& path);

// Manifest JSON text of a saved model, for config echo without loading tensors.
std::string read_model_manifest(const std::string& path);

// FNV-1a 64 over the file bytes, as 16 hex digits.
std::string file_hash_hex(const std::string& path);

}  // namespace pitchtrack
