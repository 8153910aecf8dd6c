#pragma once

#include <string>
#include <vector>

namespace pitchtrack {

struct LayerConfig {
  enum class Kind { conv1d, maxpool, dense_sigmoid };
  Kind kind = Kind::conv1d;
  // conv1d
  int out_channels = 0;
  int kernel_width = 0;
  int stride = 1;
  bool has_batchnorm = true;
  float dropout_p = 0.25f;
  // maxpool
  int pool_width = 2;
};

struct NetworkConfig {
  std::string name;
  int input_len = 1024;
  int output_dim = 360;
  int declared_latent = 0;  // 0 = no cross-check
  std::vector<LayerConfig> layers;
};

// Six conv layers, 1024 first-layer filters, 2048-unit latent.
NetworkConfig full_network_config();
// Four small conv layers; trains on a desktop CPU in minutes.
NetworkConfig toy_network_config();

NetworkConfig network_config_from_json(const std::string& json_text);
std::string network_config_to_json(const NetworkConfig& cfg);

// Accepts a built-in name ("full", "toy") or a path to a JSON file.
NetworkConfig resolve_network_config(const std::string& name_or_path);

}  // namespace pitchtrack
