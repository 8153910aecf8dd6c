#include "pitchtrack/net_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pitchtrack/errors.hpp"

namespace pitchtrack {

namespace {

using nlohmann::json;

NetworkConfig conv_stack(std::string name, const std::vector<int>& channels,
                         const std::vector<int>& widths, const std::vector<int>& strides,
                         int declared_latent) {
  NetworkConfig cfg;
  cfg.name = std::move(name);
  cfg.declared_latent = declared_latent;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    LayerConfig conv;
    conv.kind = LayerConfig::Kind::conv1d;
    conv.out_channels = channels[i];
    conv.kernel_width = widths[i];
    conv.stride = strides[i];
    cfg.layers.push_back(conv);
    LayerConfig pool;
    pool.kind = LayerConfig::Kind::maxpool;
    pool.pool_width = 2;
    cfg.layers.push_back(pool);
  }
  LayerConfig dense;
  dense.kind = LayerConfig::Kind::dense_sigmoid;
  cfg.layers.push_back(dense);
  return cfg;
}

}  // namespace

NetworkConfig full_network_config() {
  return conv_stack("full", {1024, 128, 128, 128, 256, 512}, {512, 64, 64, 64, 64, 64},
                    {4, 1, 1, 1, 1, 1}, 2048);
}

NetworkConfig toy_network_config() {
  return conv_stack("toy", {64, 32, 32, 64}, {64, 16, 16, 16}, {4, 1, 1, 1}, 1024);
}

NetworkConfig network_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("network config: invalid JSON: ") + e.what(), ErrCode::bad_format);
  }
  NetworkConfig cfg;
  cfg.name = j.value("name", std::string("custom"));
  cfg.input_len = j.value("input_len", 1024);
  cfg.output_dim = j.value("output_dim", 360);
  cfg.declared_latent = j.value("latent", 0);
  require(j.contains("layers") && j["layers"].is_array(),
          "network config: missing layers array", ErrCode::bad_format);
  for (const auto& jl : j["layers"]) {
    LayerConfig l;
    const std::string kind = jl.value("kind", std::string());
    if (kind == "conv1d") {
      l.kind = LayerConfig::Kind::conv1d;
      l.out_channels = jl.value("out_channels", 0);
      l.kernel_width = jl.value("kernel_width", 0);
      l.stride = jl.value("stride", 1);
      l.has_batchnorm = jl.value("has_batchnorm", true);
      l.dropout_p = jl.value("dropout_p", 0.25f);
    } else if (kind == "maxpool") {
      l.kind = LayerConfig::Kind::maxpool;
      l.pool_width = jl.value("pool_width", 2);
    } else if (kind == "dense-sigmoid") {
      l.kind = LayerConfig::Kind::dense_sigmoid;
    } else {
      fail("network config: unknown layer kind '" + kind + "'", ErrCode::bad_format);
    }
    cfg.layers.push_back(l);
  }
  return cfg;
}

std::string network_config_to_json(const NetworkConfig& cfg) {
  json layers = json::array();
  for (const auto& l : cfg.layers) {
    json jl;
    switch (l.kind) {
      case LayerConfig::Kind::conv1d:
        jl["kind"] = "conv1d";
        jl["out_channels"] = l.out_channels;
        jl["kernel_width"] = l.kernel_width;
        jl["stride"] = l.stride;
        jl["has_batchnorm"] = l.has_batchnorm;
        jl["dropout_p"] = l.dropout_p;
        break;
      case LayerConfig::Kind::maxpool:
        jl["kind"] = "maxpool";
        jl["pool_width"] = l.pool_width;
        break;
      case LayerConfig::Kind::dense_sigmoid:
        jl["kind"] = "dense-sigmoid";
        break;
    }
    layers.push_back(jl);
  }
  json j;
  j["name"] = cfg.name;
  j["input_len"] = cfg.input_len;
  j["output_dim"] = cfg.output_dim;
  if (cfg.declared_latent > 0) j["latent"] = cfg.declared_latent;
  j["layers"] = layers;
  return j.dump(2);
}

NetworkConfig resolve_network_config(const std::string& name_or_path) {
  if (name_or_path == "full") return full_network_config();
  if (name_or_path == "toy") return toy_network_config();
  require(std::filesystem::exists(name_or_path),
          "network config: no built-in named '" + name_or_path + "' and no such file",
          ErrCode::missing_file);
  std::ifstream in(name_or_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return network_config_from_json(ss.str());
}

}  // namespace pitchtrack
