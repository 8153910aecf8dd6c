#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pitchtrack/errors.hpp"
#include "pitchtrack/model_io.hpp"
#include "pitchtrack/net_config.hpp"
#include "pitchtrack/network.hpp"
#include "support/oracles.hpp"

using namespace pitchtrack;

namespace {

NetworkConfig small_config() {
  NetworkConfig cfg;
  cfg.name = "small";
  cfg.input_len = 64;
  LayerConfig conv;
  conv.kind = LayerConfig::Kind::conv1d;
  conv.out_channels = 4;
  conv.kernel_width = 8;
  LayerConfig mp;
  mp.kind = LayerConfig::Kind::maxpool;
  LayerConfig dense;
  dense.kind = LayerConfig::Kind::dense_sigmoid;
  cfg.layers = {conv, mp, dense};
  return cfg;
}

}  // namespace

TEST_CASE("model save/load roundtrip preserves everything") {
  oracles::TempDir tmp("model");
  const std::string path = tmp.file("net.ptm");
  Network net = make_network(small_config(), 123);
  ModelMeta meta;
  meta.profile = "toy";
  meta.fold = 2;
  meta.seed = 123;
  meta.best_epoch = 7;
  meta.best_val_rpa = 0.91;
  save_model(path, net, &meta);

  const Network back = load_model(path);
  CHECK(back.config.name == net.config.name);
  CHECK(back.config.input_len == net.config.input_len);
  REQUIRE(back.config.layers.size() == net.config.layers.size());
  CHECK(back.plan.latent == net.plan.latent);
  REQUIRE(back.params.t.size() == net.params.t.size());
  for (std::size_t i = 0; i < net.params.t.size(); ++i) {
    CHECK(back.params.t[i] == net.params.t[i]);
  }

  const auto manifest = nlohmann::json::parse(read_model_manifest(path));
  CHECK(manifest.at("format_version").get<int>() == 1);
  CHECK(manifest.at("hyperparameters").at("learning_rate").get<double>() ==
        doctest::Approx(0.0002).epsilon(1e-12));
  CHECK(manifest.at("training").at("profile").get<std::string>() == "toy");
  CHECK(manifest.at("training").at("fold").get<int>() == 2);
  CHECK(manifest.at("training").at("best_epoch").get<int>() == 7);
  CHECK(manifest.at("tensors").is_array());
  CHECK(manifest.at("tensors").size() == net.plan.tensors.size());
}

TEST_CASE("model files are byte-stable") {
  oracles::TempDir tmp("modeldet");
  Network net = make_network(small_config(), 5);
  save_model(tmp.file("a.ptm"), net);
  save_model(tmp.file("b.ptm"), net);
  CHECK(oracles::read_file(tmp.file("a.ptm")) == oracles::read_file(tmp.file("b.ptm")));
  CHECK(file_hash_hex(tmp.file("a.ptm")) == file_hash_hex(tmp.file("b.ptm")));
}

TEST_CASE("load_model rejects damaged files") {
  oracles::TempDir tmp("modelbad");
  const std::string path = tmp.file("net.ptm");
  Network net = make_network(small_config(), 9);
  save_model(path, net);
  const std::string bytes = oracles::read_file(path);

  SUBCASE("missing file") {
    try {
      (void)load_model(tmp.file("absent.ptm"));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code == ErrCode::missing_file);
    }
  }

  SUBCASE("bad magic") {
    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::ofstream(path, std::ios::binary) << corrupt;
    CHECK_THROWS_AS((void)load_model(path), Error);
  }

  SUBCASE("truncated blob") {
    std::ofstream(path, std::ios::binary)
        << bytes.substr(0, bytes.size() - 100);
    try {
      (void)load_model(path);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code == ErrCode::truncated);
    }
  }
}

TEST_CASE("file_hash_hex is fnv1a64 of the bytes") {
  oracles::TempDir tmp("hash");
  std::ofstream(tmp.file("f.txt"), std::ios::binary) << "foobar";
  CHECK(file_hash_hex(tmp.file("f.txt")) == "85944171f73967e8");
  std::ofstream(tmp.file("g.txt"), std::ios::binary) << "foobaz";
  CHECK(file_hash_hex(tmp.file("g.txt")) != file_hash_hex(tmp.file("f.txt")));
}
