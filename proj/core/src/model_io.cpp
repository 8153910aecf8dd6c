#include "pitchtrack/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "pitchtrack/errors.hpp"
#include "pitchtrack/rng.hpp"

namespace pitchtrack {

namespace {

constexpr char kMagic[8] = {'P', 'T', 'M', 'O', 'D', 'E', 'L', '1'};
constexpr int kFormatVersion = 1;
constexpr const char* kLayerOrder = "batchnorm-conv-relu-maxpool-dropout";

void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

void put_f32(std::string& s, float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  s.push_back(char(u & 0xff));
  s.push_back(char((u >> 8) & 0xff));
  s.push_back(char((u >> 16) & 0xff));
  s.push_back(char((u >> 24) & 0xff));
}

float read_f32(const unsigned char* p) {
  const std::uint32_t u = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                          std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  return std::bit_cast<float>(u);
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path, ErrCode::missing_file);
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
}

nlohmann::ordered_json build_manifest(const Network& net, const ModelMeta* meta) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["layer_order"] = kLayerOrder;
  j["config"] = nlohmann::ordered_json::parse(network_config_to_json(net.config));
  nlohmann::ordered_json h;
  h["learning_rate"] = kLearningRate;
  h["adam_beta1"] = kAdamBeta1;
  h["adam_beta2"] = kAdamBeta2;
  h["adam_eps"] = kAdamEps;
  h["batchnorm_momentum"] = kBnMomentum;
  h["batchnorm_eps"] = kBnEps;
  h["bce_clamp"] = kBceClamp;
  j["hyperparameters"] = std::move(h);
  if (meta) {
    nlohmann::ordered_json t;
    t["profile"] = meta->profile;
    t["fold"] = meta->fold;
    t["seed"] = meta->seed;
    t["best_epoch"] = meta->best_epoch;
    t["best_val_rpa"] = meta->best_val_rpa;
    j["training"] = std::move(t);
  }
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const TensorInfo& info : net.plan.tensors) {
    nlohmann::ordered_json t;
    t["name"] = info.name;
    t["shape"] = info.shape;
    t["offset"] = offset;
    tensors.push_back(std::move(t));
    offset += std::uint64_t(info.size()) * 4;
  }
  j["tensors"] = std::move(tensors);
  return j;
}

}  // namespace

void save_model(const std::string& path, const Network& net, const ModelMeta* meta) {
  for (std::size_t i = 0; i < net.plan.tensors.size(); ++i) {
    require(std::int64_t(net.params.t[i].size()) == net.plan.tensors[i].size(),
            "save_model: tensor " + net.plan.tensors[i].name + " has a stale size",
            ErrCode::shape_mismatch);
  }
  const std::string manifest = build_manifest(net, meta).dump(2);

  std::string out;
  std::uint64_t blob = 0;
  for (const auto& t : net.params.t) blob += std::uint64_t(t.size()) * 4;
  out.reserve(16 + manifest.size() + blob);
  out.append(kMagic, sizeof kMagic);
  put_u64(out, manifest.size());
  out += manifest;
  for (const auto& tensor : net.params.t) {
    for (const float v : tensor) put_f32(out, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("save_model: cannot open " + path + " for writing", ErrCode::missing_file);
  f.write(out.data(), std::streamsize(out.size()));
  require(bool(f), "save_model: short write to " + path, ErrCode::truncated);
}

namespace {

nlohmann::json parse_manifest(const std::vector<unsigned char>& bytes,
                              const std::string& path, std::size_t* blob_off) {
  require(bytes.size() >= 16, "load_model: " + path + " is too short",
          ErrCode::truncated);
  require(std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0,
          "load_model: " + path + " is not a model file", ErrCode::bad_format);
  const std::uint64_t mlen = read_u64(bytes.data() + 8);
  require(16 + mlen <= bytes.size(), "load_model: truncated manifest in " + path,
          ErrCode::truncated);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + std::ptrdiff_t(mlen));
  } catch (const nlohmann::json::exception& e) {
    fail("load_model: bad manifest JSON in " + path + ": " + e.what(),
         ErrCode::bad_format);
  }
  require(j.value("format_version", -1) == kFormatVersion,
          "load_model: unsupported format version in " + path, ErrCode::version_mismatch);
  require(j.value("layer_order", "") == kLayerOrder,
          "load_model: unsupported layer order in " + path, ErrCode::version_mismatch);
  if (blob_off) *blob_off = std::size_t(16 + mlen);
  return j;
}

}  // namespace

Network load_model(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  std::size_t blob_off = 0;
  const nlohmann::json j = parse_manifest(bytes, path, &blob_off);

  Network net;
  net.config = network_config_from_json(j.at("config").dump());
  net.plan = build_plan(net.config);
  net.params = make_params<float>(net.plan);

  const auto& table = j.at("tensors");
  require(table.size() == net.plan.tensors.size(),
          "load_model: tensor count mismatch in " + path, ErrCode::shape_mismatch);
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < net.plan.tensors.size(); ++i) {
    const TensorInfo& info = net.plan.tensors[i];
    const auto& row = table[i];
    require(row.at("name").get<std::string>() == info.name,
            "load_model: tensor order mismatch at " + info.name, ErrCode::shape_mismatch);
    require(row.at("shape").get<std::vector<std::int64_t>>() == info.shape,
            "load_model: shape mismatch for " + info.name, ErrCode::shape_mismatch);
    require(row.at("offset").get<std::uint64_t>() == offset,
            "load_model: offset mismatch for " + info.name, ErrCode::shape_mismatch);
    offset += std::uint64_t(info.size()) * 4;
  }
  require(blob_off + offset == bytes.size(),
          "load_model: weight blob length mismatch in " + path, ErrCode::truncated);

  const unsigned char* p = bytes.data() + blob_off;
  for (std::size_t i = 0; i < net.plan.tensors.size(); ++i) {
    auto& tensor = net.params.t[i];
    for (auto& v : tensor) {
      v = read_f32(p);
      p += 4;
    }
  }
  return net;
}

std::string read_model_manifest(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  require(bytes.size() >= 16 && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0,
          "read_model_manifest: " + path + " is not a model file", ErrCode::bad_format);
  const std::uint64_t mlen = read_u64(bytes.data() + 8);
  require(16 + mlen <= bytes.size(), "read_model_manifest: truncated manifest",
          ErrCode::truncated);
  return std::string(bytes.begin() + 16, bytes.begin() + 16 + std::ptrdiff_t(mlen));
}

std::string file_hash_hex(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  const std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pitchtrack
