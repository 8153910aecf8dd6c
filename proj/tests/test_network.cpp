#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "pitchtrack/cents.hpp"
#include "pitchtrack/engine.hpp"
#include "pitchtrack/net_config.hpp"
#include "pitchtrack/network.hpp"
#include "pitchtrack/rng.hpp"

using namespace pitchtrack;

namespace {

// single-stage plan for surgical forward tests
Plan single_stage_plan(Stage st) {
  Plan p;
  p.input_len = st.in_ch * st.in_len;
  p.output_dim = st.out_ch * st.out_len;
  p.latent = st.in_ch * st.in_len;
  p.stages.push_back(st);
  return p;
}

// two conv blocks small enough to brute-force, ends in the dense head
NetworkConfig gradcheck_config() {
  NetworkConfig cfg;
  cfg.name = "gradcheck";
  cfg.input_len = 64;
  LayerConfig c1;
  c1.kind = LayerConfig::Kind::conv1d;
  c1.out_channels = 4;
  c1.kernel_width = 8;
  LayerConfig c2 = c1;
  c2.out_channels = 8;
  LayerConfig mp;
  mp.kind = LayerConfig::Kind::maxpool;
  LayerConfig dense;
  dense.kind = LayerConfig::Kind::dense_sigmoid;
  cfg.layers = {c1, mp, c2, mp, dense};
  return cfg;
}

// loss reimplemented independently of bce_loss for the finite-difference side
double reference_bce(const std::vector<double>& target, const std::vector<double>& act) {
  double loss = 0.0;
  for (std::size_t i = 0; i < act.size(); ++i) {
    double y = act[i];
    if (y < kBceClamp) y = kBceClamp;
    if (y > 1.0 - kBceClamp) y = 1.0 - kBceClamp;
    loss -= target[i] * std::log(y) + (1.0 - target[i]) * std::log1p(-y);
  }
  return loss;
}

struct GradcheckSetup {
  Plan plan;
  ParamSet<double> params;
  std::vector<double> input;
  std::vector<double> target;
  int batch = 3;
  std::uint64_t drop_seed = 77;

  GradcheckSetup() {
    plan = build_plan(gradcheck_config());
    params = init_params<double>(plan, 11);
    Rng rng(21);
    input.resize(std::size_t(batch) * plan.input_len);
    for (auto& v : input) v = rng.normal();
    target.resize(std::size_t(batch) * plan.output_dim);
    std::vector<float> row(kNumBins);
    for (int b = 0; b < batch; ++b) {
      encode_target(rng.uniform(2200.0, 7000.0), row.data());
      for (int j = 0; j < kNumBins; ++j) target[std::size_t(b) * kNumBins + j] = row[j];
    }
  }

  // same dropout seed every call so the loss surface stays fixed
  double loss(ParamSet<double>& p, std::vector<double>* dLdy = nullptr) {
    Rng rng(drop_seed);
    Workspace<double> ws;
    forward(plan, p, input.data(), batch, Mode::train, &rng, ws);
    if (dLdy) {
      dLdy->resize(target.size());
      return bce_loss(target.data(), ws.act.back().data(), batch, plan.output_dim,
                      dLdy->data());
    }
    return reference_bce(target, ws.act.back());
  }
};

}  // namespace

TEST_CASE("plan shapes for the built-in configs") {
  const Plan full = build_plan(full_network_config());
  CHECK(full.input_len == 1024);
  CHECK(full.latent == 2048);
  CHECK(full.first_conv_channels == 1024);
  CHECK(full.first_conv_width == 512);
  const int k1 = full.tensor_index("conv1.kernel");
  REQUIRE(k1 >= 0);
  CHECK(full.tensors[std::size_t(k1)].shape == std::vector<std::int64_t>{1024, 1, 512});
  const int dw = full.tensor_index("dense.weight");
  REQUIRE(dw >= 0);
  CHECK(full.tensors[std::size_t(dw)].shape == std::vector<std::int64_t>{2048, 360});

  const Plan toy = build_plan(toy_network_config());
  CHECK(toy.input_len == 1024);
  CHECK(toy.latent == 1024);
  CHECK(toy.first_conv_channels == 64);

  const Plan small = build_plan(gradcheck_config());
  CHECK(small.latent == 128);
}

TEST_CASE("network configs resolve by name and roundtrip through json") {
  const NetworkConfig full = resolve_network_config("full");
  CHECK(full.name == "full");
  const NetworkConfig toy = resolve_network_config("toy");
  CHECK(toy.name == "toy");
  CHECK_THROWS_AS((void)resolve_network_config("huge"), Error);

  const NetworkConfig back = network_config_from_json(network_config_to_json(toy));
  CHECK(back.name == toy.name);
  CHECK(back.input_len == toy.input_len);
  REQUIRE(back.layers.size() == toy.layers.size());
  for (std::size_t i = 0; i < toy.layers.size(); ++i) {
    CHECK(back.layers[i].kind == toy.layers[i].kind);
    CHECK(back.layers[i].out_channels == toy.layers[i].out_channels);
    CHECK(back.layers[i].kernel_width == toy.layers[i].kernel_width);
    CHECK(back.layers[i].stride == toy.layers[i].stride);
    CHECK(back.layers[i].has_batchnorm == toy.layers[i].has_batchnorm);
    CHECK(back.layers[i].dropout_p == toy.layers[i].dropout_p);
    CHECK(back.layers[i].pool_width == toy.layers[i].pool_width);
  }
  CHECK(build_plan(back).latent == 1024);

  CHECK_THROWS_AS((void)network_config_from_json("nonsense"), Error);
}

TEST_CASE("conv stage matches a naive oracle") {
  Stage st;
  st.kind = StageKind::conv;
  st.in_ch = 3;
  st.in_len = 20;
  st.out_ch = 5;
  st.width = 4;

  for (const int stride : {1, 2}) {
    st.stride = stride;
    st.out_len = (st.in_len - st.width) / stride + 1;
    Plan plan = single_stage_plan(st);
    plan.stages[0].weight = 0;
    plan.stages[0].bias = 1;
    plan.tensors.push_back(TensorInfo{"k", {st.out_ch, st.in_ch, st.width}, true});
    plan.tensors.push_back(TensorInfo{"b", {st.out_ch}, true});

    ParamSet<double> params = make_params<double>(plan);
    Rng rng(5);
    for (auto& v : params.t[0]) v = rng.uniform(-1.0, 1.0);
    for (auto& v : params.t[1]) v = rng.uniform(-1.0, 1.0);
    const int batch = 2;
    std::vector<double> x(std::size_t(batch) * plan.input_len);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);

    Workspace<double> ws;
    forward(plan, params, x.data(), batch, Mode::eval, nullptr, ws);
    const std::vector<double>& y = ws.act.back();

    for (int b = 0; b < batch; ++b) {
      for (int oc = 0; oc < st.out_ch; ++oc) {
        for (int t = 0; t < st.out_len; ++t) {
          double ref = params.t[1][std::size_t(oc)];
          for (int ic = 0; ic < st.in_ch; ++ic) {
            for (int w = 0; w < st.width; ++w) {
              ref += params.t[0][(std::size_t(oc) * st.in_ch + ic) * st.width + w] *
                     x[(std::size_t(b) * st.in_ch + ic) * st.in_len + t * stride + w];
            }
          }
          const double got =
              y[(std::size_t(b) * st.out_ch + oc) * std::size_t(st.out_len) + t];
          CHECK(got == doctest::Approx(ref).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("batchnorm stage") {
  Stage st;
  st.kind = StageKind::batchnorm;
  st.in_ch = st.out_ch = 3;
  st.in_len = st.out_len = 50;
  Plan plan = single_stage_plan(st);
  plan.stages[0].gamma = 0;
  plan.stages[0].beta = 1;
  plan.stages[0].rmean = 2;
  plan.stages[0].rvar = 3;
  plan.tensors.push_back(TensorInfo{"g", {3}, true});
  plan.tensors.push_back(TensorInfo{"b", {3}, true});
  plan.tensors.push_back(TensorInfo{"rm", {3}, false});
  plan.tensors.push_back(TensorInfo{"rv", {3}, false});

  const int batch = 4;
  Rng rng(9);
  std::vector<double> x(std::size_t(batch) * plan.input_len);
  for (auto& v : x) v = rng.uniform(-2.0, 5.0);

  SUBCASE("train mode standardizes per channel and updates running stats") {
    ParamSet<double> params = make_params<double>(plan);
    params.t[0].assign(3, 1.0);
    params.t[3].assign(3, 1.0);
    Workspace<double> ws;
    forward(plan, params, x.data(), batch, Mode::train, nullptr, ws);
    const std::vector<double>& y = ws.act.back();
    for (int c = 0; c < 3; ++c) {
      double mean = 0.0, sq = 0.0;
      double in_mean = 0.0, in_sq = 0.0;
      const double m = batch * 50.0;
      for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < 50; ++l) {
          const std::size_t i = (std::size_t(b) * 3 + std::size_t(c)) * 50 + std::size_t(l);
          mean += y[i];
          sq += y[i] * y[i];
          in_mean += x[i];
          in_sq += x[i] * x[i];
        }
      }
      mean /= m;
      in_mean /= m;
      const double var = sq / m - mean * mean;
      const double in_var = in_sq / m - in_mean * in_mean;
      CHECK(std::fabs(mean) < 1e-5);
      CHECK(std::fabs(var - 1.0) < 1e-3);
      CHECK(params.t[2][std::size_t(c)] ==
            doctest::Approx(0.01 * in_mean).epsilon(1e-9));
      CHECK(params.t[3][std::size_t(c)] ==
            doctest::Approx(0.99 + 0.01 * in_var).epsilon(1e-9));
    }
  }

  SUBCASE("gamma zero collapses the output to beta") {
    ParamSet<double> params = make_params<double>(plan);
    params.t[1].assign(3, 0.7);
    params.t[3].assign(3, 1.0);
    Workspace<double> ws;
    forward(plan, params, x.data(), batch, Mode::train, nullptr, ws);
    for (const double v : ws.act.back()) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
  }

  SUBCASE("eval mode with identity running stats is a near-identity") {
    ParamSet<double> params = make_params<double>(plan);
    params.t[0].assign(3, 1.0);
    params.t[3].assign(3, 1.0);
    Workspace<double> ws;
    forward(plan, params, x.data(), batch, Mode::eval, nullptr, ws);
    const std::vector<double>& y = ws.act.back();
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(std::fabs(y[i] - x[i]) <= 1e-5 * (1.0 + std::fabs(x[i])));
    }
  }
}

TEST_CASE("dropout stage") {
  Stage st;
  st.kind = StageKind::dropout;
  st.in_ch = st.out_ch = 1;
  st.drop_p = 0.25f;

  SUBCASE("eval mode is the identity bitwise") {
    st.in_len = st.out_len = 1000;
    Plan plan = single_stage_plan(st);
    ParamSet<float> params = make_params<float>(plan);
    Rng data_rng(2);
    std::vector<float> x(1000);
    for (auto& v : x) v = float(data_rng.normal());
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    CHECK(std::memcmp(ws.act.back().data(), x.data(), x.size() * sizeof(float)) == 0);
  }

  SUBCASE("p = 0 is the identity in train mode") {
    st.drop_p = 0.0f;
    st.in_len = st.out_len = 1000;
    Plan plan = single_stage_plan(st);
    ParamSet<float> params = make_params<float>(plan);
    std::vector<float> x(1000, 2.5f);
    Rng rng(1);
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::train, &rng, ws);
    for (const float v : ws.act.back()) CHECK(v == 2.5f);
  }

  SUBCASE("train mode preserves the expectation") {
    st.in_len = st.out_len = 1000000;
    Plan plan = single_stage_plan(st);
    ParamSet<float> params = make_params<float>(plan);
    std::vector<float> x(1000000, 1.0f);
    Rng rng(4);
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::train, &rng, ws);
    double sum = 0.0;
    int zeros = 0;
    const float scale = 1.0f / 0.75f;
    for (const float v : ws.act.back()) {
      sum += v;
      if (v == 0.0f) {
        ++zeros;
      } else {
        CHECK(v == scale);
      }
    }
    CHECK(std::fabs(sum / 1e6 - 1.0) < 0.005);
    CHECK(zeros > 240000);
    CHECK(zeros < 260000);
  }
}

TEST_CASE("maxpool stage") {
  Stage st;
  st.kind = StageKind::maxpool;
  st.in_ch = st.out_ch = 1;

  SUBCASE("width 1 is the identity") {
    st.in_len = st.out_len = 8;
    st.pool = 1;
    Plan plan = single_stage_plan(st);
    ParamSet<float> params = make_params<float>(plan);
    std::vector<float> x{3, 1, 4, 1, 5, 9, 2, 6};
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    CHECK(ws.act.back() == x);
  }

  SUBCASE("picks window maxima") {
    st.in_len = 4;
    st.out_len = 2;
    st.pool = 2;
    Plan plan = single_stage_plan(st);
    ParamSet<float> params = make_params<float>(plan);
    std::vector<float> x{1, 3, 2, 0};
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    CHECK(ws.act.back() == std::vector<float>{3, 2});
    CHECK(ws.pool_idx[0] == std::vector<std::int32_t>{1, 2});
  }

  SUBCASE("monotone input subsamples the window ends") {
    st.in_len = 10;
    st.out_len = 5;
    st.pool = 2;
    Plan plan = single_stage_plan(st);
    ParamSet<float> params = make_params<float>(plan);
    std::vector<float> x(10);
    for (int i = 0; i < 10; ++i) x[std::size_t(i)] = float(i);
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    CHECK(ws.act.back() == std::vector<float>{1, 3, 5, 7, 9});
  }
}

TEST_CASE("dense sigmoid stage") {
  Stage st;
  st.kind = StageKind::dense_sigmoid;
  st.in_ch = 1;
  st.in_len = 16;
  st.out_ch = 1;
  st.out_len = 360;
  Plan plan = single_stage_plan(st);
  plan.output_dim = 360;
  plan.latent = 16;
  plan.stages[0].weight = 0;
  plan.stages[0].bias = 1;
  plan.tensors.push_back(TensorInfo{"dense.weight", {16, 360}, true});
  plan.tensors.push_back(TensorInfo{"dense.bias", {360}, true});

  Rng rng(13);
  std::vector<float> x(16);
  for (auto& v : x) v = float(rng.normal());

  SUBCASE("zero weights give one half everywhere") {
    ParamSet<float> params = make_params<float>(plan);
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    for (const float v : ws.act.back()) CHECK(v == 0.5f);
  }

  SUBCASE("large bias saturates one output") {
    ParamSet<float> params = make_params<float>(plan);
    params.t[1][7] = 20.0f;
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    CHECK(std::fabs(double(ws.act.back()[7]) - 1.0) < 1e-8);
  }

  SUBCASE("random case matches the matrix-product oracle") {
    ParamSet<float> params = make_params<float>(plan);
    for (auto& v : params.t[0]) v = float(rng.uniform(-0.5, 0.5));
    for (auto& v : params.t[1]) v = float(rng.uniform(-0.5, 0.5));
    Workspace<float> ws;
    forward(plan, params, x.data(), 1, Mode::eval, nullptr, ws);
    const std::vector<float>& y = ws.act.back();
    for (int j = 0; j < 360; ++j) {
      double z = params.t[1][std::size_t(j)];
      for (int i = 0; i < 16; ++i) {
        z += double(x[std::size_t(i)]) * double(params.t[0][std::size_t(i) * 360 + j]);
      }
      const double ref = 1.0 / (1.0 + std::exp(-z));
      CHECK(std::fabs(double(y[std::size_t(j)]) - ref) < 1e-6);
      CHECK(y[std::size_t(j)] > 0.0f);
      CHECK(y[std::size_t(j)] < 1.0f);
    }
  }
}

TEST_CASE("bce loss values and gradient") {
  SUBCASE("uniform half against itself") {
    std::vector<double> t(360, 0.5), y(360, 0.5), g(360);
    const double L = bce_loss(t.data(), y.data(), 1, 360, g.data());
    CHECK(L == doctest::Approx(360.0 * std::log(2.0)).epsilon(1e-12));
    for (const double gv : g) CHECK(gv == 0.0);
  }

  SUBCASE("matching activation minimizes the loss") {
    Rng rng(6);
    std::vector<double> t(360);
    for (auto& v : t) v = rng.uniform(0.05, 0.95);
    std::vector<double> y = t;
    const double base = bce_loss(t.data(), y.data(), 1, 360, (double*)nullptr);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> y2 = t;
      for (auto& v : y2) {
        v = std::min(0.999, std::max(0.001, v + rng.uniform(-0.04, 0.04)));
      }
      CHECK(bce_loss(t.data(), y2.data(), 1, 360, (double*)nullptr) > base);
    }
  }

  SUBCASE("confident correct one-hot costs almost nothing") {
    std::vector<double> t(360, 0.0), y(360, 0.0);
    t[100] = 1.0;
    y[100] = 1.0;  // clamps to 1 - 1e-7; zeros clamp to 1e-7
    const double L = bce_loss(t.data(), y.data(), 1, 360, (double*)nullptr);
    CHECK(L < 1e-4);
    CHECK(L > 0.0);
  }

  SUBCASE("gradient matches the closed form") {
    std::vector<double> t{0.3}, y{0.8}, g{0.0};
    (void)bce_loss(t.data(), y.data(), 1, 1, g.data());
    CHECK(g[0] == doctest::Approx((0.8 - 0.3) / (0.8 * 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("adam step") {
  const Plan plan = build_plan(gradcheck_config());

  SUBCASE("zero gradients leave parameters unchanged") {
    ParamSet<float> params = init_params<float>(plan, 3);
    const ParamSet<float> before = params;
    ParamSet<float> grads = make_params<float>(plan);
    AdamState st = make_adam_state(plan);
    adam_step(plan, params, grads, st);
    for (std::size_t i = 0; i < params.t.size(); ++i) CHECK(params.t[i] == before.t[i]);
  }

  SUBCASE("first step moves every coordinate by about lr") {
    ParamSet<float> params = init_params<float>(plan, 3);
    const ParamSet<float> before = params;
    ParamSet<float> grads = make_params<float>(plan);
    Rng rng(10);
    for (std::size_t i = 0; i < grads.t.size(); ++i) {
      if (!plan.tensors[i].learnable) continue;
      for (auto& v : grads.t[i]) {
        v = float(rng.uniform(0.5, 2.0)) * (rng.uniform() < 0.5 ? -1.0f : 1.0f);
      }
    }
    AdamState st = make_adam_state(plan);
    adam_step(plan, params, grads, st);
    for (std::size_t i = 0; i < params.t.size(); ++i) {
      if (!plan.tensors[i].learnable) continue;
      for (std::size_t k = 0; k < params.t[i].size(); ++k) {
        const double step = double(before.t[i][k]) - double(params.t[i][k]);
        CHECK(std::fabs(std::fabs(step) - kLearningRate) < 0.01 * kLearningRate);
        CHECK(step * double(grads.t[i][k]) > 0.0);  // moves against the gradient
      }
    }
  }

  SUBCASE("identical calls from the same state agree, running stats untouched") {
    ParamSet<float> params1 = init_params<float>(plan, 3);
    ParamSet<float> grads = make_params<float>(plan);
    Rng rng(12);
    for (auto& tensor : grads.t) {
      for (auto& v : tensor) v = float(rng.normal());
    }
    ParamSet<float> params2 = params1;
    AdamState st1 = make_adam_state(plan);
    AdamState st2 = make_adam_state(plan);
    adam_step(plan, params1, grads, st1);
    adam_step(plan, params2, grads, st2);
    CHECK(st1.t == st2.t);
    for (std::size_t i = 0; i < params1.t.size(); ++i) {
      CHECK(params1.t[i] == params2.t[i]);
      CHECK(st1.m[i] == st2.m[i]);
      CHECK(st1.v[i] == st2.v[i]);
      if (!plan.tensors[i].learnable) {
        // running statistics carry fake gradients above yet must not move
        CHECK(params1.t[i] == init_params<float>(plan, 3).t[i]);
      }
    }
  }
}

TEST_CASE("init params") {
  const Plan plan = build_plan(toy_network_config());
  const ParamSet<float> a = init_params<float>(plan, 42);
  const ParamSet<float> b = init_params<float>(plan, 42);
  const ParamSet<float> c = init_params<float>(plan, 43);

  bool any_diff = false;
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    CHECK(a.t[i] == b.t[i]);
    if (a.t[i] != c.t[i]) any_diff = true;
    const std::string& name = plan.tensors[i].name;
    if (name.ends_with(".gamma") || name.ends_with(".running_var")) {
      for (const float v : a.t[i]) CHECK(v == 1.0f);
    }
    if (name.ends_with(".beta") || name.ends_with(".bias") ||
        name.ends_with(".running_mean")) {
      for (const float v : a.t[i]) CHECK(v == 0.0f);
    }
    if (name.ends_with(".kernel")) {
      const auto& sh = plan.tensors[i].shape;
      const double bound =
          std::sqrt(6.0 / (double(sh[1]) * double(sh[2]) + double(sh[0]) * double(sh[2])));
      float lo = 0.0f, hi = 0.0f;
      for (const float v : a.t[i]) {
        CHECK(std::fabs(v) <= bound);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(lo < -0.5f * float(bound));
      CHECK(hi > 0.5f * float(bound));
    }
  }
  CHECK(any_diff);
}

TEST_CASE("eval forward is bitwise deterministic with activations in (0,1)") {
  Network net = make_network(toy_network_config(), 7);
  Rng rng(15);
  std::vector<float> input(2 * 1024);
  for (auto& v : input) v = float(rng.normal());

  std::vector<float> out1, out2;
  forward_eval(net, input.data(), 2, out1);
  forward_eval(net, input.data(), 2, out2);
  REQUIRE(out1.size() == 2 * 360);
  CHECK(std::memcmp(out1.data(), out2.data(), out1.size() * sizeof(float)) == 0);
  for (const float v : out1) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("zero upstream gradient zeroes every parameter gradient") {
  GradcheckSetup gc;
  Rng rng(gc.drop_seed);
  Workspace<double> ws;
  forward(gc.plan, gc.params, gc.input.data(), gc.batch, Mode::train, &rng, ws);
  std::vector<double> dLdy(gc.target.size(), 0.0);
  ParamSet<double> grads = make_params<double>(gc.plan);
  backward(gc.plan, gc.params, ws, dLdy.data(), grads);
  for (const auto& tensor : grads.t) {
    for (const double v : tensor) CHECK(v == 0.0);
  }
}

TEST_CASE("duplicating the batch doubles every gradient") {
  NetworkConfig cfg = gradcheck_config();
  for (auto& l : cfg.layers) l.dropout_p = 0.0f;  // masks would differ per copy
  const Plan plan = build_plan(cfg);
  ParamSet<double> params = init_params<double>(plan, 19);

  Rng rng(23);
  const int batch = 2;
  std::vector<double> x(std::size_t(batch) * plan.input_len);
  for (auto& v : x) v = rng.normal();
  std::vector<double> t(std::size_t(batch) * plan.output_dim);
  for (auto& v : t) v = rng.uniform(0.0, 1.0);

  std::vector<double> x2(x);
  x2.insert(x2.end(), x.begin(), x.end());
  std::vector<double> t2(t);
  t2.insert(t2.end(), t.begin(), t.end());

  auto grads_for = [&](const std::vector<double>& xin, const std::vector<double>& tin,
                       int b) {
    Workspace<double> ws;
    forward(plan, params, xin.data(), b, Mode::train, nullptr, ws);
    std::vector<double> dLdy(tin.size());
    (void)bce_loss(tin.data(), ws.act.back().data(), b, plan.output_dim, dLdy.data());
    ParamSet<double> g = make_params<double>(plan);
    backward(plan, params, ws, dLdy.data(), g);
    return g;
  };

  const ParamSet<double> g1 = grads_for(x, t, batch);
  const ParamSet<double> g2 = grads_for(x2, t2, 2 * batch);
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    if (!plan.tensors[i].learnable) continue;
    for (std::size_t k = 0; k < g1.t[i].size(); ++k) {
      const double a = 2.0 * g1.t[i][k], b = g2.t[i][k];
      CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)));
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  GradcheckSetup gc;

  std::vector<double> dLdy;
  const double base_lib = gc.loss(gc.params, &dLdy);
  const double base_ref = gc.loss(gc.params);
  CHECK(std::fabs(base_lib - base_ref) <= 1e-9 * base_ref);

  Rng fwd_rng(gc.drop_seed);
  Workspace<double> ws;
  forward(gc.plan, gc.params, gc.input.data(), gc.batch, Mode::train, &fwd_rng, ws);
  ParamSet<double> grads = make_params<double>(gc.plan);
  backward(gc.plan, gc.params, ws, dLdy.data(), grads);

  // h balances truncation (h^2, dominates above 1e-4) against roundoff in the
  // finite differences; at 1e-4 both sit near 1e-6 relative, well under 1e-5
  const double h = 1e-4;
  Rng pick(31);
  double max_rel = 0.0;
  int checked = 0;
  for (std::size_t i = 0; i < gc.plan.tensors.size(); ++i) {
    if (!gc.plan.tensors[i].learnable) continue;
    const std::size_t n = gc.params.t[i].size();
    const std::size_t coords = std::min(n, std::size_t(80));
    for (std::size_t s = 0; s < coords; ++s) {
      const std::size_t k = pick.index(n);
      const double saved = gc.params.t[i][k];
      gc.params.t[i][k] = saved + h;
      const double lp = gc.loss(gc.params);
      gc.params.t[i][k] = saved - h;
      const double lm = gc.loss(gc.params);
      gc.params.t[i][k] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = grads.t[i][k];
      const double denom = std::max(std::fabs(analytic), std::fabs(numeric));
      // near-zero pair: finite-difference noise floor, not a real mismatch
      if (denom < 1e-6) continue;
      const double rel = std::fabs(analytic - numeric) / denom;
      max_rel = std::max(max_rel, rel);
      ++checked;
      CHECK(rel < 1e-5);
    }
  }
  INFO("max relative error ", max_rel, " over ", checked, " coordinates");
  CHECK(checked >= 200);
}

TEST_CASE("fifty adam steps cut the fixed-batch loss in half") {
  Network net = make_network(toy_network_config(), 29);
  const int batch = 8;
  Rng rng(47);
  std::vector<float> x(std::size_t(batch) * 1024);
  for (auto& v : x) v = float(rng.normal());
  std::vector<float> t(std::size_t(batch) * 360);
  for (int b = 0; b < batch; ++b) {
    encode_target(rng.uniform(2200.0, 7000.0), t.data() + std::size_t(b) * 360);
  }

  AdamState state = make_adam_state(net.plan);
  ParamSet<float> grads = make_params<float>(net.plan);
  std::vector<float> dLdy(t.size());
  Rng drop(53);
  Workspace<float> ws;

  double initial = 0.0, final_loss = 0.0;
  for (int step = 0; step < 50; ++step) {
    forward(net.plan, net.params, x.data(), batch, Mode::train, &drop, ws);
    const double loss =
        bce_loss(t.data(), ws.act.back().data(), batch, 360, dLdy.data());
    if (step == 0) initial = loss;
    final_loss = loss;
    backward(net.plan, net.params, ws, dLdy.data(), grads);
    adam_step(net.plan, net.params, grads, state);
  }
  CHECK(final_loss < 0.5 * initial);
}

TEST_CASE("predict emits one row per frame and is deterministic") {
  Network net = make_network(toy_network_config(), 61);
  Audio a;
  a.sample_rate = 16000;
  for (int i = 0; i < 8000; ++i) {
    a.samples.push_back(float(0.6 * std::sin(2.0 * kPi * 440.0 * i / 16000.0)));
  }
  FrameSequence frames = frame_signal(a);
  for (std::size_t k = 0; k < frames.count; ++k) {
    normalize_frame(frames.frame(k), frames.frame_len);
  }

  const PitchTrack p1 = predict(net, frames);
  const PitchTrack p2 = predict(net, frames);
  REQUIRE(p1.time.size() == frames.count);
  CHECK(p1.time == p2.time);
  CHECK(p1.freq == p2.freq);
  CHECK(p1.conf == p2.conf);
  for (std::size_t k = 0; k < frames.count; ++k) {
    CHECK(p1.time[k] == frames.timestamp(k));
    CHECK(p1.freq[k] > 0.0);
    CHECK(p1.conf[k] > 0.0);
    CHECK(p1.conf[k] < 1.0);
  }
}
