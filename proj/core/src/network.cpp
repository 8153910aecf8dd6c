#include "pitchtrack/network.hpp"

#include <algorithm>
#include <cmath>

#include "pitchtrack/cents.hpp"

namespace pitchtrack {

namespace {

int add_tensor(Plan& plan, std::string name, std::vector<std::int64_t> shape,
               bool learnable) {
  plan.tensors.push_back(TensorInfo{std::move(name), std::move(shape), learnable});
  return int(plan.tensors.size()) - 1;
}

}  // namespace

Plan build_plan(const NetworkConfig& cfg) {
  require(cfg.input_len >= 1, "network config: input_len must be positive");
  require(cfg.output_dim == kNumBins,
          "network config: output_dim must be 360 to match the pitch grid");

  Plan plan;
  plan.input_len = cfg.input_len;
  plan.output_dim = cfg.output_dim;

  int ch = 1;
  int len = cfg.input_len;
  int conv_i = 0;
  bool dense_seen = false;

  std::size_t li = 0;
  while (li < cfg.layers.size()) {
    const LayerConfig& l = cfg.layers[li];
    require(!dense_seen, "network config: dense-sigmoid must be the final layer");
    switch (l.kind) {
      case LayerConfig::Kind::conv1d: {
        ++conv_i;
        require(l.out_channels >= 1, "network config: conv out_channels must be >= 1");
        require(l.kernel_width >= 1, "network config: conv kernel_width must be >= 1");
        require(l.stride >= 1, "network config: conv stride must be >= 1");
        require(l.dropout_p >= 0.0f && l.dropout_p < 1.0f,
                "network config: dropout_p must be in [0, 1)");
        const std::string base = "conv" + std::to_string(conv_i);

        if (l.has_batchnorm) {
          Stage st;
          st.kind = StageKind::batchnorm;
          st.in_ch = st.out_ch = ch;
          st.in_len = st.out_len = len;
          st.gamma = add_tensor(plan, base + ".bn.gamma", {ch}, true);
          st.beta = add_tensor(plan, base + ".bn.beta", {ch}, true);
          st.rmean = add_tensor(plan, base + ".bn.running_mean", {ch}, false);
          st.rvar = add_tensor(plan, base + ".bn.running_var", {ch}, false);
          plan.stages.push_back(st);
        }

        const int out_len = (len + l.stride - 1) / l.stride;
        const int pad_total =
            std::max(0, (out_len - 1) * l.stride + l.kernel_width - len);
        if (pad_total > 0) {
          Stage st;
          st.kind = StageKind::pad;
          st.in_ch = st.out_ch = ch;
          st.in_len = len;
          st.pad_left = pad_total / 2;
          st.pad_right = pad_total - st.pad_left;
          st.out_len = len + pad_total;
          plan.stages.push_back(st);
          len += pad_total;
        }
        require(len >= l.kernel_width, "network config: input shorter than kernel");

        Stage conv;
        conv.kind = StageKind::conv;
        conv.in_ch = ch;
        conv.in_len = len;
        conv.out_ch = l.out_channels;
        conv.out_len = (len - l.kernel_width) / l.stride + 1;
        conv.width = l.kernel_width;
        conv.stride = l.stride;
        conv.weight = add_tensor(plan, base + ".kernel",
                                 {l.out_channels, ch, l.kernel_width}, true);
        conv.bias = add_tensor(plan, base + ".bias", {l.out_channels}, true);
        plan.stages.push_back(conv);
        if (conv_i == 1) {
          plan.first_conv_channels = l.out_channels;
          plan.first_conv_width = l.kernel_width;
          plan.first_conv_kernel = conv.weight;
        }
        ch = l.out_channels;
        len = conv.out_len;

        Stage relu;
        relu.kind = StageKind::relu;
        relu.in_ch = relu.out_ch = ch;
        relu.in_len = relu.out_len = len;
        plan.stages.push_back(relu);

        // per-block ordering: any maxpool that follows runs before dropout
        if (li + 1 < cfg.layers.size() &&
            cfg.layers[li + 1].kind == LayerConfig::Kind::maxpool) {
          const int pool = cfg.layers[li + 1].pool_width;
          require(pool >= 1, "network config: pool_width must be >= 1");
          require(len % pool == 0,
                  "network config: maxpool needs a divisible input length");
          Stage mp;
          mp.kind = StageKind::maxpool;
          mp.in_ch = mp.out_ch = ch;
          mp.in_len = len;
          mp.out_len = len / pool;
          mp.pool = pool;
          plan.stages.push_back(mp);
          len /= pool;
          ++li;  // consumed the maxpool layer
        }

        if (l.dropout_p > 0.0f) {
          Stage dr;
          dr.kind = StageKind::dropout;
          dr.in_ch = dr.out_ch = ch;
          dr.in_len = dr.out_len = len;
          dr.drop_p = l.dropout_p;
          plan.stages.push_back(dr);
        }
        break;
      }
      case LayerConfig::Kind::maxpool: {
        require(l.pool_width >= 1, "network config: pool_width must be >= 1");
        require(len % l.pool_width == 0,
                "network config: maxpool needs a divisible input length");
        Stage mp;
        mp.kind = StageKind::maxpool;
        mp.in_ch = mp.out_ch = ch;
        mp.in_len = len;
        mp.out_len = len / l.pool_width;
        mp.pool = l.pool_width;
        plan.stages.push_back(mp);
        len /= l.pool_width;
        break;
      }
      case LayerConfig::Kind::dense_sigmoid: {
        plan.latent = ch * len;
        Stage st;
        st.kind = StageKind::dense_sigmoid;
        st.in_ch = ch;
        st.in_len = len;
        st.out_ch = 1;
        st.out_len = cfg.output_dim;
        st.weight = add_tensor(plan, "dense.weight", {plan.latent, cfg.output_dim}, true);
        st.bias = add_tensor(plan, "dense.bias", {cfg.output_dim}, true);
        plan.stages.push_back(st);
        dense_seen = true;
        break;
      }
    }
    ++li;
  }
  require(dense_seen, "network config: must end with a dense-sigmoid layer");
  if (cfg.declared_latent > 0) {
    require(plan.latent == cfg.declared_latent,
            "network config: computed latent size " + std::to_string(plan.latent) +
                " does not match declared " + std::to_string(cfg.declared_latent),
            ErrCode::shape_mismatch);
  }
  return plan;
}

Network make_network(const NetworkConfig& cfg, std::uint64_t seed) {
  Network net;
  net.config = cfg;
  net.plan = build_plan(cfg);
  net.params = init_params<float>(net.plan, seed);
  return net;
}

AdamState make_adam_state(const Plan& plan) {
  AdamState s;
  s.m.resize(plan.tensors.size());
  s.v.resize(plan.tensors.size());
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    s.m[i].assign(std::size_t(plan.tensors[i].size()), 0.0f);
    s.v[i].assign(std::size_t(plan.tensors[i].size()), 0.0f);
  }
  return s;
}

void adam_step(const Plan& plan, ParamSet<float>& params, const ParamSet<float>& grads,
               AdamState& state, double lr) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, double(state.t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, double(state.t));
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    if (!plan.tensors[i].learnable) continue;
    float* p = params.t[i].data();
    const float* g = grads.t[i].data();
    float* m = state.m[i].data();
    float* v = state.v[i].data();
    const std::int64_t n = plan.tensors[i].size();
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
      const double gk = double(g[k]);
      const double mk = kAdamBeta1 * double(m[k]) + (1.0 - kAdamBeta1) * gk;
      const double vk = kAdamBeta2 * double(v[k]) + (1.0 - kAdamBeta2) * gk * gk;
      m[k] = float(mk);
      v[k] = float(vk);
      p[k] = float(double(p[k]) - lr * (mk / bc1) / (std::sqrt(vk / bc2) + kAdamEps));
    }
  }
}

void forward_eval(Network& net, const float* frames, int batch,
                  std::vector<float>& act_out) {
  thread_local Workspace<float> ws;
  forward(net.plan, net.params, frames, batch, Mode::eval, nullptr, ws);
  act_out = ws.act.back();
}

PitchTrack predict(Network& net, const FrameSequence& frames) {
  require(frames.frame_len == net.plan.input_len,
          "predict: frame length does not match the network input length",
          ErrCode::shape_mismatch);
  PitchTrack out;
  out.time.reserve(frames.count);
  out.freq.reserve(frames.count);
  out.conf.reserve(frames.count);

  constexpr std::size_t kBatch = 64;
  Workspace<float> ws;
  for (std::size_t start = 0; start < frames.count; start += kBatch) {
    const int b = int(std::min(kBatch, frames.count - start));
    forward(net.plan, net.params, frames.frame(start), b, Mode::eval, nullptr, ws);
    const std::vector<float>& act = ws.act.back();
    for (int i = 0; i < b; ++i) {
      const float* a = act.data() + std::size_t(i) * kNumBins;
      const auto cents = decode_activation(a);
      out.time.push_back(frames.timestamp(start + std::size_t(i)));
      out.freq.push_back(cents ? cents_to_freq(*cents) : 0.0);
      out.conf.push_back(confidence(a));
    }
  }
  return out;
}

PitchTrack predict_audio(Network& net, const Audio& audio, int hop) {
  const Audio* buf = &audio;
  Audio resampled;
  if (audio.sample_rate != kModelSampleRate) {
    resampled = resample(audio, kModelSampleRate);
    buf = &resampled;
  }
  FrameSequence frames = frame_signal(*buf, net.plan.input_len, hop);
  for (std::size_t k = 0; k < frames.count; ++k) {
    normalize_frame(frames.frame(k), frames.frame_len);
  }
  return predict(net, frames);
}

}  // namespace pitchtrack
