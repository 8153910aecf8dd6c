#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pitchtrack/errors.hpp"
#include "pitchtrack/net_config.hpp"
#include "pitchtrack/rng.hpp"

namespace pitchtrack {

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.99;
inline constexpr double kBceClamp = 1e-7;

enum class StageKind { batchnorm, pad, conv, relu, maxpool, dropout, dense_sigmoid };

// A network config is lowered to a flat stage list.  Each conv block runs as
// [batchnorm -> pad -> conv -> relu -> maxpool -> dropout]; the pad stage
// implements ceil(len/stride) output framing so pool widths always divide.
struct Stage {
  StageKind kind{};
  int in_ch = 0, in_len = 0, out_ch = 0, out_len = 0;
  int width = 0, stride = 0;        // conv
  int pad_left = 0, pad_right = 0;  // pad
  int pool = 0;                     // maxpool
  float drop_p = 0.0f;              // dropout
  // parameter table indices, -1 when absent
  int gamma = -1, beta = -1, rmean = -1, rvar = -1;
  int weight = -1, bias = -1;
};

struct TensorInfo {
  std::string name;
  std::vector<std::int64_t> shape;
  bool learnable = true;

  std::int64_t size() const {
    std::int64_t n = 1;
    for (const auto d : shape) n *= d;
    return n;
  }
};

struct Plan {
  int input_len = 0;
  int output_dim = 0;
  int latent = 0;
  int first_conv_channels = 0;
  int first_conv_width = 0;
  int first_conv_kernel = -1;  // tensor index of the first conv kernel
  std::vector<Stage> stages;
  std::vector<TensorInfo> tensors;

  int tensor_index(const std::string& name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (tensors[i].name == name) return int(i);
    }
    return -1;
  }
};

Plan build_plan(const NetworkConfig& cfg);

template <typename T>
struct ParamSet {
  std::vector<std::vector<T>> t;
};

template <typename T>
ParamSet<T> make_params(const Plan& plan) {
  ParamSet<T> p;
  p.t.resize(plan.tensors.size());
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    p.t[i].assign(std::size_t(plan.tensors[i].size()), T(0));
  }
  return p;
}

// Glorot-uniform weights, zero biases, identity batchnorm.
template <typename T>
ParamSet<T> init_params(const Plan& plan, std::uint64_t seed) {
  ParamSet<T> p = make_params<T>(plan);
  Rng rng(seed);
  for (std::size_t i = 0; i < plan.tensors.size(); ++i) {
    const TensorInfo& info = plan.tensors[i];
    auto& data = p.t[i];
    if (info.name.ends_with(".kernel")) {
      const auto oc = double(info.shape[0]), ic = double(info.shape[1]),
                 w = double(info.shape[2]);
      const double bound = std::sqrt(6.0 / (ic * w + oc * w));
      for (auto& v : data) v = T(rng.uniform(-bound, bound));
    } else if (info.name == "dense.weight") {
      const double bound = std::sqrt(6.0 / (double(info.shape[0]) + double(info.shape[1])));
      for (auto& v : data) v = T(rng.uniform(-bound, bound));
    } else if (info.name.ends_with(".gamma") || info.name.ends_with(".running_var")) {
      for (auto& v : data) v = T(1);
    }
    // beta, biases and running means stay zero
  }
  return p;
}

enum class Mode { train, eval };

template <typename T>
struct Workspace {
  int batch = 0;
  std::vector<std::vector<T>> act;  // act[s] feeds stage s; act.back() is the output
  std::vector<std::vector<std::int32_t>> pool_idx;
  std::vector<std::vector<std::uint8_t>> drop_mask;
  std::vector<std::vector<T>> bn_mean, bn_inv_std;
};

namespace detail {

template <typename T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

}  // namespace detail

// Forward pass over a batch; input is [batch, 1, input_len] flattened.  Train
// mode uses batch statistics (updating the running ones in params), applies
// dropout from rng, and leaves a cache in ws for backward().
template <typename T>
void forward(const Plan& plan, ParamSet<T>& params, const T* input, int batch, Mode mode,
             Rng* dropout_rng, Workspace<T>& ws) {
  require(batch >= 1, "forward: batch must be >= 1");
  const std::size_t ns = plan.stages.size();
  ws.batch = batch;
  ws.act.resize(ns + 1);
  ws.pool_idx.resize(ns);
  ws.drop_mask.resize(ns);
  ws.bn_mean.resize(ns);
  ws.bn_inv_std.resize(ns);

  ws.act[0].assign(input, input + std::size_t(batch) * plan.input_len);

  for (std::size_t s = 0; s < ns; ++s) {
    const Stage& st = plan.stages[s];
    const std::size_t in_sz = std::size_t(st.in_ch) * st.in_len;
    const std::size_t out_sz = std::size_t(st.out_ch) * st.out_len;
    const std::vector<T>& X = ws.act[s];
    std::vector<T>& Y = ws.act[s + 1];

    switch (st.kind) {
      case StageKind::batchnorm: {
        Y.resize(std::size_t(batch) * out_sz);
        const T* gamma = params.t[std::size_t(st.gamma)].data();
        const T* beta = params.t[std::size_t(st.beta)].data();
        if (mode == Mode::train) {
          require(std::int64_t(batch) * st.in_len >= 2,
                  "batchnorm: train mode needs at least 2 values per channel");
          ws.bn_mean[s].resize(std::size_t(st.in_ch));
          ws.bn_inv_std[s].resize(std::size_t(st.in_ch));
          T* rmean = params.t[std::size_t(st.rmean)].data();
          T* rvar = params.t[std::size_t(st.rvar)].data();
          const double m = double(batch) * st.in_len;
#pragma omp parallel for schedule(static)
          for (int c = 0; c < st.in_ch; ++c) {
            double sum = 0.0;
            for (int b = 0; b < batch; ++b) {
              const T* x = X.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
              for (int l = 0; l < st.in_len; ++l) sum += double(x[l]);
            }
            const double mean = sum / m;
            double sq = 0.0;
            for (int b = 0; b < batch; ++b) {
              const T* x = X.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
              for (int l = 0; l < st.in_len; ++l) {
                const double d = double(x[l]) - mean;
                sq += d * d;
              }
            }
            const double var = sq / m;
            const double inv_std = 1.0 / std::sqrt(var + kBnEps);
            ws.bn_mean[s][std::size_t(c)] = T(mean);
            ws.bn_inv_std[s][std::size_t(c)] = T(inv_std);
            rmean[c] = T(kBnMomentum * double(rmean[c]) + (1.0 - kBnMomentum) * mean);
            rvar[c] = T(kBnMomentum * double(rvar[c]) + (1.0 - kBnMomentum) * var);
            const T g = gamma[c], bt = beta[c], mu = T(mean), is = T(inv_std);
            for (int b = 0; b < batch; ++b) {
              const T* x = X.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
              T* y = Y.data() + (std::size_t(b) * st.out_ch + c) * st.out_len;
              for (int l = 0; l < st.in_len; ++l) y[l] = g * ((x[l] - mu) * is) + bt;
            }
          }
        } else {
          ws.bn_mean[s].clear();
          ws.bn_inv_std[s].clear();
          const T* rmean = params.t[std::size_t(st.rmean)].data();
          const T* rvar = params.t[std::size_t(st.rvar)].data();
#pragma omp parallel for schedule(static)
          for (int c = 0; c < st.in_ch; ++c) {
            const T mu = rmean[c];
            const T is = T(1.0 / std::sqrt(double(rvar[c]) + kBnEps));
            const T g = gamma[c], bt = beta[c];
            for (int b = 0; b < batch; ++b) {
              const T* x = X.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
              T* y = Y.data() + (std::size_t(b) * st.out_ch + c) * st.out_len;
              for (int l = 0; l < st.in_len; ++l) y[l] = g * ((x[l] - mu) * is) + bt;
            }
          }
        }
        break;
      }
      case StageKind::pad: {
        Y.assign(std::size_t(batch) * out_sz, T(0));
#pragma omp parallel for schedule(static)
        for (int b = 0; b < batch; ++b) {
          for (int c = 0; c < st.in_ch; ++c) {
            const T* x = X.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
            T* y = Y.data() + (std::size_t(b) * st.out_ch + c) * st.out_len + st.pad_left;
            for (int l = 0; l < st.in_len; ++l) y[l] = x[l];
          }
        }
        break;
      }
      case StageKind::conv: {
        Y.resize(std::size_t(batch) * out_sz);
        const T* K = params.t[std::size_t(st.weight)].data();
        const T* bias = params.t[std::size_t(st.bias)].data();
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < batch; ++b) {
          for (int oc = 0; oc < st.out_ch; ++oc) {
            const T* Xb = X.data() + std::size_t(b) * in_sz;
            T* y = Y.data() + std::size_t(b) * out_sz + std::size_t(oc) * st.out_len;
            const T bv = bias[oc];
            for (int t = 0; t < st.out_len; ++t) y[t] = bv;
            const T* krow = K + std::size_t(oc) * st.in_ch * st.width;
            for (int ic = 0; ic < st.in_ch; ++ic) {
              const T* x = Xb + std::size_t(ic) * st.in_len;
              const T* k = krow + std::size_t(ic) * st.width;
              for (int w = 0; w < st.width; ++w) {
                const T kv = k[w];
                const T* xs = x + w;
                if (st.stride == 1) {
                  for (int t = 0; t < st.out_len; ++t) y[t] += kv * xs[t];
                } else {
                  for (int t = 0; t < st.out_len; ++t) y[t] += kv * xs[std::size_t(t) * st.stride];
                }
              }
            }
          }
        }
        break;
      }
      case StageKind::relu: {
        Y.resize(std::size_t(batch) * out_sz);
        const std::size_t n = Y.size();
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < std::int64_t(n); ++i) {
          const T v = X[std::size_t(i)];
          Y[std::size_t(i)] = v > T(0) ? v : T(0);
        }
        break;
      }
      case StageKind::maxpool: {
        Y.resize(std::size_t(batch) * out_sz);
        ws.pool_idx[s].resize(Y.size());
#pragma omp parallel for schedule(static)
        for (int b = 0; b < batch; ++b) {
          for (int c = 0; c < st.in_ch; ++c) {
            const T* x = X.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
            const std::size_t yoff = (std::size_t(b) * st.out_ch + c) * st.out_len;
            for (int t = 0; t < st.out_len; ++t) {
              int best = t * st.pool;
              T bv = x[best];
              for (int j = 1; j < st.pool; ++j) {
                const int idx = t * st.pool + j;
                if (x[idx] > bv) {
                  bv = x[idx];
                  best = idx;
                }
              }
              Y[yoff + std::size_t(t)] = bv;
              ws.pool_idx[s][yoff + std::size_t(t)] = best;
            }
          }
        }
        break;
      }
      case StageKind::dropout: {
        Y.resize(std::size_t(batch) * out_sz);
        ws.drop_mask[s].clear();
        if (mode == Mode::eval || st.drop_p <= 0.0f) {
          Y = X;
          break;
        }
        require(dropout_rng != nullptr, "forward: train-mode dropout needs an rng");
        ws.drop_mask[s].resize(Y.size());
        const T scale = T(1.0 / (1.0 - double(st.drop_p)));
        const double p = double(st.drop_p);
        for (std::size_t i = 0; i < Y.size(); ++i) {
          const bool keep = dropout_rng->uniform() >= p;
          ws.drop_mask[s][i] = keep ? 1 : 0;
          Y[i] = keep ? X[i] * scale : T(0);
        }
        break;
      }
      case StageKind::dense_sigmoid: {
        Y.resize(std::size_t(batch) * plan.output_dim);
        const T* W = params.t[std::size_t(st.weight)].data();
        const T* bias = params.t[std::size_t(st.bias)].data();
        const int latent = plan.latent;
        const int out = plan.output_dim;
#pragma omp parallel for schedule(static)
        for (int b = 0; b < batch; ++b) {
          const T* x = X.data() + std::size_t(b) * latent;
          T* y = Y.data() + std::size_t(b) * out;
          for (int j = 0; j < out; ++j) y[j] = bias[j];
          for (int i = 0; i < latent; ++i) {
            const T xv = x[i];
            const T* wrow = W + std::size_t(i) * out;
            for (int j = 0; j < out; ++j) y[j] += xv * wrow[j];
          }
          for (int j = 0; j < out; ++j) y[j] = detail::sigmoid(y[j]);
        }
        break;
      }
    }
  }
}

// Summed binary cross entropy over [batch, dim] with activations clamped to
// [1e-7, 1 - 1e-7]; writes dL/dact at the clamped values into dLdy.
template <typename T>
double bce_loss(const T* target, const T* act, int batch, int dim, T* dLdy) {
  const T lo = T(kBceClamp), hi = T(1.0 - kBceClamp);
  double loss = 0.0;
  const std::size_t n = std::size_t(batch) * dim;
  for (std::size_t i = 0; i < n; ++i) {
    T y = act[i];
    if (y < lo) y = lo;
    if (y > hi) y = hi;
    const T t = target[i];
    loss -= double(t) * std::log(double(y)) + (1.0 - double(t)) * std::log(1.0 - double(y));
    if (dLdy) dLdy[i] = (y - t) / (y * (T(1) - y));
  }
  return loss;
}

// Reverse pass for a train-mode forward cache; fills grads (zeroed first)
// for every parameter tensor, including batchnorm gamma/beta and the path
// through the batch statistics.
template <typename T>
void backward(const Plan& plan, const ParamSet<T>& params, const Workspace<T>& ws,
              const T* dLdy, ParamSet<T>& grads) {
  const int batch = ws.batch;
  require(batch >= 1 && !ws.act.empty(), "backward: missing forward cache");
  for (auto& g : grads.t) std::fill(g.begin(), g.end(), T(0));

  std::vector<T> dY, dX;
  // seed with dL/dact composed with the sigmoid derivative
  {
    const std::vector<T>& yhat = ws.act.back();
    dY.resize(yhat.size());
    for (std::size_t i = 0; i < yhat.size(); ++i) {
      dY[i] = dLdy[i] * yhat[i] * (T(1) - yhat[i]);
    }
  }

  for (std::size_t si = plan.stages.size(); si-- > 0;) {
    const Stage& st = plan.stages[si];
    const std::size_t in_sz = std::size_t(st.in_ch) * st.in_len;
    const std::size_t out_sz = std::size_t(st.out_ch) * st.out_len;
    const std::vector<T>& X = ws.act[si];
    dX.assign(std::size_t(batch) * in_sz, T(0));

    switch (st.kind) {
      case StageKind::dense_sigmoid: {
        // dY here is already dL/dz
        const T* W = params.t[std::size_t(st.weight)].data();
        T* dW = grads.t[std::size_t(st.weight)].data();
        T* db = grads.t[std::size_t(st.bias)].data();
        const int latent = plan.latent;
        const int out = plan.output_dim;
        for (int b = 0; b < batch; ++b) {
          const T* dz = dY.data() + std::size_t(b) * out;
          for (int j = 0; j < out; ++j) db[j] += dz[j];
        }
#pragma omp parallel for schedule(static)
        for (int i = 0; i < latent; ++i) {
          T* dwrow = dW + std::size_t(i) * out;
          for (int b = 0; b < batch; ++b) {
            const T xv = X[std::size_t(b) * latent + std::size_t(i)];
            const T* dz = dY.data() + std::size_t(b) * out;
            for (int j = 0; j < out; ++j) dwrow[j] += xv * dz[j];
          }
        }
#pragma omp parallel for schedule(static)
        for (int b = 0; b < batch; ++b) {
          const T* dz = dY.data() + std::size_t(b) * out;
          T* dx = dX.data() + std::size_t(b) * latent;
          for (int i = 0; i < latent; ++i) {
            const T* wrow = W + std::size_t(i) * out;
            T acc = T(0);
            for (int j = 0; j < out; ++j) acc += wrow[j] * dz[j];
            dx[i] = acc;
          }
        }
        break;
      }
      case StageKind::dropout: {
        if (ws.drop_mask[si].empty()) {  // eval or p = 0: identity
          dX = dY;
          break;
        }
        const T scale = T(1.0 / (1.0 - double(st.drop_p)));
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < std::int64_t(dY.size()); ++i) {
          dX[std::size_t(i)] =
              ws.drop_mask[si][std::size_t(i)] ? dY[std::size_t(i)] * scale : T(0);
        }
        break;
      }
      case StageKind::maxpool: {
#pragma omp parallel for schedule(static)
        for (int b = 0; b < batch; ++b) {
          for (int c = 0; c < st.out_ch; ++c) {
            const std::size_t yoff = (std::size_t(b) * st.out_ch + c) * st.out_len;
            T* dx = dX.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
            for (int t = 0; t < st.out_len; ++t) {
              dx[ws.pool_idx[si][yoff + std::size_t(t)]] += dY[yoff + std::size_t(t)];
            }
          }
        }
        break;
      }
      case StageKind::relu: {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < std::int64_t(dY.size()); ++i) {
          dX[std::size_t(i)] = X[std::size_t(i)] > T(0) ? dY[std::size_t(i)] : T(0);
        }
        break;
      }
      case StageKind::conv: {
        const T* K = params.t[std::size_t(st.weight)].data();
        T* dK = grads.t[std::size_t(st.weight)].data();
        T* db = grads.t[std::size_t(st.bias)].data();
#pragma omp parallel for schedule(static)
        for (int oc = 0; oc < st.out_ch; ++oc) {
          T* dkrow = dK + std::size_t(oc) * st.in_ch * st.width;
          double bacc = 0.0;
          for (int b = 0; b < batch; ++b) {
            const T* dy = dY.data() + std::size_t(b) * out_sz + std::size_t(oc) * st.out_len;
            for (int t = 0; t < st.out_len; ++t) bacc += double(dy[t]);
            const T* Xb = X.data() + std::size_t(b) * in_sz;
            for (int ic = 0; ic < st.in_ch; ++ic) {
              const T* x = Xb + std::size_t(ic) * st.in_len;
              T* dk = dkrow + std::size_t(ic) * st.width;
              for (int w = 0; w < st.width; ++w) {
                const T* xs = x + w;
                T acc = T(0);
                if (st.stride == 1) {
                  for (int t = 0; t < st.out_len; ++t) acc += dy[t] * xs[t];
                } else {
                  for (int t = 0; t < st.out_len; ++t)
                    acc += dy[t] * xs[std::size_t(t) * st.stride];
                }
                dk[w] += acc;
              }
            }
          }
          db[oc] += T(bacc);
        }
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < batch; ++b) {
          for (int ic = 0; ic < st.in_ch; ++ic) {
            T* dx = dX.data() + (std::size_t(b) * st.in_ch + ic) * st.in_len;
            for (int oc = 0; oc < st.out_ch; ++oc) {
              const T* dy = dY.data() + std::size_t(b) * out_sz + std::size_t(oc) * st.out_len;
              const T* k = K + (std::size_t(oc) * st.in_ch + ic) * st.width;
              for (int w = 0; w < st.width; ++w) {
                const T kv = k[w];
                T* dxs = dx + w;
                if (st.stride == 1) {
                  for (int t = 0; t < st.out_len; ++t) dxs[t] += kv * dy[t];
                } else {
                  for (int t = 0; t < st.out_len; ++t)
                    dxs[std::size_t(t) * st.stride] += kv * dy[t];
                }
              }
            }
          }
        }
        break;
      }
      case StageKind::pad: {
#pragma omp parallel for schedule(static)
        for (int b = 0; b < batch; ++b) {
          for (int c = 0; c < st.in_ch; ++c) {
            const T* dy =
                dY.data() + (std::size_t(b) * st.out_ch + c) * st.out_len + st.pad_left;
            T* dx = dX.data() + (std::size_t(b) * st.in_ch + c) * st.in_len;
            for (int l = 0; l < st.in_len; ++l) dx[l] = dy[l];
          }
        }
        break;
      }
      case StageKind::batchnorm: {
        require(!ws.bn_mean[si].empty(), "backward: needs a train-mode forward cache");
        const T* gamma = params.t[std::size_t(st.gamma)].data();
        T* dgamma = grads.t[std::size_t(st.gamma)].data();
        T* dbeta = grads.t[std::size_t(st.beta)].data();
        const double m = double(batch) * st.in_len;
#pragma omp parallel for schedule(static)
        for (int c = 0; c < st.in_ch; ++c) {
          const T mu = ws.bn_mean[si][std::size_t(c)];
          const T is = ws.bn_inv_std[si][std::size_t(c)];
          double s1 = 0.0, s2 = 0.0;  // sum(dY), sum(dY * xhat)
          for (int b = 0; b < batch; ++b) {
            const std::size_t off = (std::size_t(b) * st.in_ch + c) * st.in_len;
            for (int l = 0; l < st.in_len; ++l) {
              const double dy = double(dY[off + std::size_t(l)]);
              const double xh = double((X[off + std::size_t(l)] - mu) * is);
              s1 += dy;
              s2 += dy * xh;
            }
          }
          dgamma[c] += T(s2);
          dbeta[c] += T(s1);
          const double g_is = double(gamma[c]) * double(is);
          const double mean_dy = s1 / m;
          const double mean_dyxh = s2 / m;
          for (int b = 0; b < batch; ++b) {
            const std::size_t off = (std::size_t(b) * st.in_ch + c) * st.in_len;
            for (int l = 0; l < st.in_len; ++l) {
              const double dy = double(dY[off + std::size_t(l)]);
              const double xh = double((X[off + std::size_t(l)] - mu) * is);
              dX[off + std::size_t(l)] = T(g_is * (dy - mean_dy - xh * mean_dyxh));
            }
          }
        }
        break;
      }
    }
    dY.swap(dX);
  }
}

}  // namespace pitchtrack
