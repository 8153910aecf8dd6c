#pragma once

#include <cstdint>
#include <vector>

#include "pitchtrack/audio.hpp"
#include "pitchtrack/engine.hpp"
#include "pitchtrack/pitch_track.hpp"

namespace pitchtrack {

inline constexpr double kLearningRate = 2e-4;
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct Network {
  NetworkConfig config;
  Plan plan;
  ParamSet<float> params;
};

Network make_network(const NetworkConfig& cfg, std::uint64_t seed);

struct AdamState {
  std::int64_t t = 0;
  std::vector<std::vector<float>> m, v;
};

AdamState make_adam_state(const Plan& plan);

// Bias-corrected update: th -= lr * m_hat / (sqrt(v_hat) + eps).  Running
// batchnorm statistics are not touched.
void adam_step(const Plan& plan, ParamSet<float>& params, const ParamSet<float>& grads,
               AdamState& state, double lr = kLearningRate);

// Eval-mode activations for a batch of normalized frames; output is
// [batch, 360] appended into act_out.
void forward_eval(Network& net, const float* frames, int batch,
                  std::vector<float>& act_out);

// Per frame: eval forward -> weighted-average decode -> Hz; confidence is the
// max activation.  Frames must already be normalized.
PitchTrack predict(Network& net, const FrameSequence& frames);

// Frame + normalize + predict, resampling to 16 kHz when needed.
PitchTrack predict_audio(Network& net, const Audio& audio, int hop = kDefaultHop);

}  // namespace pitchtrack
