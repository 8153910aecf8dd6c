// Microbenchmarks for the hot paths: FFT, YIN, network forward/train steps,
// synthesis and resampling.

#include <benchmark/benchmark.h>

#include <vector>

#include "pitchtrack/audio.hpp"
#include "pitchtrack/cents.hpp"
#include "pitchtrack/datagen.hpp"
#include "pitchtrack/fft.hpp"
#include "pitchtrack/net_config.hpp"
#include "pitchtrack/network.hpp"
#include "pitchtrack/rng.hpp"
#include "pitchtrack/yin.hpp"

namespace pt = pitchtrack;

namespace {

std::vector<float> random_frames(int count, std::uint64_t seed) {
  pt::Rng rng(seed);
  std::vector<float> x(std::size_t(count) * pt::kFrameLength);
  for (auto& v : x) v = float(rng.normal());
  for (int i = 0; i < count; ++i) {
    pt::normalize_frame(x.data() + std::size_t(i) * pt::kFrameLength, pt::kFrameLength);
  }
  return x;
}

std::vector<float> random_targets(int count, std::uint64_t seed) {
  pt::Rng rng(seed);
  std::vector<float> t(std::size_t(count) * pt::kNumBins);
  for (int i = 0; i < count; ++i) {
    pt::encode_target(rng.uniform(2200.0, 7000.0), t.data() + std::size_t(i) * pt::kNumBins);
  }
  return t;
}

void bm_rfft_2048(benchmark::State& state) {
  const auto x = random_frames(1, 11);
  for (auto _ : state) {
    auto spec = pt::rfft(x.data(), x.size(), 2048);
    benchmark::DoNotOptimize(spec.data());
  }
}

void bm_yin_frame(benchmark::State& state) {
  const auto x = random_frames(1, 12);
  for (auto _ : state) {
    const pt::YinResult r = pt::yin_pitch(x.data());
    benchmark::DoNotOptimize(r);
  }
}

void bm_forward_eval(benchmark::State& state, const pt::NetworkConfig& cfg) {
  pt::Network net = pt::make_network(cfg, 1);
  const int batch = int(state.range(0));
  const auto frames = random_frames(batch, 13);
  std::vector<float> act;
  for (auto _ : state) {
    act.clear();
    pt::forward_eval(net, frames.data(), batch, act);
    benchmark::DoNotOptimize(act.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}

void bm_toy_forward(benchmark::State& state) {
  bm_forward_eval(state, pt::toy_network_config());
}

void bm_full_forward(benchmark::State& state) {
  bm_forward_eval(state, pt::full_network_config());
}

void bm_toy_train_step(benchmark::State& state) {
  const pt::NetworkConfig cfg = pt::toy_network_config();
  pt::Network net = pt::make_network(cfg, 2);
  pt::AdamState adam = pt::make_adam_state(net.plan);
  pt::ParamSet<float> grads = pt::make_params<float>(net.plan);
  pt::Workspace<float> ws;
  pt::Rng drop_rng(3);
  const int batch = 32;
  const auto inputs = random_frames(batch, 14);
  const auto targets = random_targets(batch, 15);
  std::vector<float> dldy(std::size_t(batch) * pt::kNumBins);
  for (auto _ : state) {
    pt::forward(net.plan, net.params, inputs.data(), batch, pt::Mode::train, &drop_rng, ws);
    const double loss = pt::bce_loss(targets.data(), ws.act.back().data(), batch,
                                     pt::kNumBins, dldy.data());
    benchmark::DoNotOptimize(loss);
    pt::backward(net.plan, net.params, ws, dldy.data(), grads);
    pt::adam_step(net.plan, net.params, grads, adam);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}

void bm_synth_second(benchmark::State& state) {
  pt::TrajectoryParams traj;
  traj.kind = pt::TrajectoryKind::vibrato;
  traj.start_hz = 220.0;
  const pt::PitchTrack f0 = pt::gen_f0_trajectory(traj, 1.0, 0.01);
  const pt::TimbreSpec timbre{{1.0, 0.5, 0.25, 0.125}};
  for (auto _ : state) {
    pt::Audio a = pt::synth_harmonic(f0, timbre, pt::kModelSampleRate);
    benchmark::DoNotOptimize(a.samples.data());
  }
}

void bm_resample_second(benchmark::State& state) {
  pt::Rng rng(16);
  pt::Audio in;
  in.sample_rate = 44100;
  in.samples.resize(44100);
  for (auto& v : in.samples) v = float(rng.normal() * 0.1);
  for (auto _ : state) {
    pt::Audio out = pt::resample(in, pt::kModelSampleRate);
    benchmark::DoNotOptimize(out.samples.data());
  }
}

BENCHMARK(bm_rfft_2048);
BENCHMARK(bm_yin_frame);
BENCHMARK(bm_toy_forward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_full_forward)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_toy_train_step)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_synth_second)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_resample_second)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
