// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "gaitradar/doppler.hpp"
#include "gaitradar/gait.hpp"
#include "gaitradar/preprocess.hpp"
#include "gaitradar/random.hpp"
#include "gaitradar/stats.hpp"

namespace {

using namespace gaitradar;

RadarConfig radar_for(std::int64_t arg) { return arg == 0 ? RadarConfig::uwb() : RadarConfig::fmcw(); }

RangeProfileMatrix noise_profiles(const RadarConfig& rc, double seconds) {
  RangeProfileMatrix p(rc, static_cast<std::size_t>(seconds * rc.slow_time_rate));
  Rng rng(1);
  for (auto& v : p.samples()) v = cplx(rng.normal(), rng.normal());
  return p;
}

// One range-Doppler frame: window, FFT of every range bin, magnitudes.
void BM_RdtFrame(benchmark::State& state) {
  const auto rc = radar_for(state.range(0));
  const auto p = noise_profiles(rc, 1.0);
  RdtFrameBuilder b(p, StftConfig{});
  std::vector<double> frame(b.frame_size());
  std::size_t f = 0;
  for (auto _ : state) {
    b.compute(f, frame);
    f = (f + 1) % b.frame_count();
    benchmark::DoNotOptimize(frame.data());
  }
  state.SetLabel(to_string(rc.modality));
}
BENCHMARK(BM_RdtFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_NakaRushton(benchmark::State& state) {
  const auto rc = radar_for(state.range(0));
  const auto p = noise_profiles(rc, 1.0);
  RdtFrameBuilder b(p, StftConfig{});
  std::vector<double> raw(b.frame_size());
  b.compute(0, raw);
  std::vector<double> frame;
  for (auto _ : state) {
    frame = raw;
    naka_rushton_frame(frame, NakaRushtonConfig{});
    benchmark::DoNotOptimize(frame.data());
  }
  state.SetLabel(to_string(rc.modality));
}
BENCHMARK(BM_NakaRushton)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

// Clutter suppression of one second of slow time.
void BM_SuppressClutter(benchmark::State& state) {
  const auto rc = radar_for(state.range(0));
  const auto p = noise_profiles(rc, 1.0);
  for (auto _ : state) {
    auto q = p;
    suppress_clutter(q, ClutterFilterConfig{});
    benchmark::DoNotOptimize(q.samples().data());
  }
  state.SetLabel(to_string(rc.modality));
}
BENCHMARK(BM_SuppressClutter)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Walking confidence over a 75 s feet-speed trace at 100 frames/s.
void BM_WalkingConfidence(benchmark::State& state) {
  Trajectory t;
  Rng rng(3);
  for (std::size_t i = 0; i < 7500; ++i) {
    const double time = static_cast<double>(i) * 0.01;
    t.time.push_back(time);
    t.range.push_back(3.0);
    t.velocity.push_back(2.0 + 2.0 * std::sin(2.0 * 3.14159 * time / 0.55) + 0.3 * rng.normal());
  }
  for (auto _ : state) benchmark::DoNotOptimize(walking_confidence(t, WalkSegConfig{}));
}
BENCHMARK(BM_WalkingConfidence)->Unit(benchmark::kMillisecond);

void BM_Agreement(benchmark::State& state) {
  Rng rng(5);
  std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + 0.1 * rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(agreement(x, y));
}
BENCHMARK(BM_Agreement)->Arg(100)->Arg(1000);

// Exact path at n_a * n_b = 400, normal approximation above it.
void BM_MannWhitney(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal() + 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(mann_whitney_u(a, b));
}
BENCHMARK(BM_MannWhitney)->Arg(20)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
