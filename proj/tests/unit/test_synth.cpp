// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "gaitradar/doppler.hpp"
#include "gaitradar/kinematics.hpp"
#include "gaitradar/synth.hpp"
#include "support.hpp"

using namespace gaitradar;
using gaitradar::test::constant_motion;
using gaitradar::test::point_scene;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson rule with n (even) intervals.
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

std::size_t peak_bin(std::span<const cplx> row) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < row.size(); ++m)
    if (std::abs(row[m]) > std::abs(row[best])) best = m;
  return best;
}

KinematicTruth short_walk(double duration = 25.0, std::uint64_t seed = 7) {
  GaitModel g;
  g.trial_duration = duration;
  return simulate_walk(g, WalkProtocol{}, seed);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("a stationary subject produces no motion and no events") {
    GaitModel g;
    g.walking_speed = 0.0;
    g.trial_duration = 10.0;
    const auto t = simulate_walk(g, WalkProtocol{}, 1);
    for (const auto& track : t.tracks)
      for (double v : track.radial_velocity) CHECK(v == 0.0);
    for (bool w : t.true_walking_mask) CHECK_FALSE(w);
    CHECK(t.true_events.hs_count() == 0);
    CHECK(t.true_events.to_count() == 0);
    CHECK(t.true_parameters.empty());
  }

  TEST_CASE("stance and swing follow the duty factor") {
    GaitModel g;
    g.stride_time = 1.1;
    g.duty_factor = 0.6;
    g.trial_duration = 30.0;
    WalkProtocol p;
    p.stride_jitter = 0.0;
    const auto t = simulate_walk(g, p, 3);
    REQUIRE(t.true_parameters.size() > 10);
    for (const auto& s : t.true_parameters.strides) {
      CHECK(s.stance_time == doctest::Approx(0.66).epsilon(1e-9));
      CHECK(s.swing_time == doctest::Approx(0.44).epsilon(1e-9));
      CHECK(s.stride_time == doctest::Approx(1.1).epsilon(1e-9));
    }
    CHECK(g.stance_time() == doctest::Approx(0.66));
    CHECK(g.swing_time() == doctest::Approx(0.44));
  }

  TEST_CASE("swing pulse displacement equals the stride length by quadrature") {
    GaitModel g;
    g.walking_speed = 1.2;
    g.stride_time = 1.1;
    CHECK(g.stride_length() == doctest::Approx(1.32));
    const double peak = g.peak_swing_speed();
    CHECK(peak / g.walking_speed == doctest::Approx(g.peak_swing_speed_ratio()));
    const double sw = g.swing_time();
    const double disp = simpson([&](double s) { return raised_cosine_velocity(peak, s) * sw; }, 0.0, 1.0, 2000);
    CHECK(std::abs(disp - 1.32) < 1e-9);

    Move m;
    m.t0 = 2.0;
    m.t1 = 2.0 + sw;
    m.from = {1.0, 0.1, 0.05};
    m.to = {2.32, 0.1, 0.05};
    const double path = simpson([&](double t) { return m.path_speed(t); }, m.t0, m.t1, 2000);
    CHECK(std::abs(path - 1.32) < 1e-9);
    CHECK(m.path_position(m.t1) == doctest::Approx(1.32));
    CHECK(m.path_speed(m.t0 + 0.5 * sw) == doctest::Approx(peak));
  }

  TEST_CASE("models whose swing would alias are rejected") {
    GaitModel g;
    g.walking_speed = 1.2;  // peak foot speed 6 m/s > 5.14 m/s
    g.trial_duration = 20.0;
    CHECK_THROWS_AS(simulate_walk(g, WalkProtocol{}, 1), InvalidArgument);
    GaitModel bad;
    bad.duty_factor = 0.8;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }

  TEST_CASE("cruise speed solver closes the distance") {
    for (double phase : {0.0, 1.0, 2.5}) {
      Move m;
      m.kind = Move::Kind::Cruise;
      m.t0 = 1.0;
      m.t1 = 9.3;
      m.from = {0.5, 0.0, 1.0};
      m.to = {8.1, 0.0, 1.0};
      m.ramp = 0.55;
      m.bob_amplitude = 0.05;
      m.bob_omega = 2.0 * kPi * 2.0 / 1.1;
      m.bob_phase = phase;
      m.cruise_speed = solve_cruise_speed(7.6, 8.3, m.ramp, m.bob_amplitude, m.bob_omega, m.bob_phase);
      CHECK(m.path_position(m.t1 - 1e-12) == doctest::Approx(7.6).epsilon(1e-9));
      // The bob may start with a step in speed, so integrate piecewise.
      auto speed = [&](double t) { return m.path_speed(t); };
      const double e = 1e-12;
      const double integral = simpson(speed, m.t0, m.t0 + m.ramp - e, 2000) +
                              simpson(speed, m.t0 + m.ramp + e, m.t1 - m.ramp - e, 20000) +
                              simpson(speed, m.t1 - m.ramp + e, m.t1, 2000);
      CHECK(integral == doctest::Approx(7.6).epsilon(1e-7));
    }
  }

  TEST_CASE("ranges come from 3-D geometry and merged feet follow the faster foot") {
    const auto t = short_walk();
    const Point3 radar = WalkProtocol{}.radar_position;
    for (std::size_t i = 0; i < t.time.size(); i += 7) {
      for (const auto& track : t.tracks) CHECK(track.range[i] == doctest::Approx(distance(track.position[i], radar)));
      const double sl = std::abs(t.tracks[1].radial_velocity[i]);
      const double sr = std::abs(t.tracks[2].radial_velocity[i]);
      CHECK(std::abs(t.merged_feet.velocity[i]) == doctest::Approx(std::max(sl, sr)).epsilon(1e-12));
    }
  }

  TEST_CASE("true events alternate and mark swing boundaries") {
    const auto t = short_walk();
    CHECK_NOTHROW(t.true_events.validate());
    REQUIRE(t.true_events.hs_count() > 10);
    const auto& kin = *t.kinematics;
    auto foot_speed = [&](double time) {
      const Point3 a = kin.velocity(Body::LeftFoot, time), b = kin.velocity(Body::RightFoot, time);
      return std::array<double, 2>{std::hypot(a.x, a.y, a.z), std::hypot(b.x, b.y, b.z)};
    };
    for (double hs : t.true_events.hs_times) {
      // Exactly one foot is moving just before a heel strike; it has stopped after.
      const auto before = foot_speed(hs - 1e-3);
      const auto after = foot_speed(hs + 1e-6);
      CHECK((before[0] > 0.0) != (before[1] > 0.0));
      CHECK(after[before[0] > 0.0 ? 0 : 1] == 0.0);
    }
    for (double to : t.true_events.to_times) {
      const auto before = foot_speed(to - 1e-6);
      const auto after = foot_speed(to + 1e-3);
      CHECK(((after[0] > 0.0 && before[0] == 0.0) || (after[1] > 0.0 && before[1] == 0.0)));
    }
  }

  TEST_CASE("stance plus swing equals stride for every true stride") {
    const auto t = short_walk(75.0, 11);
    REQUIRE(t.true_parameters.size() > 30);
    for (const auto& s : t.true_parameters.strides)
      CHECK(std::abs(s.stance_time + s.swing_time - s.stride_time) <= 4 * std::numeric_limits<double>::epsilon() * s.stride_time);
  }

  TEST_CASE("walking mask covers the traversals and the turn splits them") {
    const auto t = short_walk(25.0, 5);
    REQUIRE(t.walking_intervals.size() == 2);
    CHECK(t.walking_intervals[1].begin - t.walking_intervals[0].end == doctest::Approx(GaitModel{}.turn_duration));
    for (std::size_t i = 0; i < t.time.size(); ++i) {
      bool inside = false;
      for (const auto& iv : t.walking_intervals) inside = inside || (t.time[i] >= iv.begin && t.time[i] <= iv.end);
      CHECK(t.true_walking_mask[i] == inside);
    }
  }

  TEST_CASE("the torso keeps pace with the feet") {
    const auto t = short_walk(25.0, 9);
    const auto& kin = *t.kinematics;
    const auto& ev = t.true_events;
    // Between the second and the second-to-last heel strike of a traversal the
    // torso advances as far as the landing feet.
    std::size_t first = 0;
    while (first < ev.hs_count() && ev.hs_segments[first] == ev.hs_segments[0]) ++first;
    REQUIRE(first > 6);
    const double t0 = ev.hs_times[1], t1 = ev.hs_times[first - 2];
    const double torso = kin.position(Body::Torso, t1).x - kin.position(Body::Torso, t0).x;
    const double feet = 0.5 * (kin.position(Body::LeftFoot, t1).x + kin.position(Body::RightFoot, t1).x) -
                        0.5 * (kin.position(Body::LeftFoot, t0).x + kin.position(Body::RightFoot, t0).x);
    CHECK(torso == doctest::Approx(feet).epsilon(0.03));
  }

  TEST_CASE("simulation is deterministic under a seed") {
    const auto a = short_walk(25.0, 21), b = short_walk(25.0, 21), c = short_walk(25.0, 22);
    CHECK(a.true_events.hs_times == b.true_events.hs_times);
    CHECK(a.merged_feet.velocity == b.merged_feet.velocity);
    CHECK(a.true_events.hs_times != c.true_events.hs_times);
  }

  TEST_CASE("hann kernel matches the transform of a Hann window") {
    for (double u : {0.0, 0.3, 0.999, 1.0, 1.5, 2.0, 2.7, -3.2}) {
      const double ft =
          simpson([&](double x) { return (1.0 + std::cos(2.0 * kPi * x)) * std::cos(2.0 * kPi * u * x); }, -0.5, 0.5,
                  4000);
      CHECK(hann_kernel(u) == doctest::Approx(ft).epsilon(1e-9));
    }
    CHECK(hann_kernel(0.0) == 1.0);
    CHECK(std::abs(hann_kernel(3.0)) < 1e-12);
  }

  TEST_CASE("static scatterer gives identical rows peaking at its range") {
    const auto scene = point_scene({4.0, 0.5, 1.0}, {}, 0.5);
    for (auto rc : {RadarConfig::uwb(), RadarConfig::fmcw()}) {
      const auto p = synthesize(scene, rc, NoiseModel::noiseless(), 1);
      for (std::size_t n = 1; n < p.slow_samples(); ++n)
        for (std::size_t m = 0; m < p.range_bins(); ++m) REQUIRE(p(n, m) == p(0, m));
      // 4.0 m lies on the edge between bins 79 and 80.
      const std::size_t k = peak_bin(p.row(0));
      CHECK((k == 79 || k == 80));
      CHECK(std::abs(p(0, 79)) == doctest::Approx(std::abs(p(0, 80))).epsilon(1e-12));
    }
  }

  TEST_CASE("amplitude falls with the square of range") {
    const auto rc = RadarConfig::uwb();
    const double s = rc.uwb_pulse_width;
    auto amplitude = [&](double r) {
      const auto p = synthesize(point_scene({r, 0.5, 1.0}, {}, 0.01), rc, NoiseModel::noiseless(), 1);
      const std::size_t k = peak_bin(p.row(0));
      const double off = (k + 0.5) * rc.range_resolution - r;
      return std::abs(p(0, k)) / std::exp(-off * off / (2.0 * s * s));
    };
    CHECK(amplitude(2.0) / amplitude(4.0) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(amplitude(1.3) / amplitude(2.6) == doctest::Approx(4.0).epsilon(1e-9));
  }

  TEST_CASE("receding scatterer: phase slope and Doppler velocity") {
    const auto scene = point_scene({2.0, 0.5, 1.0}, {constant_motion({2.0, 0.5, 1.0}, {6.0, 0.5, 1.0}, 0.0, 4.0)}, 3.0);
    for (auto rc : {RadarConfig::uwb(), RadarConfig::fmcw()}) {
      const auto p = synthesize(scene, rc, NoiseModel::noiseless(), 1);
      const double dt = 1.0 / rc.slow_time_rate;
      const double expect = wrap(phase_sign(rc.modality) * 4.0 * kPi * 1.0 * dt / rc.wavelength);
      for (std::size_t n : {100u, 1000u, 1400u}) {
        const std::size_t k = peak_bin(p.row(n));
        CHECK(wrap(std::arg(p(n + 1, k)) - std::arg(p(n, k))) == doctest::Approx(expect).epsilon(1e-6));
      }
      const auto cube = build_rdt(p, StftConfig{});
      const std::size_t f = cube.frame_count() / 2;
      const auto tp = torso_from_frame(cube.frame(f), cube.range_axis, cube.velocity_axis);
      CHECK(tp.velocity == doctest::Approx(1.0).epsilon(0.02));
      CHECK(tp.range == doctest::Approx(2.0 + cube.frame_times[f]).epsilon(0.01));
    }
  }

  TEST_CASE("noise level follows the SNR definition") {
    const auto scene = point_scene({2.0, 0.5, 1.0}, {}, 2.0);
    NoiseModel noise;
    noise.snr_db = 20.0;
    const auto rc = RadarConfig::uwb();
    const auto p = synthesize(scene, rc, noise, 5);
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.slow_samples(); ++i)
      for (std::size_t m = 120; m < p.range_bins(); ++m, ++n) ss += std::norm(p(i, m));
    const double expect = 1.0 / (4.5 * 4.5) / 10.0;
    CHECK(std::sqrt(ss / n) == doctest::Approx(expect).epsilon(0.01));
  }

  TEST_CASE("trigger latency shifts the slow-time clock") {
    const auto t = short_walk(12.0, 2);
    const auto rc = RadarConfig::uwb();
    const auto a = synthesize(t, rc, NoiseModel::noiseless(), 1, 0.0);
    const auto b = synthesize(t, rc, NoiseModel::noiseless(), 1, 0.2);
    for (std::size_t n = 0; n + 100 < a.slow_samples(); n += 97)
      for (std::size_t m = 0; m < a.range_bins(); m += 3) CHECK(std::abs(b(n, m) - a(n + 100, m)) < 1e-9);
  }

  TEST_CASE("scatterers beyond the maximum range are rejected") {
    const auto scene = point_scene({9.5, 0.5, 1.0}, {}, 0.1);
    CHECK_THROWS_AS(synthesize(scene, RadarConfig::uwb(), NoiseModel::noiseless(), 1), InvalidArgument);
    auto wrong = RadarConfig::fmcw();
    CHECK_THROWS_AS(synthesize_uwb(point_scene({2.0, 0.5, 1.0}, {}, 0.1), wrong, NoiseModel::noiseless(), 1),
                    InvalidArgument);
  }

  TEST_CASE("truth sidecar round trip") {
    const auto t = short_walk(25.0, 4);
    const auto dir = gaitradar::test::scratch_dir("sidecar");
    write_truth_sidecar(dir / "truth.json", t);
    const auto r = read_truth_sidecar(dir / "truth.json");
    CHECK(r.true_events.hs_times == t.true_events.hs_times);
    CHECK(r.true_events.to_ranges == t.true_events.to_ranges);
    CHECK(r.true_events.hs_segments == t.true_events.hs_segments);
    REQUIRE(r.true_parameters.size() == t.true_parameters.size());
    for (std::size_t i = 0; i < r.true_parameters.size(); ++i)
      CHECK(r.true_parameters.strides[i].stance_time == t.true_parameters.strides[i].stance_time);
    CHECK(r.true_walking_mask == t.true_walking_mask);
    CHECK(r.merged_feet.velocity == t.merged_feet.velocity);
    CHECK(r.torso.range == t.torso.range);
    REQUIRE(r.walking_intervals.size() == t.walking_intervals.size());
    CHECK(r.walking_intervals[0].end == t.walking_intervals[0].end);
    CHECK_FALSE(r.kinematics);
    CHECK_THROWS_AS(synthesize(r, RadarConfig::uwb(), NoiseModel::noiseless(), 1), InvalidArgument);
  }
}
