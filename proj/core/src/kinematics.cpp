// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gaitradar {

namespace {

constexpr double kPi = std::numbers::pi;

Point3 lerp_along(const Point3& from, const Point3& to, double distance_along) {
  const double len = distance(from, to);
  if (len == 0.0) return from;
  const double f = distance_along / len;
  return {from.x + f * (to.x - from.x), from.y + f * (to.y - from.y), from.z + f * (to.z - from.z)};
}

Point3 scaled_direction(const Point3& from, const Point3& to, double speed) {
  const double len = distance(from, to);
  if (len == 0.0) return {};
  const double f = speed / len;
  return {f * (to.x - from.x), f * (to.y - from.y), f * (to.z - from.z)};
}

}  // namespace

double raised_cosine_progress(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s - std::sin(2.0 * kPi * s) / (2.0 * kPi);
}

double raised_cosine_velocity(double peak, double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return peak * (1.0 - std::cos(2.0 * kPi * s)) / 2.0;
}

double Move::path_position(double t) const {
  const double total = distance(from, to);
  if (t <= t0) return 0.0;
  if (t >= t1) return total;
  const double dur = t1 - t0;
  const double tau = t - t0;
  if (kind == Kind::RaisedCosine) return total * raised_cosine_progress(tau / dur);

  const double tr = ramp;
  const double v = cruise_speed;
  if (tau < tr) return 0.5 * v * (tau - (tr / kPi) * std::sin(kPi * tau / tr));
  const double p1 = 0.5 * v * tr;
  const double plateau = dur - 2.0 * tr;
  auto bob = [&](double u) {
    return bob_omega > 0.0 ? -(bob_amplitude / bob_omega) * (std::cos(bob_omega * u + bob_phase) - std::cos(bob_phase))
                           : 0.0;
  };
  if (tau <= dur - tr) {
    const double u = tau - tr;
    return p1 + v * u + bob(u);
  }
  const double p2 = p1 + v * plateau + bob(plateau);
  const double u = tau - (dur - tr);
  return p2 + 0.5 * v * (u + (tr / kPi) * std::sin(kPi * u / tr));
}

double Move::path_speed(double t) const {
  if (t <= t0 || t >= t1) return 0.0;
  const double dur = t1 - t0;
  const double tau = t - t0;
  if (kind == Kind::RaisedCosine) return raised_cosine_velocity(2.0 * distance(from, to) / dur, tau / dur);

  const double tr = ramp;
  const double v = cruise_speed;
  if (tau < tr) return 0.5 * v * (1.0 - std::cos(kPi * tau / tr));
  if (tau <= dur - tr) return v + bob_amplitude * std::sin(bob_omega * (tau - tr) + bob_phase);
  const double u = tau - (dur - tr);
  return 0.5 * v * (1.0 + std::cos(kPi * u / tr));
}

double solve_cruise_speed(double distance, double duration, double ramp, double bob_amplitude, double bob_omega,
                          double bob_phase) {
  const double plateau = duration - 2.0 * ramp;
  if (plateau < 0.0) throw InvalidArgument("cruise move shorter than its two ramps");
  const double bob_term =
      bob_omega > 0.0 ? (bob_amplitude / bob_omega) * (std::cos(bob_omega * plateau + bob_phase) - std::cos(bob_phase))
                      : 0.0;
  return (distance + bob_term) / (duration - ramp);
}

WalkerKinematics::WalkerKinematics(std::array<Point3, kBodyCount> start,
                                   std::array<std::vector<Move>, kBodyCount> moves)
    : start_(start), moves_(std::move(moves)) {
  for (auto& list : moves_) {
    std::sort(list.begin(), list.end(), [](const Move& a, const Move& b) { return a.t0 < b.t0; });
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!(list[i].t1 > list[i].t0)) throw InvalidArgument("WalkerKinematics: empty move interval");
      if (i > 0 && list[i].t0 < list[i - 1].t1) throw InvalidArgument("WalkerKinematics: overlapping moves");
    }
  }
}

const Move* WalkerKinematics::active(Body b, double t, Point3& rest) const {
  const auto& list = moves_[static_cast<std::size_t>(b)];
  // Last move starting at or before t.
  auto it = std::upper_bound(list.begin(), list.end(), t, [](double v, const Move& m) { return v < m.t0; });
  if (it == list.begin()) {
    rest = start_[static_cast<std::size_t>(b)];
    return nullptr;
  }
  const Move& m = *(it - 1);
  if (t >= m.t1) {
    rest = m.to;
    return nullptr;
  }
  return &m;
}

Point3 WalkerKinematics::position(Body b, double t) const {
  Point3 rest;
  const Move* m = active(b, t, rest);
  if (m == nullptr) return rest;
  return lerp_along(m->from, m->to, m->path_position(t));
}

Point3 WalkerKinematics::velocity(Body b, double t) const {
  Point3 rest;
  const Move* m = active(b, t, rest);
  if (m == nullptr) return {};
  return scaled_direction(m->from, m->to, m->path_speed(t));
}

}  // namespace gaitradar
