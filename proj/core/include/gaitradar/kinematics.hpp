// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gaitradar/signal_core.hpp"

namespace gaitradar {

enum class Body : std::size_t { Torso = 0, LeftFoot = 1, RightFoot = 2 };
inline constexpr std::size_t kBodyCount = 3;

/// Displacement of the unit raised-cosine velocity pulse after a fraction
/// s in [0, 1] of its duration: s - sin(2 pi s) / (2 pi).
double raised_cosine_progress(double s);

/// Velocity of a raised-cosine pulse with peak `peak` at fraction s.
double raised_cosine_velocity(double peak, double s);

/// One motion primitive of a body point over [t0, t1]. Positions before t0 and
/// after t1 are held at the endpoints.
struct Move {
  enum class Kind {
    // Raised-cosine velocity pulse carrying the point from `from` to `to`.
    RaisedCosine,
    // Walking-torso profile: raised-cosine ramp up over `ramp`, cruise with a
    // sinusoidal velocity modulation, ramp down over `ramp`.
    Cruise,
  };
  Kind kind = Kind::RaisedCosine;
  double t0 = 0.0;
  double t1 = 0.0;
  Point3 from;
  Point3 to;
  // Cruise parameters.
  double ramp = 0.0;
  double cruise_speed = 0.0;
  double bob_amplitude = 0.0;
  double bob_omega = 0.0;
  double bob_phase = 0.0;

  /// Progress along the straight from -> to, as a distance.
  double path_position(double t) const;
  double path_speed(double t) const;
};

/// Piecewise-analytic motion of the three scatterers, evaluable at any time.
class WalkerKinematics {
 public:
  WalkerKinematics(std::array<Point3, kBodyCount> start, std::array<std::vector<Move>, kBodyCount> moves);

  Point3 position(Body b, double t) const;
  Point3 velocity(Body b, double t) const;

  const std::vector<Move>& moves(Body b) const { return moves_[static_cast<std::size_t>(b)]; }

 private:
  const Move* active(Body b, double t, Point3& rest) const;

  std::array<Point3, kBodyCount> start_;
  std::array<std::vector<Move>, kBodyCount> moves_;
};

/// Cruise speed for which a Cruise move covers `distance` in `duration`.
double solve_cruise_speed(double distance, double duration, double ramp, double bob_amplitude, double bob_omega,
                          double bob_phase);

}  // namespace gaitradar
