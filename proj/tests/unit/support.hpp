// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

// Shared fixtures for the unit tests.

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gaitradar/kinematics.hpp"
#include "gaitradar/random.hpp"
#include "gaitradar/synth.hpp"

namespace gaitradar::test {

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gaitradar_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Truth holding one visible point (the torso slot) with the given motion;
/// the feet carry zero reflectivity.
inline KinematicTruth point_scene(const Point3& start, std::vector<Move> moves, double duration) {
  KinematicTruth t;
  t.duration = duration;
  t.reflectivity = {1.0, 0.0, 0.0};
  std::array<std::vector<Move>, kBodyCount> all;
  all[0] = std::move(moves);
  t.kinematics = std::make_shared<WalkerKinematics>(std::array<Point3, kBodyCount>{start, start, start}, all);
  return t;
}

/// Constant-speed straight motion from `from` to `to` over [t0, t1].
inline Move constant_motion(const Point3& from, const Point3& to, double t0, double t1) {
  Move m;
  m.kind = Move::Kind::Cruise;
  m.t0 = t0;
  m.t1 = t1;
  m.from = from;
  m.to = to;
  m.cruise_speed = distance(from, to) / (t1 - t0);
  return m;
}

inline std::vector<double> normal_series(Rng& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = mean + sd * rng.normal();
  return v;
}

}  // namespace gaitradar::test
