// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gaitradar/gait.hpp"
#include "gaitradar/kinematics.hpp"
#include "gaitradar/signal_core.hpp"

namespace gaitradar {

struct GaitModel {
  double walking_speed = 0.9;
  double stride_time = 1.1;
  double duty_factor = 0.6;
  double torso_bob_amplitude = 0.05;
  double walkway_length = 8.0;
  double turn_duration = 3.0;
  double trial_duration = 75.0;

  double stride_length() const { return walking_speed * stride_time; }
  double stance_time() const { return duty_factor * stride_time; }
  double swing_time() const { return stride_time - stance_time(); }
  /// Peak of the raised-cosine swing pulse that covers one stride length.
  double peak_swing_speed() const;
  /// Peak foot speed over walking speed; fixed by the displacement constraint
  /// at 2 / (1 - duty_factor).
  double peak_swing_speed_ratio() const { return 2.0 / (1.0 - duty_factor); }

  void validate() const;
};

/// Trial timing, walkway placement and body geometry.
struct WalkProtocol {
  double initial_stand = 2.0;
  double final_stand = 1.0;
  int max_traversals = 0;  // 0: as many as fit in the trial
  double walkway_start = 0.5;
  double sample_rate = 200.0;
  double velocity_limit = 5.14;
  double stride_jitter = 0.02;
  Point3 radar_position{0.0, 0.5, 1.0};
  double torso_height = 1.0;
  double foot_height = 0.05;
  double foot_half_spacing = 0.1;
  // Relative reflectivity of each scatterer before the 1/R^2 spreading loss.
  double torso_reflectivity = 1.0;
  double foot_reflectivity = 0.5;

  void validate() const;
};

struct StaticClutter {
  double range = 0.0;
  double amplitude = 0.0;  // reflectivity relative to the torso
};

struct NoiseModel {
  double snr_db = 20.0;  // torso peak over noise RMS, at half the maximum range
  std::vector<StaticClutter> static_clutter;
  bool enabled = true;

  void validate(const RadarConfig& config) const;
  static NoiseModel noiseless() {
    NoiseModel n;
    n.enabled = false;
    return n;
  }
};

/// Per-sample position track of one scatterer.
struct ScattererTrack {
  std::vector<Point3> position;
  std::vector<double> range;
  std::vector<double> radial_velocity;
};

/// Walking interval [begin, end) on the truth clock.
struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
};

struct KinematicTruth {
  std::vector<double> time;
  std::array<ScattererTrack, kBodyCount> tracks;
  Trajectory torso;
  Trajectory merged_feet;
  GaitEvents true_events;
  GaitParameterSet true_parameters;
  Mask true_walking_mask;
  std::vector<TimeInterval> walking_intervals;
  double duration = 0.0;
  Point3 radar_position;
  std::array<double, kBodyCount> reflectivity{1.0, 0.5, 0.5};
  // Analytic motion behind the sampled tracks; empty when loaded from a sidecar.
  std::shared_ptr<const WalkerKinematics> kinematics;
};

/// Builds the walking ground truth. Throws InvalidArgument if a swing pulse
/// would exceed protocol.velocity_limit.
KinematicTruth simulate_walk(const GaitModel& model, const WalkProtocol& protocol, std::uint64_t seed);

/// Impulse-radar range profiles. `time_offset` is the truth time of radar
/// sample 0 (trigger latency).
RangeProfileMatrix synthesize_uwb(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                                  std::uint64_t seed, double time_offset = 0.0);

/// FMCW range spectra built directly from the windowed-kernel model.
RangeProfileMatrix synthesize_fmcw(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                                   std::uint64_t seed, double time_offset = 0.0);

/// Dispatches on config.modality.
RangeProfileMatrix synthesize(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                              std::uint64_t seed, double time_offset = 0.0);

/// Normalised Hann-window range kernel, sinc(u) / (1 - u^2), u in bins. W(0) = 1.
double hann_kernel(double u);

/// Ground-truth sidecar (JSON): events, strides, walking-mask run lengths and
/// the torso / merged-feet trajectories.
void write_truth_sidecar(const std::filesystem::path& path, const KinematicTruth& truth);
KinematicTruth read_truth_sidecar(const std::filesystem::path& path);

}  // namespace gaitradar
