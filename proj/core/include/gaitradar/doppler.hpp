// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "gaitradar/gait.hpp"
#include "gaitradar/signal_core.hpp"

namespace gaitradar {

struct StftConfig {
  double window_duration = 0.2;
  double overlap_fraction = 0.95;
  double kaiser_shape = 15.0;
  std::size_t fft_length = 0;  // 0: next power of two >= window samples

  std::size_t window_samples(double slow_time_rate) const;
  std::size_t hop_samples(double slow_time_rate) const;
  std::size_t fft_size(double slow_time_rate) const;
  void validate(double slow_time_rate) const;
};

struct NakaRushtonConfig {
  double exponent = 2.0;
  // Quantile of the frame's non-zero magnitudes used as the semi-saturation
  // constant. A high quantile keeps weak limb returns below saturation.
  double semi_saturation_quantile = 0.999;

  void validate() const;
};

struct EnvelopeConfig {
  double upper_percentile = 0.97;
  double lower_percentile = 0.03;
  // The noise floor is this quantile of the reverse Doppler half-plane,
  // which holds no forward motion, times noise_floor_gain.
  double noise_floor_quantile = 0.5;
  double noise_floor_gain = 2.0;
  double range_gate = 0.5;  // half-width around the torso range, m

  void validate() const;
};

/// Range-Doppler frames over time; frame f is laid out [range][doppler].
struct RDTCube {
  std::vector<double> frame_times;
  std::vector<double> range_axis;
  std::vector<double> velocity_axis;
  std::vector<double> values;

  std::size_t frame_count() const { return frame_times.size(); }
  std::size_t range_bins() const { return range_axis.size(); }
  std::size_t doppler_bins() const { return velocity_axis.size(); }
  std::size_t frame_size() const { return range_bins() * doppler_bins(); }

  std::span<double> frame(std::size_t f) { return {values.data() + f * frame_size(), frame_size()}; }
  std::span<const double> frame(std::size_t f) const { return {values.data() + f * frame_size(), frame_size()}; }
  double at(std::size_t f, std::size_t m, std::size_t k) const { return values[f * frame_size() + m * doppler_bins() + k]; }
};

/// Computes range-Doppler frames one at a time, so long recordings never need
/// the whole cube in memory.
class RdtFrameBuilder {
 public:
  RdtFrameBuilder(const RangeProfileMatrix& profiles, const StftConfig& cfg);
  ~RdtFrameBuilder();
  RdtFrameBuilder(const RdtFrameBuilder&) = delete;
  RdtFrameBuilder& operator=(const RdtFrameBuilder&) = delete;

  std::size_t frame_count() const { return frames_; }
  double frame_time(std::size_t f) const;
  const std::vector<double>& range_axis() const { return range_axis_; }
  const std::vector<double>& velocity_axis() const { return velocity_axis_; }
  std::size_t frame_size() const { return range_axis_.size() * velocity_axis_.size(); }

  /// Magnitudes of frame f, scaled by 1/sqrt(fft size), into `out`. Uses an
  /// internal work buffer, so one builder serves one thread at a time.
  void compute(std::size_t f, std::span<double> out);

 private:
  struct Plan;
  const RangeProfileMatrix& profiles_;
  std::size_t window_ = 0;
  std::size_t hop_ = 0;
  std::size_t fft_ = 0;
  std::size_t frames_ = 0;
  std::vector<double> taper_;
  bool doppler_ascending_ = true;  // FFT bin order runs with the velocity axis
  std::vector<double> range_axis_;
  std::vector<double> velocity_axis_;
  std::unique_ptr<Plan> plan_;
};

RDTCube build_rdt(const RangeProfileMatrix& profiles, const StftConfig& cfg);

/// y = x^g / (x^g + s^g), s the q-quantile of the frame's nonzero values.
void naka_rushton_frame(std::span<double> frame, const NakaRushtonConfig& cfg);
RDTCube naka_rushton(const RDTCube& cube, const NakaRushtonConfig& cfg);

struct TrackPoint {
  double range = 0.0;
  double velocity = 0.0;
  bool low_confidence = false;
};

/// Peak-to-median ratio below which a frame holds no usable target.
inline constexpr double kDefaultTorsoContrast = 10.0;

/// Global maximum with parabolic refinement along range and velocity.
TrackPoint torso_from_frame(std::span<const double> frame, std::span<const double> ranges,
                            std::span<const double> velocities, double min_contrast = kDefaultTorsoContrast);

struct FeetPoint {
  double range = 0.0;
  double velocity = 0.0;        // upper envelope, signed with the torso direction
  double lower_velocity = 0.0;  // lower envelope, same sign convention
  bool low_confidence = false;
};

/// Percentile Doppler envelopes of the torso-gated spectrum.
FeetPoint feet_from_frame(std::span<const double> frame, std::span<const double> ranges,
                          std::span<const double> velocities, double torso_range, double torso_velocity,
                          const EnvelopeConfig& cfg);

struct TrackResult {
  Trajectory trajectory;
  Mask low_confidence;
};

/// Low-confidence frames carry the previous estimate.
TrackResult extract_torso_trajectory(const RDTCube& cube, double min_contrast = kDefaultTorsoContrast);
TrackResult extract_feet_trajectory(const RDTCube& cube, const Trajectory& torso, const EnvelopeConfig& cfg);

/// CSV rows (frame_time, range, velocity, magnitude), header included when asked.
void write_rdt_frame_csv(std::ostream& out, double frame_time, std::span<const double> frame,
                         std::span<const double> ranges, std::span<const double> velocities, bool header);

}  // namespace gaitradar
