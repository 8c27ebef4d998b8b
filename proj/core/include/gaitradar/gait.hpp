// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaitradar/signal_core.hpp"

namespace gaitradar {

using Mask = std::vector<bool>;

/// Half-open run [begin, end) of true samples in a mask.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

std::vector<Segment> mask_segments(const Mask& mask);

struct WalkSegConfig {
  double window_duration = 1.0;
  double overlap_fraction = 0.95;
  double confidence_threshold = 0.75;
  // Minimum autocorrelation peak prominence, as a fraction of rho[0].
  double peak_prominence = 0.1;
  double min_segment_duration = 1.5;
  double gap_close_duration = 0.25;

  void validate() const;
};

/// Walking confidence per analysis window, stamped at window centres.
struct ConfidenceSeries {
  std::vector<double> time;
  std::vector<double> value;
  double hop_duration = 0.0;
};

struct AlignmentError : Error {
  using Error::Error;
};

struct EventConfig {
  // Minimum prominence of a heel-strike minimum, as a fraction of the
  // segment's speed range.
  double min_prominence_fraction = 0.1;
  double min_spacing = 0.4;
  // Toe-off is placed where the speed first rises this fraction of the way
  // from the heel-strike minimum to the following maximum.
  double toe_off_rise_fraction = 0.0;

  void validate() const;
};

struct GaitEvents {
  std::vector<double> hs_times;
  std::vector<double> hs_ranges;
  std::vector<int> hs_segments;
  std::vector<double> to_times;
  std::vector<double> to_ranges;
  std::vector<int> to_segments;

  std::size_t hs_count() const { return hs_times.size(); }
  std::size_t to_count() const { return to_times.size(); }

  /// Per segment: hs[k] < to[k] < hs[k+1], with at most one trailing HS.
  void validate() const;
};

struct StrideRecord {
  double start_time = 0.0;  // time of the opening heel strike
  double stride_time = 0.0;
  double stride_length = 0.0;
  double walking_speed = 0.0;
  double swing_time = 0.0;
  double stance_time = 0.0;
  int segment = 0;
};

struct GaitParameterSet {
  std::vector<StrideRecord> strides;

  std::size_t size() const { return strides.size(); }
  bool empty() const { return strides.empty(); }
};

enum class GaitParameter { StrideTime, StrideLength, WalkingSpeed, SwingTime, StanceTime };
inline constexpr GaitParameter kAllGaitParameters[] = {
    GaitParameter::StrideTime, GaitParameter::StrideLength, GaitParameter::WalkingSpeed,
    GaitParameter::SwingTime, GaitParameter::StanceTime};

std::string to_string(GaitParameter p);
double parameter_value(const StrideRecord& r, GaitParameter p);

/// Short-time autocorrelation walking confidence of the feet speed |v|.
ConfidenceSeries walking_confidence(const Trajectory& feet, const WalkSegConfig& cfg);

/// Threshold plus morphological cleanup, on the confidence time axis.
Mask walking_mask(const ConfidenceSeries& confidence, const WalkSegConfig& cfg);

/// Maps a mask defined at `mask_time` onto `target_time` (nearest sample).
Mask resample_mask(std::span<const double> mask_time, const Mask& mask, std::span<const double> target_time);

/// Lag in seconds by which `radar` trails `reference`, from the peak of the
/// normalised cross-correlation with parabolic refinement. Both series must
/// share `sample_rate`. Throws AlignmentError if the peak is below 0.2.
double align_streams(std::span<const double> radar, std::span<const double> reference, double sample_rate,
                     double max_lag);

/// Heel strikes at speed minima, toe-offs after them, inside each mask segment.
GaitEvents detect_events(const Trajectory& feet, const Mask& mask, const EventConfig& cfg = {});

/// Stride-level parameters from interleaved events; strides never cross segments.
GaitParameterSet estimate_parameters(const GaitEvents& events);

/// (estimate index, reference index) pairs.
using MatchList = std::vector<std::pair<std::size_t, std::size_t>>;

/// Pairs each reference time with the nearest unused estimate within `tolerance`.
/// Both inputs must be sorted.
MatchList match_times(std::span<const double> estimates, std::span<const double> references, double tolerance);

/// Pairs strides by start time, within half of the reference stride time.
MatchList match_strides(const GaitParameterSet& estimates, const GaitParameterSet& references);

}  // namespace gaitradar
