// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/pipeline.hpp"

#include <cmath>

namespace gaitradar {

Trajectory speed_of(const Trajectory& t) {
  Trajectory out = t;
  for (double& v : out.velocity) v = std::abs(v);
  return out;
}

PipelineResult run_pipeline(RangeProfileMatrix profiles, const PipelineConfig& cfg, const FrameSink& sink) {
  suppress_clutter(profiles, cfg.clutter);

  RdtFrameBuilder builder(profiles, cfg.stft);
  const std::size_t frames = builder.frame_count();
  const auto& ranges = builder.range_axis();
  const auto& velocities = builder.velocity_axis();

  PipelineResult out;
  out.torso.time.resize(frames);
  out.torso.range.resize(frames);
  out.torso.velocity.resize(frames);
  out.torso_low_confidence.assign(frames, false);
  out.feet = out.torso;
  out.feet_low_confidence.assign(frames, false);

  std::vector<double> frame(builder.frame_size());
  TrackPoint torso_prev;
  FeetPoint feet_prev;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = builder.frame_time(f);
    builder.compute(f, frame);
    // The torso peak is refined on raw magnitudes; the saturating contrast
    // map would flatten the parabola.
    TrackPoint torso = torso_from_frame(frame, ranges, velocities, cfg.torso_min_contrast);
    if (torso.low_confidence) {
      out.torso_low_confidence[f] = true;
      torso.range = torso_prev.range;
      torso.velocity = torso_prev.velocity;
    }
    naka_rushton_frame(frame, cfg.contrast);
    if (sink) sink(f, t, frame);
    FeetPoint feet = feet_from_frame(frame, ranges, velocities, torso.range, torso.velocity, cfg.envelope);
    if (feet.low_confidence) {
      out.feet_low_confidence[f] = true;
      feet.range = feet_prev.range;
      feet.velocity = feet_prev.velocity;
    }
    out.torso.time[f] = t;
    out.torso.range[f] = torso.range;
    out.torso.velocity[f] = torso.velocity;
    out.feet.time[f] = t;
    out.feet.range[f] = feet.range;
    out.feet.velocity[f] = feet.velocity;
    torso_prev = torso;
    feet_prev = feet;
  }

  const Trajectory feet_speed = speed_of(out.feet);
  out.confidence = walking_confidence(feet_speed, cfg.walkseg);
  const Mask window_mask = walking_mask(out.confidence, cfg.walkseg);
  out.walking = resample_mask(out.confidence.time, window_mask, out.feet.time);
  out.events = detect_events(feet_speed, out.walking, cfg.events);
  out.parameters = estimate_parameters(out.events);
  return out;
}

}  // namespace gaitradar
