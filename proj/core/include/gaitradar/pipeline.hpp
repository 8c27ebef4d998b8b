// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <functional>
#include <span>

#include "gaitradar/doppler.hpp"
#include "gaitradar/gait.hpp"
#include "gaitradar/preprocess.hpp"
#include "gaitradar/signal_core.hpp"

namespace gaitradar {

/// Every tunable of the radar-to-gait chain. The same values apply to both
/// modalities.
struct PipelineConfig {
  ClutterFilterConfig clutter;
  StftConfig stft;
  NakaRushtonConfig contrast;
  EnvelopeConfig envelope;
  WalkSegConfig walkseg;
  EventConfig events;
  double torso_min_contrast = kDefaultTorsoContrast;
};

struct PipelineResult {
  Trajectory torso;
  Mask torso_low_confidence;
  Trajectory feet;  // signed upper-envelope velocity
  Mask feet_low_confidence;
  ConfidenceSeries confidence;
  Mask walking;  // on the frame times
  GaitEvents events;
  GaitParameterSet parameters;
};

/// Receives each contrast-enhanced frame (frame index, time, values).
using FrameSink = std::function<void(std::size_t, double, std::span<const double>)>;

/// Clutter suppression, RDT frames, contrast enhancement, trajectories,
/// walking segmentation, events and parameters. Consumes the matrix (the
/// clutter filters run in place).
PipelineResult run_pipeline(RangeProfileMatrix profiles, const PipelineConfig& cfg, const FrameSink& sink = {});

/// Feet speed |v| as a trajectory, for the gait stage.
Trajectory speed_of(const Trajectory& t);

}  // namespace gaitradar
