// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "gaitradar/signal_core.hpp"

namespace gaitradar {

struct ClutterFilterConfig {
  double highpass_cutoff = 0.1;  // Hz
  int highpass_order = 4;
  double ema_alpha_min = 0.90;
  double ema_alpha_max = 0.995;
  double ema_adapt_gain = 4.0;
  // Release coefficient of the running deviation scale. The scale jumps up to
  // any larger deviation at once and decays by this factor per sample.
  double ema_scale_release = 0.999;

  void validate(double slow_time_rate) const;
};

/// Second-order section with a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth high-pass (bilinear transform, prewarped cutoff) as a
/// cascade of sections. Odd orders end with a first-order section (b2 = a2 = 0).
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate);

/// Complex frequency response of a section cascade at normalised angular
/// frequency omega (rad/sample).
std::complex<double> frequency_response(std::span<const Biquad> sections, double omega);

/// Zero-phase forward-backward filtering of one series in place, with odd
/// extension padding and steady-state initial conditions.
void filtfilt(std::span<const Biquad> sections, std::span<cplx> x);

/// Minimum number of slow-time samples accepted by highpass_slow_time.
std::size_t highpass_min_samples(int order);

RangeProfileMatrix highpass_slow_time(const RangeProfileMatrix& profiles, const ClutterFilterConfig& cfg);

RangeProfileMatrix adaptive_ema_clutter(const RangeProfileMatrix& profiles, const ClutterFilterConfig& cfg);

/// Adaptive EMA over one series in place.
void adaptive_ema(std::span<cplx> x, const ClutterFilterConfig& cfg);

/// High-pass followed by the adaptive EMA, column by column, in place.
void suppress_clutter(RangeProfileMatrix& profiles, const ClutterFilterConfig& cfg);

}  // namespace gaitradar
