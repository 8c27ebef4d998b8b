// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gaitradar {

namespace {

constexpr double kPi = std::numbers::pi;

// Direct form II transposed, state carried in z.
void run_section(const Biquad& s, std::span<cplx> x, cplx z1, cplx z2) {
  for (auto& v : x) {
    const cplx in = v;
    const cplx out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    v = out;
  }
}

// Steady-state state of one section for a unit step, and its DC gain.
void step_state(const Biquad& s, double& z1, double& z2, double& dc) {
  const double den = 1.0 + s.a1 + s.a2;
  dc = (s.b0 + s.b1 + s.b2) / den;
  z2 = s.b2 - s.a2 * dc;
  z1 = s.b1 - s.a1 * dc + z2;
}

void run_cascade(std::span<const Biquad> sections, std::span<cplx> x) {
  if (x.empty()) return;
  cplx level = x[0];
  for (const auto& s : sections) {
    double z1, z2, dc;
    step_state(s, z1, z2, dc);
    run_section(s, x, z1 * level, z2 * level);
    level *= dc;
  }
}

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

void ClutterFilterConfig::validate(double slow_time_rate) const {
  auto fail = [](const std::string& m) { throw InvalidArgument("ClutterFilterConfig: " + m); };
  if (!(highpass_cutoff > 0.0 && highpass_cutoff < slow_time_rate / 2.0))
    fail("highpass_cutoff must lie in (0, slow_time_rate / 2)");
  if (highpass_order < 1 || highpass_order > 16) fail("highpass_order must lie in [1, 16]");
  if (!(ema_alpha_min > 0.0 && ema_alpha_min <= ema_alpha_max && ema_alpha_max < 1.0))
    fail("need 0 < ema_alpha_min <= ema_alpha_max < 1");
  if (!(ema_adapt_gain >= 0.0)) fail("ema_adapt_gain must be >= 0");
  if (!(ema_scale_release >= 0.0 && ema_scale_release < 1.0)) fail("ema_scale_release must lie in [0, 1)");
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate) {
  if (order < 1) throw InvalidArgument("butterworth_highpass: order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0))
    throw InvalidArgument("butterworth_highpass: cutoff must lie in (0, sample_rate / 2)");
  const double k = 2.0 * sample_rate;
  const double wc = k * std::tan(kPi * cutoff_hz / sample_rate);
  const double k2 = k * k, w2 = wc * wc;
  std::vector<Biquad> out;
  for (int i = 0; i < order / 2; ++i) {
    // Prototype pole pair at angle theta; s -> wc / s gives s^2 / (s^2 + a s + wc^2).
    const double theta = kPi * (2.0 * i + order + 1) / (2.0 * order);
    const double a = -2.0 * std::cos(theta) * wc;
    const double a0 = k2 + a * k + w2;
    Biquad s;
    s.b0 = k2 / a0;
    s.b1 = -2.0 * k2 / a0;
    s.b2 = k2 / a0;
    s.a1 = (2.0 * w2 - 2.0 * k2) / a0;
    s.a2 = (k2 - a * k + w2) / a0;
    out.push_back(s);
  }
  if (order % 2 == 1) {
    const double a0 = k + wc;
    Biquad s;
    s.b0 = k / a0;
    s.b1 = -k / a0;
    s.a1 = (wc - k) / a0;
    out.push_back(s);
  }
  return out;
}

std::complex<double> frequency_response(std::span<const Biquad> sections, double omega) {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

std::size_t highpass_min_samples(int order) { return 3 * static_cast<std::size_t>(order) + 1; }

void filtfilt(std::span<const Biquad> sections, std::span<cplx> x) {
  const std::size_t n = x.size();
  const std::size_t order = 2 * sections.size();
  if (n < 2) return;
  const std::size_t pad = std::min(3 * (order + 1), n - 1);
  std::vector<cplx> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n),
            x.begin());
}

void adaptive_ema(std::span<cplx> x, const ClutterFilterConfig& cfg) {
  if (x.empty()) return;
  const double span = cfg.ema_alpha_max - cfg.ema_alpha_min;
  cplx c = x[0];
  double scale = 0.0;
  for (auto& v : x) {
    const cplx d = v - c;
    const double dev = std::sqrt(d.real() * d.real() + d.imag() * d.imag());
    scale = std::max(dev, cfg.ema_scale_release * scale);
    const double ratio = scale > 0.0 ? dev / scale : 0.0;
    const double alpha = cfg.ema_alpha_min + span * logistic(cfg.ema_adapt_gain * (ratio - 1.0));
    c = alpha * c + (1.0 - alpha) * v;
    v -= c;
  }
}

namespace {

void check_length(const RangeProfileMatrix& p, const ClutterFilterConfig& cfg) {
  const std::size_t need = highpass_min_samples(cfg.highpass_order);
  if (p.slow_samples() < need) {
    std::ostringstream os;
    os << "highpass_slow_time: recording has " << p.slow_samples() << " slow-time samples; at least " << need
       << " are needed for a order-" << cfg.highpass_order << " filter";
    throw InvalidArgument(os.str());
  }
}

// Columns are gathered a few at a time so each sweep over the row-major matrix
// uses whole cache lines.
template <typename Fn>
void for_each_column(RangeProfileMatrix& p, Fn fn) {
  constexpr std::size_t kBlock = 8;
  const std::size_t n = p.slow_samples();
  std::vector<std::vector<cplx>> cols(kBlock, std::vector<cplx>(n));
  for (std::size_t m0 = 0; m0 < p.range_bins(); m0 += kBlock) {
    const std::size_t w = std::min(kBlock, p.range_bins() - m0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = p.row(i);
      for (std::size_t j = 0; j < w; ++j) cols[j][i] = row[m0 + j];
    }
    for (std::size_t j = 0; j < w; ++j) fn(std::span<cplx>(cols[j]));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = p.row(i);
      for (std::size_t j = 0; j < w; ++j) row[m0 + j] = cols[j][i];
    }
  }
}

}  // namespace

RangeProfileMatrix highpass_slow_time(const RangeProfileMatrix& profiles, const ClutterFilterConfig& cfg) {
  cfg.validate(profiles.config().slow_time_rate);
  check_length(profiles, cfg);
  const auto sos = butterworth_highpass(cfg.highpass_order, cfg.highpass_cutoff, profiles.config().slow_time_rate);
  RangeProfileMatrix out = profiles;
  for_each_column(out, [&](std::span<cplx> c) { filtfilt(sos, c); });
  return out;
}

RangeProfileMatrix adaptive_ema_clutter(const RangeProfileMatrix& profiles, const ClutterFilterConfig& cfg) {
  cfg.validate(profiles.config().slow_time_rate);
  RangeProfileMatrix out = profiles;
  for_each_column(out, [&](std::span<cplx> c) { adaptive_ema(c, cfg); });
  return out;
}

void suppress_clutter(RangeProfileMatrix& profiles, const ClutterFilterConfig& cfg) {
  cfg.validate(profiles.config().slow_time_rate);
  check_length(profiles, cfg);
  const auto sos = butterworth_highpass(cfg.highpass_order, cfg.highpass_cutoff, profiles.config().slow_time_rate);
  for_each_column(profiles, [&](std::span<cplx> c) {
    filtfilt(sos, c);
    adaptive_ema(c, cfg);
  });
}

}  // namespace gaitradar
