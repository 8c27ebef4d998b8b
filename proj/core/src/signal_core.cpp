// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/signal_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gaitradar {

std::string to_string(Modality m) { return m == Modality::Uwb ? "uwb" : "fmcw"; }

Modality modality_from_string(const std::string& s) {
  if (s == "uwb" || s == "UWB") return Modality::Uwb;
  if (s == "fmcw" || s == "FMCW") return Modality::Fmcw;
  throw InvalidArgument("unknown modality '" + s + "'");
}

double distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

std::size_t RadarConfig::range_bins() const {
  // Guard against 9 / 0.05 evaluating to 180.00000000000003.
  const double cells = max_range / range_resolution;
  return static_cast<std::size_t>(std::ceil(cells - 1e-9));
}

void RadarConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("RadarConfig: " + what); };
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) fail("wavelength must be positive");
  if (!(max_range > 0.0) || !std::isfinite(max_range)) fail("max_range must be positive");
  if (!(range_resolution > 0.0) || !std::isfinite(range_resolution))
    fail("range_resolution must be positive");
  if (range_resolution > max_range) fail("range_resolution exceeds max_range");
  if (!(slow_time_rate > 0.0) || !std::isfinite(slow_time_rate))
    fail("slow_time_rate must be positive");
  if (modality == Modality::Uwb && !(uwb_pulse_width > 0.0)) fail("uwb_pulse_width must be positive");
  if (modality == Modality::Fmcw && !(fmcw_window_scale > 0.0))
    fail("fmcw_window_scale must be positive");
  if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(position.z))
    fail("position must be finite");
}

RadarConfig RadarConfig::uwb() {
  RadarConfig c;
  c.modality = Modality::Uwb;
  c.wavelength = kSpeedOfLight / 7.29e9;
  c.slow_time_rate = 500.0;
  return c;
}

RadarConfig RadarConfig::fmcw() {
  RadarConfig c;
  c.modality = Modality::Fmcw;
  c.wavelength = 5.0e-3;
  c.slow_time_rate = 4120.0;
  return c;
}

RangeProfileMatrix::RangeProfileMatrix(RadarConfig config, std::size_t slow_samples, double start_time)
    : config_(std::move(config)), slow_(slow_samples), start_time_(start_time) {
  config_.validate();
  bins_ = config_.range_bins();
  samples_.assign(slow_ * bins_, cplx{});
}

RangeProfileMatrix::RangeProfileMatrix(RadarConfig config, std::size_t slow_samples,
                                       std::vector<cplx> samples, double start_time)
    : config_(std::move(config)), slow_(slow_samples), start_time_(start_time),
      samples_(std::move(samples)) {
  config_.validate();
  bins_ = config_.range_bins();
  if (samples_.size() != slow_ * bins_) {
    std::ostringstream os;
    os << "RangeProfileMatrix: expected " << slow_ * bins_ << " samples, got " << samples_.size();
    throw InvalidArgument(os.str());
  }
}

bool RangeProfileMatrix::all_finite() const {
  return std::all_of(samples_.begin(), samples_.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

void Trajectory::validate() const {
  if (range.size() != time.size() || velocity.size() != time.size())
    throw InvalidArgument("Trajectory: time, range and velocity lengths differ");
  for (std::size_t i = 1; i < time.size(); ++i) {
    if (!(time[i] > time[i - 1])) throw InvalidArgument("Trajectory: time must be strictly increasing");
  }
}

void Trajectory::validate(const RadarConfig& config) const {
  validate();
  const double vmax = config.max_velocity();
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (range[i] < 0.0 || range[i] > config.max_range)
      throw InvalidArgument("Trajectory: range outside [0, max_range]");
    if (std::abs(velocity[i]) > vmax) throw InvalidArgument("Trajectory: |velocity| exceeds max_velocity");
  }
}

double interpolate(std::span<const double> t, std::span<const double> y, double tq) {
  if (t.empty()) throw InvalidArgument("interpolate: empty series");
  if (tq <= t.front()) return y.front();
  if (tq >= t.back()) return y.back();
  const auto it = std::upper_bound(t.begin(), t.end(), tq);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double f = (tq - t[i - 1]) / (t[i] - t[i - 1]);
  return y[i - 1] + f * (y[i] - y[i - 1]);
}

std::vector<double> range_axis(const RadarConfig& config) {
  config.validate();
  const std::size_t n = config.range_bins();
  std::vector<double> axis(n);
  for (std::size_t m = 0; m < n; ++m) axis[m] = (static_cast<double>(m) + 0.5) * config.range_resolution;
  return axis;
}

std::vector<double> kaiser_window(std::size_t length, double shape_factor) {
  if (length == 0) throw InvalidArgument("kaiser_window: length must be >= 1");
  if (!(shape_factor >= 0.0)) throw InvalidArgument("kaiser_window: shape_factor must be >= 0");
  std::vector<double> w(length, 1.0);
  if (length == 1) return w;
  const double denom = std::cyl_bessel_i(0.0, shape_factor);
  const double half = static_cast<double>(length - 1) / 2.0;
  // Evaluate one half and mirror so the window is exactly symmetric.
  for (std::size_t i = 0; i < (length + 1) / 2; ++i) {
    const double x = (static_cast<double>(i) - half) / half;
    const double arg = shape_factor * std::sqrt(std::max(0.0, 1.0 - x * x));
    w[i] = std::cyl_bessel_i(0.0, arg) / denom;
    w[length - 1 - i] = w[i];
  }
  return w;
}

std::vector<double> velocity_axis(const RadarConfig& config, std::size_t n_doppler_bins) {
  if (n_doppler_bins < 2) throw InvalidArgument("velocity_axis: need at least 2 Doppler bins");
  const double step = 2.0 * config.max_velocity() / static_cast<double>(n_doppler_bins);
  const auto centre = static_cast<std::ptrdiff_t>(n_doppler_bins / 2);
  std::vector<double> axis(n_doppler_bins);
  for (std::size_t k = 0; k < n_doppler_bins; ++k)
    axis[k] = static_cast<double>(static_cast<std::ptrdiff_t>(k) - centre) * step;
  return axis;
}

}  // namespace gaitradar
