// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitradar {

using cplx = std::complex<double>;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or input violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class Modality : std::uint8_t { Uwb = 0, Fmcw = 1 };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

/// Sign of the carrier phase term in the range-domain signal model.
/// The impulse model carries exp(-j 4 pi R / lambda), the FMCW model exp(+j ...).
inline int phase_sign(Modality m) { return m == Modality::Uwb ? -1 : +1; }

/// World frame: x runs along the walkway, y is lateral, z is height.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

double distance(const Point3& a, const Point3& b);

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kDefaultPulseWidth = 0.05;  // sigma_r, one 5 cm range bin

struct RadarConfig {
  Modality modality = Modality::Uwb;
  double wavelength = kSpeedOfLight / 7.29e9;
  double max_range = 9.0;
  double range_resolution = 0.05;
  double slow_time_rate = 500.0;
  double uwb_pulse_width = kDefaultPulseWidth;
  // Argument scale of the FMCW window kernel, in range bins per resolution cell.
  double fmcw_window_scale = 1.0;
  Point3 position{0.0, 0.5, 1.0};

  /// Unambiguous radial velocity span, lambda * prf / 4.
  double max_velocity() const { return wavelength * slow_time_rate / 4.0; }
  std::size_t range_bins() const;

  /// Throws InvalidArgument if any invariant is violated.
  void validate() const;

  /// 7.29 GHz impulse radar at 500 Hz slow time.
  static RadarConfig uwb();
  /// 60 GHz FMCW radar (lambda = 5 mm) at 4120 Hz slow time.
  static RadarConfig fmcw();
};

/// Complex slow-time x range-bin matrix, row-major.
class RangeProfileMatrix {
 public:
  RangeProfileMatrix() = default;
  RangeProfileMatrix(RadarConfig config, std::size_t slow_samples, double start_time = 0.0);
  RangeProfileMatrix(RadarConfig config, std::size_t slow_samples, std::vector<cplx> samples,
                     double start_time = 0.0);

  const RadarConfig& config() const { return config_; }
  std::size_t slow_samples() const { return slow_; }
  std::size_t range_bins() const { return bins_; }
  double start_time() const { return start_time_; }
  double slow_time(std::size_t n) const { return start_time_ + static_cast<double>(n) / config_.slow_time_rate; }

  cplx& operator()(std::size_t n, std::size_t m) { return samples_[n * bins_ + m]; }
  const cplx& operator()(std::size_t n, std::size_t m) const { return samples_[n * bins_ + m]; }

  std::span<cplx> row(std::size_t n) { return {samples_.data() + n * bins_, bins_}; }
  std::span<const cplx> row(std::size_t n) const { return {samples_.data() + n * bins_, bins_}; }

  std::span<const cplx> samples() const { return samples_; }
  std::span<cplx> samples() { return samples_; }

  bool all_finite() const;

 private:
  RadarConfig config_{};
  std::size_t slow_ = 0;
  std::size_t bins_ = 0;
  double start_time_ = 0.0;
  std::vector<cplx> samples_;
};

/// Range and signed radial velocity (positive = receding) over time.
struct Trajectory {
  std::vector<double> time;
  std::vector<double> range;
  std::vector<double> velocity;

  std::size_t size() const { return time.size(); }
  bool empty() const { return time.empty(); }

  /// Checks equal lengths and strictly increasing time; with a config, also the
  /// range and velocity bounds.
  void validate() const;
  void validate(const RadarConfig& config) const;
};

/// Linear interpolation of (t, y) at tq; clamps outside the sampled span.
double interpolate(std::span<const double> t, std::span<const double> y, double tq);

/// Bin centers: (m + 1/2) * resolution.
std::vector<double> range_axis(const RadarConfig& config);

/// Symmetric Kaiser window I0(beta sqrt(1 - x^2)) / I0(beta), peak 1.
std::vector<double> kaiser_window(std::size_t length, double shape_factor);

/// FFT-shifted velocity axis, v_k = (k - floor(n/2)) * 2 v_max / n.
std::vector<double> velocity_axis(const RadarConfig& config, std::size_t n_doppler_bins);

}  // namespace gaitradar
