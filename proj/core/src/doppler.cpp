// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/doppler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <sstream>

#include "detail/numeric.hpp"

namespace gaitradar {

namespace {

// FFTW's planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::size_t StftConfig::window_samples(double slow_time_rate) const {
  return static_cast<std::size_t>(std::llround(window_duration * slow_time_rate));
}

std::size_t StftConfig::hop_samples(double slow_time_rate) const {
  const auto hop = std::llround(static_cast<double>(window_samples(slow_time_rate)) * (1.0 - overlap_fraction));
  return static_cast<std::size_t>(std::max<long long>(hop, 1));
}

std::size_t StftConfig::fft_size(double slow_time_rate) const {
  return fft_length != 0 ? fft_length : next_pow2(window_samples(slow_time_rate));
}

void StftConfig::validate(double slow_time_rate) const {
  auto fail = [](const std::string& m) { throw InvalidArgument("StftConfig: " + m); };
  if (!(window_duration > 0.0)) fail("window_duration must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) fail("overlap_fraction must lie in [0, 1)");
  if (!(kaiser_shape >= 0.0)) fail("kaiser_shape must be >= 0");
  if (window_samples(slow_time_rate) < 8) fail("window must span at least 8 slow-time samples");
  if (fft_length != 0 && fft_length < window_samples(slow_time_rate)) fail("fft_length shorter than the window");
}

void NakaRushtonConfig::validate() const {
  if (!(exponent > 0.0)) throw InvalidArgument("NakaRushtonConfig: exponent must be positive");
  if (!(semi_saturation_quantile > 0.0 && semi_saturation_quantile < 1.0))
    throw InvalidArgument("NakaRushtonConfig: semi_saturation_quantile must lie in (0, 1)");
}

void EnvelopeConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("EnvelopeConfig: " + m); };
  if (!(lower_percentile > 0.0 && lower_percentile <= upper_percentile && upper_percentile < 1.0))
    fail("need 0 < lower_percentile <= upper_percentile < 1");
  if (!(noise_floor_quantile >= 0.0 && noise_floor_quantile < 1.0)) fail("noise_floor_quantile must lie in [0, 1)");
  if (!(noise_floor_gain >= 0.0)) fail("noise_floor_gain must be >= 0");
  if (!(range_gate > 0.0)) fail("range_gate must be positive");
}

struct RdtFrameBuilder::Plan {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;   // [slow][range], rows past the window stay zero
  fftw_complex* out = nullptr;  // [range][doppler]
  std::vector<double> magnitude;  // one range bin in FFT order
};

RdtFrameBuilder::RdtFrameBuilder(const RangeProfileMatrix& profiles, const StftConfig& cfg) : profiles_(profiles) {
  const RadarConfig& rc = profiles.config();
  cfg.validate(rc.slow_time_rate);
  window_ = cfg.window_samples(rc.slow_time_rate);
  hop_ = cfg.hop_samples(rc.slow_time_rate);
  fft_ = cfg.fft_size(rc.slow_time_rate);
  if (profiles.slow_samples() < window_) {
    std::ostringstream os;
    os << "build_rdt: recording of " << profiles.slow_samples() << " samples is shorter than one " << window_
       << "-sample window";
    throw InvalidArgument(os.str());
  }
  frames_ = (profiles.slow_samples() - window_) / hop_ + 1;
  taper_ = kaiser_window(window_, cfg.kaiser_shape);
  range_axis_ = gaitradar::range_axis(rc);
  velocity_axis_ = gaitradar::velocity_axis(rc, fft_);

  // Positive Doppler frequency means approaching for the impulse model and
  // receding for FMCW; the map puts both on the same ascending velocity axis.
  doppler_ascending_ = phase_sign(rc.modality) > 0;

  const int bins = static_cast<int>(profiles.range_bins());
  int len = static_cast<int>(fft_);
  plan_ = std::make_unique<Plan>();
  const std::size_t cells = fft_ * profiles.range_bins();
  plan_->in = fftw_alloc_complex(cells);
  plan_->out = fftw_alloc_complex(cells);
  if (plan_->in == nullptr || plan_->out == nullptr) throw Error("build_rdt: FFT buffer allocation failed");
  {
    // Strided input keeps the per-frame copy contiguous in slow-time rows.
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_->plan = fftw_plan_many_dft(1, &len, bins, plan_->in, nullptr, bins, 1, plan_->out, nullptr, 1, len,
                                     FFTW_FORWARD, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  if (plan_->plan == nullptr) throw Error("build_rdt: FFT planning failed");
  std::fill_n(reinterpret_cast<cplx*>(plan_->in), cells, cplx{});
}

RdtFrameBuilder::~RdtFrameBuilder() {
  if (!plan_) return;
  if (plan_->plan != nullptr) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_->plan);
  }
  fftw_free(plan_->in);
  fftw_free(plan_->out);
}

double RdtFrameBuilder::frame_time(std::size_t f) const {
  const double centre = static_cast<double>(f * hop_) + 0.5 * static_cast<double>(window_ - 1);
  return profiles_.start_time() + centre / profiles_.config().slow_time_rate;
}

void RdtFrameBuilder::compute(std::size_t f, std::span<double> out) {
  const std::size_t bins = profiles_.range_bins();
  if (f >= frames_) throw InvalidArgument("RdtFrameBuilder: frame index out of range");
  if (out.size() != bins * fft_) throw InvalidArgument("RdtFrameBuilder: output span has the wrong size");
  auto* in = reinterpret_cast<cplx*>(plan_->in);
  const std::size_t n0 = f * hop_;
  for (std::size_t i = 0; i < window_; ++i) {
    const auto row = profiles_.row(n0 + i);
    const double w = taper_[i];
    cplx* dst = in + i * bins;
    for (std::size_t m = 0; m < bins; ++m) dst[m] = w * row[m];
  }
  fftw_execute(plan_->plan);
  const auto* spectra = reinterpret_cast<const cplx*>(plan_->out);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fft_));
  auto& mag = plan_->magnitude;
  mag.resize(fft_);
  const auto half = static_cast<std::ptrdiff_t>(fft_ / 2);
  for (std::size_t m = 0; m < bins; ++m) {
    const cplx* src = spectra + m * fft_;
    for (std::size_t i = 0; i < fft_; ++i) {
      const double re = src[i].real(), im = src[i].imag();
      mag[i] = scale * std::sqrt(re * re + im * im);
    }
    // FFT-shift onto the velocity axis, reversed when the phase sign is negative.
    double* dst = out.data() + m * fft_;
    if (doppler_ascending_) {
      std::rotate_copy(mag.begin(), mag.end() - half, mag.end(), dst);
    } else {
      std::reverse_copy(mag.begin(), mag.begin() + half + 1, dst);
      std::reverse_copy(mag.begin() + half + 1, mag.end(), dst + half + 1);
    }
  }
}

RDTCube build_rdt(const RangeProfileMatrix& profiles, const StftConfig& cfg) {
  RdtFrameBuilder builder(profiles, cfg);
  RDTCube cube;
  cube.range_axis = builder.range_axis();
  cube.velocity_axis = builder.velocity_axis();
  cube.frame_times.resize(builder.frame_count());
  cube.values.resize(builder.frame_count() * builder.frame_size());
  for (std::size_t f = 0; f < builder.frame_count(); ++f) {
    cube.frame_times[f] = builder.frame_time(f);
    builder.compute(f, cube.frame(f));
  }
  return cube;
}

void naka_rushton_frame(std::span<double> frame, const NakaRushtonConfig& cfg) {
  cfg.validate();
  if (std::any_of(frame.begin(), frame.end(), [](double v) { return v < 0.0; }))
    throw InvalidArgument("naka_rushton: negative magnitude");
  const double s = detail::positive_quantile(frame, cfg.semi_saturation_quantile);
  if (!(s > 0.0)) return;
  if (cfg.exponent == 2.0) {
    const double s2 = s * s;
    for (double& v : frame) {
      const double x2 = v * v;
      v = x2 / (x2 + s2);
    }
  } else {
    const double sg = std::pow(s, cfg.exponent);
    for (double& v : frame) {
      const double xg = std::pow(v, cfg.exponent);
      v = xg / (xg + sg);
    }
  }
}

RDTCube naka_rushton(const RDTCube& cube, const NakaRushtonConfig& cfg) {
  RDTCube out = cube;
  for (std::size_t f = 0; f < out.frame_count(); ++f) naka_rushton_frame(out.frame(f), cfg);
  return out;
}

TrackPoint torso_from_frame(std::span<const double> frame, std::span<const double> ranges,
                            std::span<const double> velocities, double min_contrast) {
  const std::size_t nk = velocities.size();
  const std::size_t nm = ranges.size();
  if (frame.size() != nm * nk) throw InvalidArgument("torso_from_frame: frame size does not match the axes");
  TrackPoint p;
  const auto it = std::max_element(frame.begin(), frame.end());
  const double peak = *it;
  if (!(peak > 0.0) || !(min_contrast > 0.0 ? detail::quantile_at_most(frame, 0.5, peak / min_contrast) : true)) {
    p.low_confidence = true;
    return p;
  }
  const auto idx = static_cast<std::size_t>(it - frame.begin());
  const std::size_t m = idx / nk, k = idx % nk;
  double dm = 0.0, dk = 0.0;
  if (m > 0 && m + 1 < nm) dm = detail::parabolic_offset(frame[idx - nk], peak, frame[idx + nk]);
  if (k > 0 && k + 1 < nk) dk = detail::parabolic_offset(frame[idx - 1], peak, frame[idx + 1]);
  const double dr = nm > 1 ? ranges[1] - ranges[0] : 0.0;
  const double dv = velocities[1] - velocities[0];
  p.range = ranges[m] + dm * dr;
  p.velocity = velocities[k] + dk * dv;
  return p;
}

namespace {

// |velocity| at which the cumulative sum of `energy` (ordered by |velocity|)
// reaches fraction p of its total, interpolated between bins.
double percentile_crossing(std::span<const double> speed, std::span<const double> cumulative, double p) {
  const double target = p * cumulative.back();
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    if (cumulative[j] >= target) {
      if (j == 0) return speed[0];
      const double e0 = cumulative[j - 1], e1 = cumulative[j];
      const double frac = e1 > e0 ? (target - e0) / (e1 - e0) : 1.0;
      return speed[j - 1] + frac * (speed[j] - speed[j - 1]);
    }
  }
  return speed.back();
}

}  // namespace

FeetPoint feet_from_frame(std::span<const double> frame, std::span<const double> ranges,
                          std::span<const double> velocities, double torso_range, double torso_velocity,
                          const EnvelopeConfig& cfg) {
  const std::size_t nk = velocities.size();
  const std::size_t nm = ranges.size();
  if (frame.size() != nm * nk) throw InvalidArgument("feet_from_frame: frame size does not match the axes");
  FeetPoint out;

  std::size_t m_lo = nm, m_hi = 0;
  for (std::size_t m = 0; m < nm; ++m) {
    if (std::abs(ranges[m] - torso_range) <= cfg.range_gate) {
      m_lo = std::min(m_lo, m);
      m_hi = m + 1;
    }
  }
  if (m_lo >= m_hi) {
    out.low_confidence = true;
    return out;
  }

  std::vector<double> spectrum(nk, 0.0);
  for (std::size_t m = m_lo; m < m_hi; ++m)
    for (std::size_t k = 0; k < nk; ++k) spectrum[k] += frame[m * nk + k];
  // Forward half-plane ordered by |velocity|, starting at the zero bin.
  const double sign = torso_velocity < 0.0 ? -1.0 : 1.0;
  const std::size_t zero = nk / 2;
  std::vector<double> reverse = sign > 0.0 ? std::vector<double>(spectrum.begin(), spectrum.begin() + zero)
                                            : std::vector<double>(spectrum.begin() + zero + 1, spectrum.end());
  const double floor = cfg.noise_floor_gain * detail::quantile_inplace(reverse, cfg.noise_floor_quantile);
  std::vector<std::size_t> order;
  if (sign > 0.0)
    for (std::size_t k = zero; k < nk; ++k) order.push_back(k);
  else
    for (std::size_t k = zero + 1; k-- > 0;) order.push_back(k);

  std::vector<double> speed(order.size()), cumulative(order.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    speed[j] = std::abs(velocities[order[j]]);
    acc += std::max(spectrum[order[j]] - floor, 0.0);
    cumulative[j] = acc;
  }
  if (!(acc > 0.0)) {
    out.low_confidence = true;
    return out;
  }
  const double upper = percentile_crossing(speed, cumulative, cfg.upper_percentile);
  const double lower = percentile_crossing(speed, cumulative, cfg.lower_percentile);
  out.velocity = sign * upper;
  out.lower_velocity = sign * lower;

  // Range of the fast limb: energy centroid of gated cells in the upper half
  // of the envelope band.
  const double mid = 0.5 * (lower + upper);
  const double cell_floor = floor / static_cast<double>(m_hi - m_lo);
  double wsum = 0.0, rsum = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    if (speed[j] < mid || speed[j] > upper + 1e-12) continue;
    const std::size_t k = order[j];
    for (std::size_t m = m_lo; m < m_hi; ++m) {
      const double w = std::max(frame[m * nk + k] - cell_floor, 0.0);
      wsum += w;
      rsum += w * ranges[m];
    }
  }
  out.range = wsum > 0.0 ? rsum / wsum : torso_range;
  return out;
}

TrackResult extract_torso_trajectory(const RDTCube& cube, double min_contrast) {
  if (cube.frame_count() == 0) throw InvalidArgument("extract_torso_trajectory: empty cube");
  TrackResult r;
  r.trajectory.time = cube.frame_times;
  r.trajectory.range.resize(cube.frame_count());
  r.trajectory.velocity.resize(cube.frame_count());
  r.low_confidence.assign(cube.frame_count(), false);
  TrackPoint prev;
  for (std::size_t f = 0; f < cube.frame_count(); ++f) {
    TrackPoint p = torso_from_frame(cube.frame(f), cube.range_axis, cube.velocity_axis, min_contrast);
    if (p.low_confidence) {
      r.low_confidence[f] = true;
      p.range = prev.range;
      p.velocity = prev.velocity;
    }
    r.trajectory.range[f] = p.range;
    r.trajectory.velocity[f] = p.velocity;
    prev = p;
  }
  return r;
}

TrackResult extract_feet_trajectory(const RDTCube& cube, const Trajectory& torso, const EnvelopeConfig& cfg) {
  cfg.validate();
  if (cube.frame_count() == 0) throw InvalidArgument("extract_feet_trajectory: empty cube");
  if (torso.size() != cube.frame_count())
    throw InvalidArgument("extract_feet_trajectory: torso trajectory does not match the cube frames");
  TrackResult r;
  r.trajectory.time = cube.frame_times;
  r.trajectory.range.resize(cube.frame_count());
  r.trajectory.velocity.resize(cube.frame_count());
  r.low_confidence.assign(cube.frame_count(), false);
  FeetPoint prev;
  for (std::size_t f = 0; f < cube.frame_count(); ++f) {
    FeetPoint p =
        feet_from_frame(cube.frame(f), cube.range_axis, cube.velocity_axis, torso.range[f], torso.velocity[f], cfg);
    if (p.low_confidence) {
      r.low_confidence[f] = true;
      p.range = prev.range;
      p.velocity = prev.velocity;
    }
    r.trajectory.range[f] = p.range;
    r.trajectory.velocity[f] = p.velocity;
    prev = p;
  }
  return r;
}

void write_rdt_frame_csv(std::ostream& out, double frame_time, std::span<const double> frame,
                         std::span<const double> ranges, std::span<const double> velocities, bool header) {
  if (header) out << "time_s,range_m,velocity_mps,magnitude\n";
  const auto precision = out.precision(10);
  const std::size_t nk = velocities.size();
  for (std::size_t m = 0; m < ranges.size(); ++m)
    for (std::size_t k = 0; k < nk; ++k)
      out << frame_time << ',' << ranges[m] << ',' << velocities[k] << ',' << frame[m * nk + k] << '\n';
  out.precision(precision);
}

}  // namespace gaitradar
