// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/gait.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "detail/numeric.hpp"

namespace gaitradar {

std::vector<Segment> mask_segments(const Mask& mask) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < mask.size();) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k < mask.size() && mask[k]) ++k;
    out.push_back({i, k});
    i = k;
  }
  return out;
}

void WalkSegConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("WalkSegConfig: " + m); };
  if (!(window_duration > 0.0)) fail("window_duration must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) fail("overlap_fraction must lie in [0, 1)");
  if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0)) fail("confidence_threshold must lie in (0, 1)");
  if (!(peak_prominence >= 0.0)) fail("peak_prominence must be >= 0");
  if (!(min_segment_duration >= 0.0)) fail("min_segment_duration must be >= 0");
  if (!(gap_close_duration >= 0.0)) fail("gap_close_duration must be >= 0");
}

void EventConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("EventConfig: " + m); };
  if (!(min_prominence_fraction >= 0.0 && min_prominence_fraction < 1.0))
    fail("min_prominence_fraction must lie in [0, 1)");
  if (!(min_spacing >= 0.0)) fail("min_spacing must be >= 0");
  if (!(toe_off_rise_fraction >= 0.0 && toe_off_rise_fraction < 1.0))
    fail("toe_off_rise_fraction must lie in [0, 1)");
}

void GaitEvents::validate() const {
  if (hs_ranges.size() != hs_times.size() || hs_segments.size() != hs_times.size())
    throw InvalidArgument("GaitEvents: heel-strike vectors differ in length");
  if (to_ranges.size() != to_times.size() || to_segments.size() != to_times.size())
    throw InvalidArgument("GaitEvents: toe-off vectors differ in length");
  std::size_t h = 0, t = 0;
  while (h < hs_count()) {
    const int seg = hs_segments[h];
    std::size_t h_end = h, t_end = t;
    while (h_end < hs_count() && hs_segments[h_end] == seg) ++h_end;
    while (t_end < to_count() && to_segments[t_end] == seg) ++t_end;
    const std::size_t nh = h_end - h, nt = t_end - t;
    if (nt != nh && nt + 1 != nh) {
      std::ostringstream os;
      os << "GaitEvents: segment " << seg << " has " << nh << " heel strikes and " << nt << " toe-offs";
      throw InvalidArgument(os.str());
    }
    for (std::size_t k = 0; k < nh; ++k) {
      if (k < nt && !(hs_times[h + k] < to_times[t + k]))
        throw InvalidArgument("GaitEvents: toe-off does not follow its heel strike");
      if (k + 1 < nh && k < nt && !(to_times[t + k] < hs_times[h + k + 1]))
        throw InvalidArgument("GaitEvents: heel strike does not follow the preceding toe-off");
    }
    h = h_end;
    t = t_end;
  }
  if (t != to_count()) throw InvalidArgument("GaitEvents: toe-off without a heel strike in its segment");
}

std::string to_string(GaitParameter p) {
  switch (p) {
    case GaitParameter::StrideTime: return "stride_time";
    case GaitParameter::StrideLength: return "stride_length";
    case GaitParameter::WalkingSpeed: return "walking_speed";
    case GaitParameter::SwingTime: return "swing_time";
    case GaitParameter::StanceTime: return "stance_time";
  }
  return "unknown";
}

double parameter_value(const StrideRecord& r, GaitParameter p) {
  switch (p) {
    case GaitParameter::StrideTime: return r.stride_time;
    case GaitParameter::StrideLength: return r.stride_length;
    case GaitParameter::WalkingSpeed: return r.walking_speed;
    case GaitParameter::SwingTime: return r.swing_time;
    case GaitParameter::StanceTime: return r.stance_time;
  }
  return 0.0;
}

namespace {

double uniform_step(std::span<const double> t, const char* who) {
  if (t.size() < 2) throw InvalidArgument(std::string(who) + ": need at least two samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * std::max(1.0, dt) + 1e-3 * dt)
      throw InvalidArgument(std::string(who) + ": trajectory is not uniformly sampled");
  }
  return dt;
}

// Prominence of the local maximum at i, as in the usual peak-finding sense:
// height above the higher of the two lowest points reached before climbing to
// a higher sample (or the signal end) on either side.
double peak_prominence(std::span<const double> y, std::size_t i) {
  const double h = y[i];
  double left_min = h;
  for (std::size_t j = i; j-- > 0;) {
    if (y[j] > h) break;
    left_min = std::min(left_min, y[j]);
  }
  double right_min = h;
  for (std::size_t j = i + 1; j < y.size(); ++j) {
    if (y[j] > h) break;
    right_min = std::min(right_min, y[j]);
  }
  return h - std::max(left_min, right_min);
}

// Interior local maxima; a flat top counts once at its first sample.
std::vector<std::size_t> local_maxima(std::span<const double> y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1])) continue;
    std::size_t k = i;
    while (k + 1 < y.size() && y[k + 1] == y[i]) ++k;
    if (k + 1 < y.size() && y[k + 1] < y[i]) out.push_back(i);
    i = k;
  }
  return out;
}

}  // namespace

ConfidenceSeries walking_confidence(const Trajectory& feet, const WalkSegConfig& cfg) {
  cfg.validate();
  feet.validate();
  const double dt = uniform_step(feet.time, "walking_confidence");
  const auto w = static_cast<std::size_t>(std::llround(cfg.window_duration / dt));
  if (w < 4 || feet.size() < w) throw InvalidArgument("walking_confidence: recording shorter than one window");
  const auto hop = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(static_cast<double>(w) * (1.0 - cfg.overlap_fraction))));

  std::vector<double> speed(feet.size());
  for (std::size_t i = 0; i < speed.size(); ++i) speed[i] = std::abs(feet.velocity[i]);

  ConfidenceSeries out;
  out.hop_duration = static_cast<double>(hop) * dt;
  std::vector<double> variance;
  std::vector<double> x(w), rho(w);
  for (std::size_t s = 0; s + w <= speed.size(); s += hop) {
    const double mean = std::accumulate(speed.begin() + static_cast<std::ptrdiff_t>(s),
                                         speed.begin() + static_cast<std::ptrdiff_t>(s + w), 0.0) /
                        static_cast<double>(w);
    double energy = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      x[i] = speed[s + i] - mean;
      energy += x[i] * x[i];
    }
    double score = 0.0;
    if (energy > 0.0) {
      for (std::size_t lag = 0; lag < w; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < w; ++i) acc += x[i] * x[i + lag];
        rho[lag] = acc / energy;
      }
      double raw = 0.0;
      for (double r : rho) raw += std::max(r, 0.0);
      std::size_t peaks = 0;
      for (std::size_t i : local_maxima(rho))
        if (peak_prominence(rho, i) >= cfg.peak_prominence * rho[0]) ++peaks;
      score = raw / static_cast<double>(std::max<std::size_t>(1, peaks));
    }
    out.time.push_back(0.5 * (feet.time[s] + feet.time[s + w - 1]));
    out.value.push_back(score);
    variance.push_back(energy / static_cast<double>(w));
  }

  const double max_var = *std::max_element(variance.begin(), variance.end());
  for (std::size_t i = 0; i < variance.size(); ++i)
    if (!(variance[i] >= 1e-6 * max_var) || max_var == 0.0) out.value[i] = 0.0;
  const double top = *std::max_element(out.value.begin(), out.value.end());
  for (double& v : out.value) v = top > 0.0 ? std::clamp(v / top, 0.0, 1.0) : 0.0;
  return out;
}

Mask walking_mask(const ConfidenceSeries& confidence, const WalkSegConfig& cfg) {
  cfg.validate();
  const std::size_t n = confidence.value.size();
  Mask mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = confidence.value[i] >= cfg.confidence_threshold;
  const double hop = confidence.hop_duration;

  // Close interior gaps shorter than gap_close_duration.
  const auto segs = mask_segments(mask);
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const std::size_t gap = segs[i].begin - segs[i - 1].end;
    if (static_cast<double>(gap) * hop < cfg.gap_close_duration)
      std::fill(mask.begin() + static_cast<std::ptrdiff_t>(segs[i - 1].end),
                mask.begin() + static_cast<std::ptrdiff_t>(segs[i].begin), true);
  }
  for (const auto& s : mask_segments(mask)) {
    if (static_cast<double>(s.size()) * hop < cfg.min_segment_duration)
      std::fill(mask.begin() + static_cast<std::ptrdiff_t>(s.begin), mask.begin() + static_cast<std::ptrdiff_t>(s.end),
                false);
  }
  return mask;
}

Mask resample_mask(std::span<const double> mask_time, const Mask& mask, std::span<const double> target_time) {
  if (mask_time.size() != mask.size()) throw InvalidArgument("resample_mask: time and mask lengths differ");
  Mask out(target_time.size(), false);
  if (mask.empty()) return out;
  double spacing = 0.0;
  for (std::size_t i = 1; i < mask_time.size(); ++i) spacing = std::max(spacing, mask_time[i] - mask_time[i - 1]);
  const double tol = std::max(0.5 * spacing, 1e-12);
  for (std::size_t j = 0; j < target_time.size(); ++j) {
    const double t = target_time[j];
    auto it = std::lower_bound(mask_time.begin(), mask_time.end(), t);
    std::size_t best;
    if (it == mask_time.begin()) best = 0;
    else if (it == mask_time.end()) best = mask_time.size() - 1;
    else {
      const auto hi = static_cast<std::size_t>(it - mask_time.begin());
      best = (t - mask_time[hi - 1] <= mask_time[hi] - t) ? hi - 1 : hi;
    }
    if (std::abs(mask_time[best] - t) <= tol) out[j] = mask[best];
  }
  return out;
}

double align_streams(std::span<const double> radar, std::span<const double> reference, double sample_rate,
                     double max_lag) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("align_streams: sample_rate must be positive");
  if (radar.size() < 3 || reference.size() < 3) throw InvalidArgument("align_streams: series too short");
  const auto max_shift = static_cast<std::ptrdiff_t>(std::ceil(max_lag * sample_rate));
  const auto nr = static_cast<std::ptrdiff_t>(radar.size());
  const auto nq = static_cast<std::ptrdiff_t>(reference.size());
  const std::ptrdiff_t min_overlap = std::max<std::ptrdiff_t>(3, std::min(nr, nq) / 2);

  // corr(L) pairs radar[i] with reference[i - L] over the overlap.
  auto corr = [&](std::ptrdiff_t lag) -> double {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, lag);
    const std::ptrdiff_t hi = std::min(nr, nq + lag);
    const std::ptrdiff_t n = hi - lo;
    if (n < min_overlap) return std::numeric_limits<double>::quiet_NaN();
    double ma = 0.0, mb = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
      ma += radar[static_cast<std::size_t>(i)];
      mb += reference[static_cast<std::size_t>(i - lag)];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
      const double a = radar[static_cast<std::size_t>(i)] - ma;
      const double b = reference[static_cast<std::size_t>(i - lag)] - mb;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
  };

  std::vector<double> c(static_cast<std::size_t>(2 * max_shift + 1));
  std::ptrdiff_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t lag = -max_shift; lag <= max_shift; ++lag) {
    const double v = corr(lag);
    c[static_cast<std::size_t>(lag + max_shift)] = v;
    if (std::isfinite(v) && v > best_val) {
      best_val = v;
      best = lag;
    }
  }
  if (!(best_val >= 0.2)) {
    std::ostringstream os;
    os << "align_streams: cross-correlation peak " << best_val << " below 0.2";
    throw AlignmentError(os.str());
  }
  double frac = 0.0;
  if (best > -max_shift && best < max_shift) {
    const double a = c[static_cast<std::size_t>(best - 1 + max_shift)];
    const double b = c[static_cast<std::size_t>(best + 1 + max_shift)];
    if (std::isfinite(a) && std::isfinite(b)) frac = detail::parabolic_offset(a, best_val, b);
  }
  return (static_cast<double>(best) + frac) / sample_rate;
}

namespace {

struct Extremum {
  std::size_t index;
  double time;
};

double refined_time(std::span<const double> t, std::span<const double> y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return t[i];
  const double d = detail::parabolic_offset(y[i - 1], y[i], y[i + 1]);
  return d >= 0.0 ? t[i] + d * (t[i + 1] - t[i]) : t[i] + d * (t[i] - t[i - 1]);
}

}  // namespace

GaitEvents detect_events(const Trajectory& feet, const Mask& mask, const EventConfig& cfg) {
  cfg.validate();
  feet.validate();
  if (mask.size() != feet.size()) throw InvalidArgument("detect_events: mask length differs from the trajectory");
  GaitEvents ev;
  int segment_id = 0;
  for (const auto& seg : mask_segments(mask)) {
    const int id = segment_id++;
    if (seg.size() < 3) continue;
    const auto b = static_cast<std::ptrdiff_t>(seg.begin);
    const auto e = static_cast<std::ptrdiff_t>(seg.end);
    std::span<const double> t(feet.time.data() + b, feet.time.data() + e);
    std::span<const double> r(feet.range.data() + b, feet.range.data() + e);
    std::vector<double> speed(seg.size()), neg(seg.size());
    for (std::size_t i = 0; i < seg.size(); ++i) {
      speed[i] = std::abs(feet.velocity[seg.begin + i]);
      neg[i] = -speed[i];
    }
    const auto [lo_it, hi_it] = std::minmax_element(speed.begin(), speed.end());
    const double span = *hi_it - *lo_it;
    if (!(span > 0.0)) continue;
    const double min_prom = cfg.min_prominence_fraction * span;

    // Heel strikes: prominent minima, deepest first, with a refractory spacing.
    std::vector<std::size_t> cand;
    for (std::size_t i : local_maxima(neg))
      if (peak_prominence(neg, i) >= min_prom) cand.push_back(i);
    std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t c) {
      return speed[a] < speed[c] || (speed[a] == speed[c] && a < c);
    });
    std::vector<std::size_t> hs;
    for (std::size_t i : cand) {
      bool ok = true;
      for (std::size_t k : hs)
        if (std::abs(t[i] - t[k]) < cfg.min_spacing) ok = false;
      if (ok) hs.push_back(i);
    }
    std::sort(hs.begin(), hs.end());
    if (hs.empty()) continue;

    std::vector<std::size_t> maxima;
    for (std::size_t i : local_maxima(speed))
      if (peak_prominence(speed, i) >= min_prom) maxima.push_back(i);

    for (std::size_t k = 0; k < hs.size(); ++k) {
      const std::size_t h = hs[k];
      const double th = refined_time(t, neg, h);
      ev.hs_times.push_back(th);
      ev.hs_ranges.push_back(interpolate(t, r, th));
      ev.hs_segments.push_back(id);
      if (k + 1 == hs.size()) break;
      const std::size_t next = hs[k + 1];
      // Peak of the following swing: first prominent maximum, else the
      // largest sample before the next heel strike.
      std::size_t peak = next;
      for (std::size_t m : maxima)
        if (m > h && m < next) {
          peak = m;
          break;
        }
      if (peak == next)
        peak = static_cast<std::size_t>(std::max_element(speed.begin() + static_cast<std::ptrdiff_t>(h) + 1,
                                                         speed.begin() + static_cast<std::ptrdiff_t>(next)) -
                                        speed.begin());
      double tt;
      if (cfg.toe_off_rise_fraction > 0.0) {
        // Swing onset: first upward crossing of a fixed fraction of the
        // minimum-to-peak rise.
        const double level = speed[h] + cfg.toe_off_rise_fraction * (speed[peak] - speed[h]);
        std::size_t i = h;
        while (i < peak && speed[i + 1] < level) ++i;
        const double y0 = speed[i], y1 = speed[i + 1];
        const double frac = y1 > y0 ? std::clamp((level - y0) / (y1 - y0), 0.0, 1.0) : 0.0;
        tt = t[i] + frac * (t[i + 1] - t[i]);
      } else {
        tt = refined_time(t, speed, peak);
      }
      if (!(tt > th)) tt = std::nextafter(th, std::numeric_limits<double>::infinity());
      ev.to_times.push_back(tt);
      ev.to_ranges.push_back(interpolate(t, r, tt));
      ev.to_segments.push_back(id);
    }
  }
  return ev;
}

GaitParameterSet estimate_parameters(const GaitEvents& events) {
  events.validate();
  GaitParameterSet out;
  std::size_t h = 0, t = 0;
  while (h < events.hs_count()) {
    const int seg = events.hs_segments[h];
    std::size_t h_end = h, t_end = t;
    while (h_end < events.hs_count() && events.hs_segments[h_end] == seg) ++h_end;
    while (t_end < events.to_count() && events.to_segments[t_end] == seg) ++t_end;
    const std::size_t nh = h_end - h, nt = t_end - t;
    for (std::size_t k = 0; k + 2 < nh && k + 1 < nt; ++k) {
      StrideRecord s;
      s.segment = seg;
      s.start_time = events.hs_times[h + k];
      s.stride_time = events.hs_times[h + k + 2] - events.hs_times[h + k];
      s.stride_length = std::abs(events.hs_ranges[h + k + 2] - events.hs_ranges[h + k]);
      s.walking_speed = s.stride_length / s.stride_time;
      s.stance_time = events.to_times[t + k + 1] - events.hs_times[h + k];
      s.swing_time = s.stride_time - s.stance_time;
      if (s.stride_time > 0.0 && s.stride_length > 0.0 && s.stance_time > 0.0 && s.swing_time > 0.0)
        out.strides.push_back(s);
    }
    h = h_end;
    t = t_end;
  }
  return out;
}

}  // namespace gaitradar

namespace gaitradar {

MatchList match_times(std::span<const double> estimates, std::span<const double> references, double tolerance) {
  MatchList out;
  std::vector<bool> used(estimates.size(), false);
  for (std::size_t j = 0; j < references.size(); ++j) {
    const double t = references[j];
    auto it = std::lower_bound(estimates.begin(), estimates.end(), t);
    std::size_t best = estimates.size();
    double best_d = tolerance;
    for (auto c : {it - 1, it}) {
      if (c < estimates.begin() || c >= estimates.end()) continue;
      const auto i = static_cast<std::size_t>(c - estimates.begin());
      const double d = std::abs(estimates[i] - t);
      if (!used[i] && d <= best_d) {
        best = i;
        best_d = d;
      }
    }
    if (best < estimates.size()) {
      used[best] = true;
      out.emplace_back(best, j);
    }
  }
  return out;
}

MatchList match_strides(const GaitParameterSet& estimates, const GaitParameterSet& references) {
  MatchList out;
  std::vector<bool> used(estimates.size(), false);
  for (std::size_t j = 0; j < references.size(); ++j) {
    const auto& ref = references.strides[j];
    std::size_t best = estimates.size();
    double best_d = 0.5 * ref.stride_time;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const double d = std::abs(estimates.strides[i].start_time - ref.start_time);
      if (!used[i] && d <= best_d) {
        best = i;
        best_d = d;
      }
    }
    if (best < estimates.size()) {
      used[best] = true;
      out.emplace_back(best, j);
    }
  }
  return out;
}

}  // namespace gaitradar
