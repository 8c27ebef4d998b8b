// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gaitradar/random.hpp"
#include "json.hpp"

namespace gaitradar {

namespace {

constexpr double kPi = std::numbers::pi;

// Phase of the torso speed modulation at the first toe-off of a traversal.
// With this phase the modulation peaks in mid single support and bottoms out
// in double support.
constexpr double kBobPhase = 0.0;
// Longest torso lead before the first toe-off, in stride times.
constexpr double kTorsoMaxLead = 0.4;

double radial_velocity(const Point3& p, const Point3& v, const Point3& radar) {
  const double dx = p.x - radar.x, dy = p.y - radar.y, dz = p.z - radar.z;
  const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (r == 0.0) return 0.0;
  return (dx * v.x + dy * v.y + dz * v.z) / r;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

struct TraversalPlan {
  std::vector<double> to_times;
  std::vector<double> hs_times;
  std::vector<std::size_t> foot;  // 0 = left, 1 = right
  std::vector<Point3> lift;
  std::vector<Point3> land;
  double end_time = 0.0;
};

}  // namespace

double GaitModel::peak_swing_speed() const {
  const double sw = swing_time();
  return sw > 0.0 ? 2.0 * stride_length() / sw : 0.0;
}

void GaitModel::validate() const {
  require(walking_speed >= 0.0 && std::isfinite(walking_speed), "GaitModel: walking_speed must be >= 0");
  require(stride_time > 0.0 && std::isfinite(stride_time), "GaitModel: stride_time must be positive");
  require(duty_factor > 0.5 && duty_factor < 0.75, "GaitModel: duty_factor must lie in (0.5, 0.75)");
  require(torso_bob_amplitude >= 0.0, "GaitModel: torso_bob_amplitude must be >= 0");
  require(walkway_length > 0.0, "GaitModel: walkway_length must be positive");
  require(turn_duration >= 0.0, "GaitModel: turn_duration must be >= 0");
  require(trial_duration > 0.0 && std::isfinite(trial_duration), "GaitModel: trial_duration must be positive");
  require(walking_speed == 0.0 || stride_length() < walkway_length,
          "GaitModel: stride length must be shorter than the walkway");
}

void WalkProtocol::validate() const {
  require(initial_stand >= 0.0 && final_stand >= 0.0, "WalkProtocol: stand times must be >= 0");
  require(max_traversals >= 0, "WalkProtocol: max_traversals must be >= 0");
  require(sample_rate > 0.0, "WalkProtocol: sample_rate must be positive");
  require(velocity_limit > 0.0, "WalkProtocol: velocity_limit must be positive");
  require(stride_jitter >= 0.0 && stride_jitter <= 0.02, "WalkProtocol: stride_jitter must lie in [0, 0.02]");
  require(foot_half_spacing >= 0.0, "WalkProtocol: foot_half_spacing must be >= 0");
  require(torso_reflectivity > 0.0 && foot_reflectivity > 0.0, "WalkProtocol: reflectivities must be positive");
}

void NoiseModel::validate(const RadarConfig& config) const {
  require(std::isfinite(snr_db), "NoiseModel: snr_db must be finite");
  for (const auto& c : static_clutter) {
    require(c.range >= 0.0 && c.range <= config.max_range, "NoiseModel: clutter range outside [0, max_range]");
    require(std::isfinite(c.amplitude), "NoiseModel: clutter amplitude must be finite");
  }
}

KinematicTruth simulate_walk(const GaitModel& model, const WalkProtocol& protocol, std::uint64_t seed) {
  model.validate();
  protocol.validate();

  const double stride_len = model.stride_length();
  const double beta = model.duty_factor;
  const double t_nominal = model.stride_time;
  const bool walking = model.walking_speed > 0.0;
  if (walking) {
    const double worst_swing = (1.0 - beta) * t_nominal * (1.0 - protocol.stride_jitter);
    const double peak = 2.0 * stride_len / worst_swing;
    if (peak > protocol.velocity_limit) {
      std::ostringstream os;
      os << "simulate_walk: peak swing speed " << peak << " m/s exceeds the velocity limit "
         << protocol.velocity_limit << " m/s";
      throw InvalidArgument(os.str());
    }
  }

  Rng rng(seed);
  const double x_near = protocol.walkway_start;
  const double x_far = protocol.walkway_start + model.walkway_length;
  const double fy = protocol.foot_half_spacing;
  const double fz = protocol.foot_height;

  std::array<Point3, 2> feet{Point3{x_near, +fy, fz}, Point3{x_near + 0.5 * stride_len, -fy, fz}};
  auto centroid = [&] { return Point3{0.5 * (feet[0].x + feet[1].x), 0.0, protocol.torso_height}; };
  const std::array<Point3, kBodyCount> start{centroid(), feet[0], feet[1]};
  std::array<std::vector<Move>, kBodyCount> moves;

  KinematicTruth truth;
  truth.duration = model.trial_duration;
  truth.radar_position = protocol.radar_position;
  truth.reflectivity = {protocol.torso_reflectivity, protocol.foot_reflectivity, protocol.foot_reflectivity};
  GaitEvents& ev = truth.true_events;

  double t = protocol.initial_stand;
  int traversal = 0;
  while (walking && (protocol.max_traversals == 0 || traversal < protocol.max_traversals)) {
    const double dir = traversal % 2 == 0 ? 1.0 : -1.0;
    // The foot behind, relative to the walking direction, swings first.
    std::size_t next = dir * (feet[0].x - feet[1].x) <= 0.0 ? 0 : 1;
    std::array<Point3, 2> pos = feet;
    TraversalPlan plan;
    double to = t;
    for (;;) {
      const double landing = pos[next].x + dir * stride_len;
      if (landing > x_far + 1e-9 || landing < x_near - 1e-9) break;
      const double stride = t_nominal * (1.0 + protocol.stride_jitter * rng.uniform(-1.0, 1.0));
      plan.to_times.push_back(to);
      plan.hs_times.push_back(to + (1.0 - beta) * stride);
      plan.foot.push_back(next);
      plan.lift.push_back(pos[next]);
      pos[next].x = landing;
      plan.land.push_back(pos[next]);
      to += 0.5 * stride;
      next = 1 - next;
    }
    if (plan.hs_times.size() < 2) break;
    plan.end_time = plan.hs_times.back();
    if (plan.end_time + protocol.final_stand > model.trial_duration) break;

    const Point3 torso_from = centroid();
    for (std::size_t i = 0; i < plan.hs_times.size(); ++i) {
      Move m;
      m.kind = Move::Kind::RaisedCosine;
      m.t0 = plan.to_times[i];
      m.t1 = plan.hs_times[i];
      m.from = plan.lift[i];
      m.to = plan.land[i];
      moves[1 + plan.foot[i]].push_back(m);
    }
    feet = pos;
    const Point3 torso_to = centroid();

    // The torso leads the first toe-off and trails the last heel strike by
    // the same margin, sized so its steady speed matches the feet progression.
    const double ramp = 0.5 * t_nominal;
    const double steps = static_cast<double>(plan.hs_times.size());
    const double lead =
        std::clamp(0.5 * (0.5 * steps * t_nominal - (plan.end_time - t) + ramp), 0.0, std::min({t, protocol.final_stand, kTorsoMaxLead * t_nominal}));
    Move cruise;
    cruise.kind = Move::Kind::Cruise;
    cruise.t0 = t - lead;
    cruise.t1 = plan.end_time + lead;
    cruise.from = torso_from;
    cruise.to = torso_to;
    cruise.ramp = ramp;
    cruise.bob_amplitude = model.torso_bob_amplitude;
    cruise.bob_omega = 2.0 * kPi * 2.0 / t_nominal;
    // Bob phase is referenced to the first toe-off.
    cruise.bob_phase = kBobPhase + cruise.bob_omega * (lead - cruise.ramp);
    cruise.cruise_speed = solve_cruise_speed(distance(torso_from, torso_to), cruise.t1 - cruise.t0, cruise.ramp,
                                             cruise.bob_amplitude, cruise.bob_omega, cruise.bob_phase);
    moves[0].push_back(cruise);

    // Ground-truth events. The leading toe-off is dropped so each segment
    // opens with a heel strike.
    const auto radar = protocol.radar_position;
    for (std::size_t i = 0; i < plan.hs_times.size(); ++i) {
      ev.hs_times.push_back(plan.hs_times[i]);
      ev.hs_ranges.push_back(distance(plan.land[i], radar));
      ev.hs_segments.push_back(traversal);
      if (i > 0) {
        ev.to_times.push_back(plan.to_times[i]);
        ev.to_ranges.push_back(distance(plan.lift[i], radar));
        ev.to_segments.push_back(traversal);
      }
    }
    truth.walking_intervals.push_back({t, plan.end_time});
    t = plan.end_time;
    ++traversal;

    // Turn: slow aperiodic torso drift and short irregular foot shuffles.
    if (model.turn_duration <= 0.0 || t + model.turn_duration + protocol.final_stand > model.trial_duration) break;
    const double turn_end = t + model.turn_duration;
    for (std::size_t b = 0; b < kBodyCount; ++b) {
      const bool is_torso = b == 0;
      // Torso drift keeps clear of the neighbouring cruise lead-in and lead-out.
      const double margin = is_torso ? kTorsoMaxLead * t_nominal : 0.0;
      double cursor = t + margin + rng.uniform(0.0, 0.3);
      const Point3 home = is_torso ? torso_to : feet[b - 1];
      for (;;) {
        const double dur = is_torso ? rng.uniform(0.8, 1.4) : rng.uniform(0.12, 0.3);
        const double gap = is_torso ? rng.uniform(0.05, 0.6) : rng.uniform(0.05, 0.35);
        if (cursor + 2.0 * dur + gap > turn_end - margin) break;
        const double peak = is_torso ? rng.uniform(0.05, 0.25) : rng.uniform(0.3, 1.0);
        const double reach = 0.5 * peak * dur;
        const double heading = rng.uniform(0.0, 2.0 * kPi);
        const Point3 away{home.x + reach * std::cos(heading), home.y + reach * std::sin(heading), home.z};
        Move out;
        out.kind = Move::Kind::RaisedCosine;
        out.t0 = cursor;
        out.t1 = cursor + dur;
        out.from = home;
        out.to = away;
        Move back = out;
        back.t0 = out.t1 + gap;
        back.t1 = back.t0 + dur;
        back.from = away;
        back.to = home;
        moves[b].push_back(out);
        moves[b].push_back(back);
        cursor = back.t1 + (is_torso ? rng.uniform(0.05, 0.6) : rng.uniform(0.05, 0.35));
      }
    }
    t = turn_end;
  }

  auto kin = std::make_shared<WalkerKinematics>(start, std::move(moves));
  truth.kinematics = kin;

  const auto n = static_cast<std::size_t>(std::floor(model.trial_duration * protocol.sample_rate + 1e-9)) + 1;
  truth.time.resize(n);
  for (auto& track : truth.tracks) {
    track.position.resize(n);
    track.range.resize(n);
    track.radial_velocity.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) / protocol.sample_rate;
    truth.time[i] = ti;
    for (std::size_t b = 0; b < kBodyCount; ++b) {
      const auto body = static_cast<Body>(b);
      const Point3 p = kin->position(body, ti);
      const Point3 v = kin->velocity(body, ti);
      truth.tracks[b].position[i] = p;
      truth.tracks[b].range[i] = distance(p, protocol.radar_position);
      truth.tracks[b].radial_velocity[i] = radial_velocity(p, v, protocol.radar_position);
    }
  }

  truth.torso.time = truth.time;
  truth.torso.range = truth.tracks[0].range;
  truth.torso.velocity = truth.tracks[0].radial_velocity;

  // Merged feet: whichever foot has the higher radial speed; ties keep the
  // previous choice.
  truth.merged_feet.time = truth.time;
  truth.merged_feet.range.resize(n);
  truth.merged_feet.velocity.resize(n);
  std::size_t chosen = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double sl = std::abs(truth.tracks[1].radial_velocity[i]);
    const double sr = std::abs(truth.tracks[2].radial_velocity[i]);
    if (sl > sr + 1e-12) chosen = 1;
    else if (sr > sl + 1e-12) chosen = 2;
    truth.merged_feet.range[i] = truth.tracks[chosen].range[i];
    truth.merged_feet.velocity[i] = truth.tracks[chosen].radial_velocity[i];
  }

  truth.true_walking_mask.assign(n, false);
  for (const auto& iv : truth.walking_intervals) {
    for (std::size_t i = 0; i < n; ++i)
      if (truth.time[i] >= iv.begin && truth.time[i] <= iv.end) truth.true_walking_mask[i] = true;
  }

  truth.true_parameters = estimate_parameters(truth.true_events);
  return truth;
}

double hann_kernel(double u) {
  const double au = std::abs(u);
  if (au < 1e-9) return 1.0;
  if (std::abs(au - 1.0) < 1e-9) return 0.5;
  const double sinc = std::sin(kPi * u) / (kPi * u);
  return sinc / (1.0 - u * u);
}

namespace {

template <typename Kernel>
RangeProfileMatrix synthesize_common(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                                     std::uint64_t seed, double time_offset, Kernel kernel, double support) {
  config.validate();
  noise.validate(config);
  if (!truth.kinematics) throw InvalidArgument("synthesize: truth has no kinematic model (loaded from sidecar?)");
  const auto n_slow = static_cast<std::size_t>(std::floor(truth.duration * config.slow_time_rate + 1e-9));
  if (n_slow == 0) throw InvalidArgument("synthesize: trial shorter than one slow-time sample");

  RangeProfileMatrix out(config, n_slow, 0.0);
  const std::size_t bins = out.range_bins();
  const double res = config.range_resolution;
  const double k_phase = phase_sign(config.modality) * 4.0 * kPi / config.wavelength;
  const auto& kin = *truth.kinematics;

  auto add_scatterer = [&](std::span<cplx> row, double r, double amplitude) {
    const cplx carrier = amplitude * std::polar(1.0, k_phase * r);
    const double centre = r / res - 0.5;  // fractional bin index
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(centre - support));
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil(centre + support));
    for (std::ptrdiff_t m = std::max<std::ptrdiff_t>(lo, 0);
         m <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(bins) - 1); ++m) {
      const double offset = (static_cast<double>(m) + 0.5) * res - r;
      row[static_cast<std::size_t>(m)] += carrier * kernel(offset);
    }
  };

  std::vector<cplx> clutter_row(bins);
  if (noise.enabled) {
    for (const auto& c : noise.static_clutter) {
      if (c.range <= 0.0) continue;
      add_scatterer(clutter_row, c.range, c.amplitude * truth.reflectivity[0] / (c.range * c.range));
    }
  }
  const double ref_range = 0.5 * config.max_range;
  const double sigma = noise.enabled
                           ? truth.reflectivity[0] / (ref_range * ref_range) / std::pow(10.0, noise.snr_db / 20.0)
                           : 0.0;
  const double sigma_q = sigma / std::sqrt(2.0);
  Rng rng(seed);

  for (std::size_t n = 0; n < n_slow; ++n) {
    const double t = time_offset + static_cast<double>(n) / config.slow_time_rate;
    auto row = out.row(n);
    for (std::size_t b = 0; b < kBodyCount; ++b) {
      const double r = distance(kin.position(static_cast<Body>(b), t), config.position);
      if (r > config.max_range || r <= 0.0) {
        std::ostringstream os;
        os << "synthesize: scatterer range " << r << " m at t = " << t << " s outside (0, " << config.max_range
           << "]";
        throw InvalidArgument(os.str());
      }
      add_scatterer(row, r, truth.reflectivity[b] / (r * r));
    }
    if (noise.enabled) {
      for (std::size_t m = 0; m < bins; ++m) {
        row[m] += clutter_row[m];
        if (sigma_q > 0.0) {
          const double re = rng.normal();
          const double im = rng.normal();
          row[m] += cplx(sigma_q * re, sigma_q * im);
        }
      }
    }
  }
  return out;
}

}  // namespace

RangeProfileMatrix synthesize_uwb(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                                  std::uint64_t seed, double time_offset) {
  if (config.modality != Modality::Uwb) throw InvalidArgument("synthesize_uwb: config modality is not UWB");
  const double s = config.uwb_pulse_width;
  const double inv = 1.0 / (2.0 * s * s);
  return synthesize_common(
      truth, config, noise, seed, time_offset, [inv](double d) { return std::exp(-d * d * inv); },
      8.0 * s / config.range_resolution + 1.0);
}

RangeProfileMatrix synthesize_fmcw(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                                   std::uint64_t seed, double time_offset) {
  if (config.modality != Modality::Fmcw) throw InvalidArgument("synthesize_fmcw: config modality is not FMCW");
  const double scale = config.fmcw_window_scale / config.range_resolution;
  return synthesize_common(
      truth, config, noise, seed, time_offset, [scale](double d) { return hann_kernel(scale * d); },
      16.0 / config.fmcw_window_scale + 1.0);
}

RangeProfileMatrix synthesize(const KinematicTruth& truth, const RadarConfig& config, const NoiseModel& noise,
                              std::uint64_t seed, double time_offset) {
  return config.modality == Modality::Uwb ? synthesize_uwb(truth, config, noise, seed, time_offset)
                                          : synthesize_fmcw(truth, config, noise, seed, time_offset);
}

// ---------------------------------------------------------------------------
// Sidecar

namespace {

using nlohmann::json;

json trajectory_json(const Trajectory& t) {
  return json{{"time", t.time}, {"range", t.range}, {"velocity", t.velocity}};
}

Trajectory trajectory_from(const json& j) {
  Trajectory t;
  j.at("time").get_to(t.time);
  j.at("range").get_to(t.range);
  j.at("velocity").get_to(t.velocity);
  t.validate();
  return t;
}

}  // namespace

void write_truth_sidecar(const std::filesystem::path& path, const KinematicTruth& truth) {
  json j;
  j["format"] = "gaitradar-truth-1";
  j["duration"] = truth.duration;
  j["radar_position"] = {truth.radar_position.x, truth.radar_position.y, truth.radar_position.z};
  j["reflectivity"] = truth.reflectivity;

  json hs = json::array(), to = json::array();
  const auto& ev = truth.true_events;
  for (std::size_t i = 0; i < ev.hs_count(); ++i)
    hs.push_back({{"time", ev.hs_times[i]}, {"range", ev.hs_ranges[i]}, {"segment", ev.hs_segments[i]}});
  for (std::size_t i = 0; i < ev.to_count(); ++i)
    to.push_back({{"time", ev.to_times[i]}, {"range", ev.to_ranges[i]}, {"segment", ev.to_segments[i]}});
  j["events"] = {{"heel_strike", hs}, {"toe_off", to}};

  json strides = json::array();
  for (const auto& s : truth.true_parameters.strides)
    strides.push_back({{"start_time", s.start_time},
                       {"stride_time", s.stride_time},
                       {"stride_length", s.stride_length},
                       {"walking_speed", s.walking_speed},
                       {"swing_time", s.swing_time},
                       {"stance_time", s.stance_time},
                       {"segment", s.segment}});
  j["strides"] = strides;

  json rle = json::array();
  const auto& mask = truth.true_walking_mask;
  for (std::size_t i = 0; i < mask.size();) {
    std::size_t k = i;
    while (k < mask.size() && mask[k] == mask[i]) ++k;
    rle.push_back({{"walking", static_cast<bool>(mask[i])}, {"samples", k - i}});
    i = k;
  }
  j["walking_mask_rle"] = rle;
  json intervals = json::array();
  for (const auto& iv : truth.walking_intervals) intervals.push_back({iv.begin, iv.end});
  j["walking_intervals"] = intervals;
  j["torso"] = trajectory_json(truth.torso);
  j["merged_feet"] = trajectory_json(truth.merged_feet);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("write_truth_sidecar: cannot open " + path.string());
  out << j.dump(1) << '\n';
}

KinematicTruth read_truth_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_truth_sidecar: cannot open " + path.string());
  json j;
  try {
    in >> j;
    KinematicTruth truth;
    truth.duration = j.at("duration").get<double>();
    const auto rp = j.at("radar_position").get<std::vector<double>>();
    if (rp.size() != 3) throw Error("radar_position must have 3 components");
    truth.radar_position = {rp[0], rp[1], rp[2]};
    truth.reflectivity = j.at("reflectivity").get<std::array<double, kBodyCount>>();
    auto& ev = truth.true_events;
    for (const auto& e : j.at("events").at("heel_strike")) {
      ev.hs_times.push_back(e.at("time").get<double>());
      ev.hs_ranges.push_back(e.at("range").get<double>());
      ev.hs_segments.push_back(e.at("segment").get<int>());
    }
    for (const auto& e : j.at("events").at("toe_off")) {
      ev.to_times.push_back(e.at("time").get<double>());
      ev.to_ranges.push_back(e.at("range").get<double>());
      ev.to_segments.push_back(e.at("segment").get<int>());
    }
    for (const auto& s : j.at("strides")) {
      StrideRecord r;
      r.start_time = s.at("start_time").get<double>();
      r.stride_time = s.at("stride_time").get<double>();
      r.stride_length = s.at("stride_length").get<double>();
      r.walking_speed = s.at("walking_speed").get<double>();
      r.swing_time = s.at("swing_time").get<double>();
      r.stance_time = s.at("stance_time").get<double>();
      r.segment = s.at("segment").get<int>();
      truth.true_parameters.strides.push_back(r);
    }
    for (const auto& run : j.at("walking_mask_rle")) {
      const bool w = run.at("walking").get<bool>();
      const auto count = run.at("samples").get<std::size_t>();
      truth.true_walking_mask.insert(truth.true_walking_mask.end(), count, w);
    }
    for (const auto& iv : j.at("walking_intervals")) truth.walking_intervals.push_back({iv.at(0), iv.at(1)});
    truth.torso = trajectory_from(j.at("torso"));
    truth.merged_feet = trajectory_from(j.at("merged_feet"));
    truth.time = truth.torso.time;
    if (truth.true_walking_mask.size() != truth.time.size())
      throw Error("walking mask length does not match the trajectory length");
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw Error("read_truth_sidecar: malformed sidecar " + path.string() + ": " + e.what());
  }
}

}  // namespace gaitradar
