// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "gaitradar/random.hpp"
#include "gaitradar/rpm_io.hpp"
#include "json.hpp"

namespace gaitradar {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config (de)serialisation

// Reads the keys of one JSON object into existing values and rejects keys
// nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& value) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.insert(key);
    try {
      value = it->template get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument(where_ + "." + key + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) throw InvalidArgument(where_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(where + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json gait_json(const GaitModel& g) {
  return {{"walking_speed", g.walking_speed},     {"stride_time", g.stride_time},
          {"duty_factor", g.duty_factor},         {"torso_bob_amplitude", g.torso_bob_amplitude},
          {"walkway_length", g.walkway_length},   {"turn_duration", g.turn_duration},
          {"trial_duration", g.trial_duration}};
}

void read_gait(const json& j, GaitModel& g) {
  Fields f(j, "gait");
  f.get("walking_speed", g.walking_speed);
  f.get("stride_time", g.stride_time);
  f.get("duty_factor", g.duty_factor);
  f.get("torso_bob_amplitude", g.torso_bob_amplitude);
  f.get("walkway_length", g.walkway_length);
  f.get("turn_duration", g.turn_duration);
  f.get("trial_duration", g.trial_duration);
  f.finish();
}

json protocol_json(const WalkProtocol& p) {
  return {{"initial_stand", p.initial_stand},
          {"final_stand", p.final_stand},
          {"max_traversals", p.max_traversals},
          {"walkway_start", p.walkway_start},
          {"sample_rate", p.sample_rate},
          {"velocity_limit", p.velocity_limit},
          {"stride_jitter", p.stride_jitter},
          {"radar_position", point_json(p.radar_position)},
          {"torso_height", p.torso_height},
          {"foot_height", p.foot_height},
          {"foot_half_spacing", p.foot_half_spacing},
          {"torso_reflectivity", p.torso_reflectivity},
          {"foot_reflectivity", p.foot_reflectivity}};
}

void read_protocol(const json& j, WalkProtocol& p) {
  Fields f(j, "protocol");
  f.get("initial_stand", p.initial_stand);
  f.get("final_stand", p.final_stand);
  f.get("max_traversals", p.max_traversals);
  f.get("walkway_start", p.walkway_start);
  f.get("sample_rate", p.sample_rate);
  f.get("velocity_limit", p.velocity_limit);
  f.get("stride_jitter", p.stride_jitter);
  if (const json* s = f.sub("radar_position")) p.radar_position = point_from(*s, f.path("radar_position"));
  f.get("torso_height", p.torso_height);
  f.get("foot_height", p.foot_height);
  f.get("foot_half_spacing", p.foot_half_spacing);
  f.get("torso_reflectivity", p.torso_reflectivity);
  f.get("foot_reflectivity", p.foot_reflectivity);
  f.finish();
}

json noise_json(const NoiseModel& n) {
  json clutter = json::array();
  for (const auto& c : n.static_clutter) clutter.push_back({{"range", c.range}, {"amplitude", c.amplitude}});
  return {{"snr_db", n.snr_db}, {"enabled", n.enabled}, {"static_clutter", clutter}};
}

void read_noise(const json& j, NoiseModel& n) {
  Fields f(j, "noise");
  f.get("snr_db", n.snr_db);
  f.get("enabled", n.enabled);
  if (const json* s = f.sub("static_clutter")) {
    if (!s->is_array()) throw InvalidArgument("noise.static_clutter: expected an array");
    n.static_clutter.clear();
    for (const auto& item : *s) {
      StaticClutter c;
      Fields cf(item, "noise.static_clutter[]");
      cf.get("range", c.range);
      cf.get("amplitude", c.amplitude);
      cf.finish();
      n.static_clutter.push_back(c);
    }
  }
  f.finish();
}

json radar_json(const RadarConfig& r) {
  return {{"wavelength", r.wavelength},
          {"max_range", r.max_range},
          {"range_resolution", r.range_resolution},
          {"slow_time_rate", r.slow_time_rate},
          {"uwb_pulse_width", r.uwb_pulse_width},
          {"fmcw_window_scale", r.fmcw_window_scale},
          {"position", point_json(r.position)}};
}

void read_radar(const json& j, RadarConfig& r, const std::string& where) {
  Fields f(j, where);
  f.get("wavelength", r.wavelength);
  f.get("max_range", r.max_range);
  f.get("range_resolution", r.range_resolution);
  f.get("slow_time_rate", r.slow_time_rate);
  f.get("uwb_pulse_width", r.uwb_pulse_width);
  f.get("fmcw_window_scale", r.fmcw_window_scale);
  if (const json* s = f.sub("position")) r.position = point_from(*s, f.path("position"));
  f.finish();
}

json pipeline_json(const PipelineConfig& p) {
  return {{"clutter",
           {{"highpass_cutoff", p.clutter.highpass_cutoff},
            {"highpass_order", p.clutter.highpass_order},
            {"ema_alpha_min", p.clutter.ema_alpha_min},
            {"ema_alpha_max", p.clutter.ema_alpha_max},
            {"ema_adapt_gain", p.clutter.ema_adapt_gain},
            {"ema_scale_release", p.clutter.ema_scale_release}}},
          {"stft",
           {{"window_duration", p.stft.window_duration},
            {"overlap_fraction", p.stft.overlap_fraction},
            {"kaiser_shape", p.stft.kaiser_shape},
            {"fft_length", p.stft.fft_length}}},
          {"contrast",
           {{"exponent", p.contrast.exponent}, {"semi_saturation_quantile", p.contrast.semi_saturation_quantile}}},
          {"envelope",
           {{"upper_percentile", p.envelope.upper_percentile},
            {"lower_percentile", p.envelope.lower_percentile},
            {"noise_floor_quantile", p.envelope.noise_floor_quantile},
            {"noise_floor_gain", p.envelope.noise_floor_gain},
            {"range_gate", p.envelope.range_gate}}},
          {"walkseg",
           {{"window_duration", p.walkseg.window_duration},
            {"overlap_fraction", p.walkseg.overlap_fraction},
            {"confidence_threshold", p.walkseg.confidence_threshold},
            {"peak_prominence", p.walkseg.peak_prominence},
            {"min_segment_duration", p.walkseg.min_segment_duration},
            {"gap_close_duration", p.walkseg.gap_close_duration}}},
          {"events",
           {{"min_prominence_fraction", p.events.min_prominence_fraction},
            {"min_spacing", p.events.min_spacing},
            {"toe_off_rise_fraction", p.events.toe_off_rise_fraction}}},
          {"torso_min_contrast", p.torso_min_contrast}};
}

void read_pipeline(const json& j, PipelineConfig& p) {
  Fields f(j, "pipeline");
  if (const json* s = f.sub("clutter")) {
    Fields g(*s, "pipeline.clutter");
    g.get("highpass_cutoff", p.clutter.highpass_cutoff);
    g.get("highpass_order", p.clutter.highpass_order);
    g.get("ema_alpha_min", p.clutter.ema_alpha_min);
    g.get("ema_alpha_max", p.clutter.ema_alpha_max);
    g.get("ema_adapt_gain", p.clutter.ema_adapt_gain);
    g.get("ema_scale_release", p.clutter.ema_scale_release);
    g.finish();
  }
  if (const json* s = f.sub("stft")) {
    Fields g(*s, "pipeline.stft");
    g.get("window_duration", p.stft.window_duration);
    g.get("overlap_fraction", p.stft.overlap_fraction);
    g.get("kaiser_shape", p.stft.kaiser_shape);
    g.get("fft_length", p.stft.fft_length);
    g.finish();
  }
  if (const json* s = f.sub("contrast")) {
    Fields g(*s, "pipeline.contrast");
    g.get("exponent", p.contrast.exponent);
    g.get("semi_saturation_quantile", p.contrast.semi_saturation_quantile);
    g.finish();
  }
  if (const json* s = f.sub("envelope")) {
    Fields g(*s, "pipeline.envelope");
    g.get("upper_percentile", p.envelope.upper_percentile);
    g.get("lower_percentile", p.envelope.lower_percentile);
    g.get("noise_floor_quantile", p.envelope.noise_floor_quantile);
    g.get("noise_floor_gain", p.envelope.noise_floor_gain);
    g.get("range_gate", p.envelope.range_gate);
    g.finish();
  }
  if (const json* s = f.sub("walkseg")) {
    Fields g(*s, "pipeline.walkseg");
    g.get("window_duration", p.walkseg.window_duration);
    g.get("overlap_fraction", p.walkseg.overlap_fraction);
    g.get("confidence_threshold", p.walkseg.confidence_threshold);
    g.get("peak_prominence", p.walkseg.peak_prominence);
    g.get("min_segment_duration", p.walkseg.min_segment_duration);
    g.get("gap_close_duration", p.walkseg.gap_close_duration);
    g.finish();
  }
  if (const json* s = f.sub("events")) {
    Fields g(*s, "pipeline.events");
    g.get("min_prominence_fraction", p.events.min_prominence_fraction);
    g.get("min_spacing", p.events.min_spacing);
    g.get("toe_off_rise_fraction", p.events.toe_off_rise_fraction);
    g.finish();
  }
  f.get("torso_min_contrast", p.torso_min_contrast);
  f.finish();
}

// ---------------------------------------------------------------------------
// Output helpers

// Shortest text that reads back to the same double; empty when not finite.
std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string trial_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%03zu", index);
  return buf;
}

void write_events_csv(const std::filesystem::path& path, const GaitEvents& ev) {
  struct Row {
    double time;
    const char* kind;
    double range;
    int segment;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < ev.hs_count(); ++i) rows.push_back({ev.hs_times[i], "HS", ev.hs_ranges[i], ev.hs_segments[i]});
  for (std::size_t i = 0; i < ev.to_count(); ++i) rows.push_back({ev.to_times[i], "TO", ev.to_ranges[i], ev.to_segments[i]});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
  auto out = open_output(path);
  out << "kind,time_s,range_m,segment\n";
  for (const auto& r : rows) out << r.kind << ',' << num(r.time) << ',' << num(r.range) << ',' << r.segment << '\n';
}

void write_strides_csv(const std::filesystem::path& path, const GaitParameterSet& set) {
  auto out = open_output(path);
  out << "start_time_s,stride_time_s,stride_length_m,walking_speed_mps,swing_time_s,stance_time_s,segment\n";
  for (const auto& s : set.strides)
    out << num(s.start_time) << ',' << num(s.stride_time) << ',' << num(s.stride_length) << ','
        << num(s.walking_speed) << ',' << num(s.swing_time) << ',' << num(s.stance_time) << ',' << s.segment << '\n';
}

void write_trajectories_csv(const std::filesystem::path& path, const PipelineResult& r) {
  auto out = open_output(path);
  out << "time_s,torso_range_m,torso_velocity_mps,feet_range_m,feet_velocity_mps,torso_low_confidence,"
         "feet_low_confidence,walking\n";
  for (std::size_t i = 0; i < r.torso.size(); ++i)
    out << num(r.torso.time[i]) << ',' << num(r.torso.range[i]) << ',' << num(r.torso.velocity[i]) << ','
        << num(r.feet.range[i]) << ',' << num(r.feet.velocity[i]) << ',' << int(r.torso_low_confidence[i]) << ','
        << int(r.feet_low_confidence[i]) << ',' << int(r.walking[i]) << '\n';
}

void write_confidence_csv(const std::filesystem::path& path, const ConfidenceSeries& c) {
  auto out = open_output(path);
  out << "time_s,confidence\n";
  for (std::size_t i = 0; i < c.time.size(); ++i) out << num(c.time[i]) << ',' << num(c.value[i]) << '\n';
}

void write_reference_files(const std::filesystem::path& dir, const KinematicTruth& truth) {
  write_truth_sidecar(dir / "reference.json", truth);
  write_events_csv(dir / "reference_events.csv", truth.true_events);
  write_strides_csv(dir / "reference_strides.csv", truth.true_parameters);
}

// ---------------------------------------------------------------------------
// Scoring

bool in_intervals(const std::vector<TimeInterval>& intervals, double t) {
  return std::any_of(intervals.begin(), intervals.end(),
                     [t](const TimeInterval& iv) { return t >= iv.begin && t <= iv.end; });
}

TrajectoryFit fit(const std::vector<double>& est, const std::vector<double>& ref) {
  TrajectoryFit out;
  out.n = est.size();
  if (est.size() < 3) return out;
  try {
    const auto p = pearson(est, ref);
    out.r = p.r;
    out.p = p.p;
    out.valid = true;
  } catch (const InvalidArgument&) {
    out.valid = false;
  }
  return out;
}

SegmentScore score_segments(const PipelineResult& r, const KinematicTruth& truth, double lag) {
  SegmentScore s;
  const auto segs = mask_segments(r.walking);
  s.estimated = segs.size();
  s.reference = truth.walking_intervals.size();
  std::vector<TimeInterval> est;
  for (const auto& g : segs) est.push_back({r.feet.time[g.begin] - lag, r.feet.time[g.end - 1] - lag});
  double worst = 0.0;
  for (const auto& ref : truth.walking_intervals) {
    const TimeInterval* best = nullptr;
    double best_overlap = 0.0;
    for (const auto& e : est) {
      const double overlap = std::min(e.end, ref.end) - std::max(e.begin, ref.begin);
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = &e;
      }
    }
    if (best == nullptr) return s.max_boundary_error = std::numeric_limits<double>::infinity(), s;
    worst = std::max({worst, std::abs(best->begin - ref.begin), std::abs(best->end - ref.end)});
  }
  s.max_boundary_error = worst;
  return s;
}

void score_events(std::span<const double> est_times, std::span<const double> est_ranges,
                  std::span<const double> ref_times, std::span<const double> ref_ranges, double lag, double tolerance,
                  AccuracySummary& time_acc, AccuracySummary& range_acc) {
  std::vector<double> shifted(est_times.begin(), est_times.end());
  for (double& t : shifted) t -= lag;
  const auto matches = match_times(shifted, ref_times, tolerance);
  std::vector<double> et, rt, er, rr;
  for (const auto& [i, j] : matches) {
    et.push_back(shifted[i]);
    rt.push_back(ref_times[j]);
    er.push_back(est_ranges[i]);
    rr.push_back(ref_ranges[j]);
  }
  time_acc = accuracy(et, rt);
  range_acc = accuracy(er, rr);
}

json accuracy_json(const AccuracySummary& a) {
  return {{"mean", a.mean}, {"sd", a.sd}, {"n", a.n}, {"excluded", a.excluded}};
}

json fit_json(const TrajectoryFit& f) {
  return {{"r", f.r}, {"p", f.p}, {"n", f.n}, {"valid", f.valid}};
}

json modality_report(const ModalityEvaluation& e) {
  json events = {{"hs_detected", e.hs_detected}, {"to_detected", e.to_detected}};
  for (auto m : kAllEventMetrics) events[to_string(m)] = accuracy_json(e.events[static_cast<std::size_t>(m)]);
  json params = {{"strides_estimated", e.estimated.size()}, {"strides_matched", e.stride_matches.size()}};
  for (auto p : kAllGaitParameters) params[to_string(p)] = accuracy_json(e.parameters[static_cast<std::size_t>(p)]);
  return {{"modality", to_string(e.modality)},
          {"alignment", {{"aligned", e.aligned}, {"lag_s", e.alignment_lag}}},
          {"trajectories",
           {{"torso_range", fit_json(e.torso_range)},
            {"torso_velocity", fit_json(e.torso_velocity)},
            {"feet_range", fit_json(e.feet_range)},
            {"feet_velocity", fit_json(e.feet_velocity)}}},
          {"segments",
           {{"estimated", e.segments.estimated},
            {"reference", e.segments.reference},
            {"max_boundary_error_s", finite_or_null(e.segments.max_boundary_error)}}},
          {"events", events},
          {"parameters", params},
          {"warnings", e.warnings}};
}

// ---------------------------------------------------------------------------
// Processing

struct Processed {
  ModalityEvaluation eval;
  double seconds = 0.0;
};

// Pipeline, scoring and per-modality files for one recording.
Processed process_recording(RangeProfileMatrix profiles, const KinematicTruth& truth, const ExperimentConfig& cfg,
                            const std::filesystem::path& dir) {
  const Modality m = profiles.config().modality;
  const std::string tag = to_string(m);

  std::ofstream rdt;
  FrameSink sink;
  if (cfg.emit_rdt) {
    rdt = open_output(dir / (tag + "_rdt_frames.csv"));
    std::vector<double> ranges = range_axis(profiles.config());
    std::vector<double> velocities =
        velocity_axis(profiles.config(), cfg.pipeline.stft.fft_size(profiles.config().slow_time_rate));
    auto next_dump = std::make_shared<double>(-std::numeric_limits<double>::infinity());
    auto first = std::make_shared<bool>(true);
    sink = [&rdt, ranges, velocities, next_dump, first, interval = cfg.rdt_emit_interval](
               std::size_t, double t, std::span<const double> frame) {
      if (t < *next_dump) return;
      write_rdt_frame_csv(rdt, t, frame, ranges, velocities, *first);
      *first = false;
      *next_dump = (std::floor(t / interval) + 1.0) * interval;
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  const PipelineResult result = run_pipeline(std::move(profiles), cfg.pipeline, sink);
  const auto t1 = std::chrono::steady_clock::now();

  Processed out;
  out.seconds = std::chrono::duration<double>(t1 - t0).count();
  out.eval = evaluate(result, truth, m, cfg.evaluation);

  write_trajectories_csv(dir / (tag + "_trajectories.csv"), result);
  write_confidence_csv(dir / (tag + "_confidence.csv"), result.confidence);
  write_events_csv(dir / (tag + "_events.csv"), result.events);
  write_strides_csv(dir / (tag + "_strides.csv"), result.parameters);
  auto report = open_output(dir / (tag + "_report.json"));
  report << modality_report_json(out.eval);
  return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t index) {
  TrialResult trial;
  trial.index = index;
  trial.seed = trial_seed(cfg.seed, index);
  try {
    const auto dir = cfg.output_dir / trial_dir_name(index);
    std::filesystem::create_directories(dir);
    const KinematicTruth truth = simulate_walk(trial_gait(cfg, trial.seed), cfg.protocol, derive_seed(trial.seed, 0));
    write_reference_files(dir, truth);
    trial.reference = truth.true_parameters;
    for (Modality m : cfg.modalities) {
      RangeProfileMatrix profiles = synthesize(truth, cfg.radar(m), cfg.noise,
                                               derive_seed(trial.seed, 1 + static_cast<std::uint64_t>(m)),
                                               cfg.trigger_latency(m));
      // Process exactly what a stored recording would hold.
      quantize_to_storage(profiles);
      if (cfg.save_recordings) write_rpm(dir / (to_string(m) + ".rpm"), profiles);
      Processed p = process_recording(std::move(profiles), truth, cfg, dir);
      trial.modalities.push_back(std::move(p.eval));
      trial.pipeline_seconds.push_back(p.seconds);
    }
    trial.ok = true;
  } catch (const std::exception& e) {
    trial.ok = false;
    trial.error = e.what();
    trial.modalities.clear();
    trial.pipeline_seconds.clear();
  }
  return trial;
}

std::string comparison_name(Modality m) { return to_string(m) + "_vs_reference"; }

void validate_pipeline(const PipelineConfig& p, double slow_time_rate) {
  p.clutter.validate(slow_time_rate);
  p.stft.validate(slow_time_rate);
  p.contrast.validate();
  p.envelope.validate();
  p.walkseg.validate();
  p.events.validate();
}

void aggregate(const ExperimentConfig& cfg, ExperimentReport& report) {
  for (Modality m : cfg.modalities) {
    std::array<std::vector<AccuracySummary>, 5> params;
    std::array<std::vector<AccuracySummary>, 4> events;
    std::array<std::vector<double>, 5> est, ref;
    for (const auto& t : report.trials) {
      if (!t.ok) continue;
      const ModalityEvaluation* e = report.find(t.index, m);
      if (e == nullptr) continue;
      for (std::size_t p = 0; p < 5; ++p) params[p].push_back(e->parameters[p]);
      for (std::size_t k = 0; k < 4; ++k) events[k].push_back(e->events[k]);
      for (const auto& [i, j] : e->stride_matches)
        for (auto p : kAllGaitParameters) {
          est[static_cast<std::size_t>(p)].push_back(parameter_value(e->estimated.strides[i], p));
          ref[static_cast<std::size_t>(p)].push_back(parameter_value(t.reference.strides[j], p));
        }
    }
    std::array<AccuracySummary, 5> pooled_params;
    std::array<AccuracySummary, 4> pooled_events;
    for (std::size_t p = 0; p < 5; ++p) pooled_params[p] = pool_accuracy(params[p]);
    for (std::size_t k = 0; k < 4; ++k) pooled_events[k] = pool_accuracy(events[k]);
    report.parameter_accuracy.emplace_back(m, pooled_params);
    report.event_accuracy.emplace_back(m, pooled_events);
    for (auto p : kAllGaitParameters) {
      const auto idx = static_cast<std::size_t>(p);
      report.agreement.push_back({comparison_name(m), p, agreement(est[idx], ref[idx])});
    }
  }

  const bool both = std::count(cfg.modalities.begin(), cfg.modalities.end(), Modality::Uwb) > 0 &&
                    std::count(cfg.modalities.begin(), cfg.modalities.end(), Modality::Fmcw) > 0;
  if (!both) return;

  // Inter-modality pairs: strides of both radars matched to the same reference stride.
  std::array<std::vector<double>, 5> u, f;
  for (const auto& t : report.trials) {
    if (!t.ok) continue;
    const ModalityEvaluation* eu = report.find(t.index, Modality::Uwb);
    const ModalityEvaluation* ef = report.find(t.index, Modality::Fmcw);
    if (eu == nullptr || ef == nullptr) continue;
    std::map<std::size_t, std::size_t> fmcw_by_ref;
    for (const auto& [i, j] : ef->stride_matches) fmcw_by_ref[j] = i;
    for (const auto& [i, j] : eu->stride_matches) {
      const auto it = fmcw_by_ref.find(j);
      if (it == fmcw_by_ref.end()) continue;
      for (auto p : kAllGaitParameters) {
        u[static_cast<std::size_t>(p)].push_back(parameter_value(eu->estimated.strides[i], p));
        f[static_cast<std::size_t>(p)].push_back(parameter_value(ef->estimated.strides[it->second], p));
      }
    }
  }
  for (auto p : kAllGaitParameters) {
    const auto idx = static_cast<std::size_t>(p);
    report.agreement.push_back({"uwb_vs_fmcw", p, agreement(u[idx], f[idx])});
  }

  const auto& pu = report.parameter_accuracy[0].first == Modality::Uwb ? report.parameter_accuracy[0]
                                                                       : report.parameter_accuracy[1];
  const auto& pf = report.parameter_accuracy[0].first == Modality::Fmcw ? report.parameter_accuracy[0]
                                                                        : report.parameter_accuracy[1];
  const auto& eu = report.event_accuracy[0].first == Modality::Uwb ? report.event_accuracy[0] : report.event_accuracy[1];
  const auto& ef = report.event_accuracy[0].first == Modality::Fmcw ? report.event_accuracy[0] : report.event_accuracy[1];
  auto compare = [&](const std::string& name, const AccuracySummary& a, const AccuracySummary& b) {
    AccuracyComparison c;
    c.metric = name;
    c.uwb = a;
    c.fmcw = b;
    if (!a.values.empty() && !b.values.empty()) {
      c.test = mann_whitney_u(a.values, b.values);
      c.tested = true;
    }
    report.modality_comparison.push_back(std::move(c));
  };
  for (auto p : kAllGaitParameters)
    compare(to_string(p), pu.second[static_cast<std::size_t>(p)], pf.second[static_cast<std::size_t>(p)]);
  for (auto k : kAllEventMetrics)
    compare(to_string(k), eu.second[static_cast<std::size_t>(k)], ef.second[static_cast<std::size_t>(k)]);
}

void write_report_files(const ExperimentConfig& cfg, const ExperimentReport& report) {
  const auto& dir = cfg.output_dir;

  {
    auto out = open_output(dir / "accuracy.csv");
    out << "modality,metric,mean,sd,n,excluded\n";
    for (const auto& [m, acc] : report.parameter_accuracy)
      for (auto p : kAllGaitParameters) {
        const auto& a = acc[static_cast<std::size_t>(p)];
        out << to_string(m) << ',' << to_string(p) << ',' << num(a.mean) << ',' << num(a.sd) << ',' << a.n << ','
            << a.excluded << '\n';
      }
    for (const auto& [m, acc] : report.event_accuracy)
      for (auto k : kAllEventMetrics) {
        const auto& a = acc[static_cast<std::size_t>(k)];
        out << to_string(m) << ',' << to_string(k) << ',' << num(a.mean) << ',' << num(a.sd) << ',' << a.n << ','
            << a.excluded << '\n';
      }
  }
  {
    auto out = open_output(dir / "agreement.csv");
    out << "comparison,parameter,n_pairs,pearson_r,pearson_p,icc_2_1,bias,sd_diff,loa_low,loa_high,valid\n";
    for (const auto& a : report.agreement) {
      const auto& r = a.report;
      const auto& ba = r.bland_altman;
      out << a.comparison << ',' << to_string(a.parameter) << ',' << r.n_pairs << ',' << num(r.pearson_r) << ','
          << num(r.pearson_p) << ',' << num(r.icc) << ',' << num(ba.bias) << ',' << num(ba.sd_diff) << ','
          << num(ba.loa_low) << ',' << num(ba.loa_high) << ',' << int(r.valid) << '\n';
    }
  }
  {
    auto out = open_output(dir / "bland_altman.csv");
    out << "comparison,parameter,pair_mean,difference\n";
    for (const auto& a : report.agreement)
      for (const auto& [mean, diff] : a.report.bland_altman.points)
        out << a.comparison << ',' << to_string(a.parameter) << ',' << num(mean) << ',' << num(diff) << '\n';
  }
  if (!report.modality_comparison.empty()) {
    auto out = open_output(dir / "mann_whitney.csv");
    out << "metric,uwb_mean,fmcw_mean,gap,n_uwb,n_fmcw,u,p,exact\n";
    for (const auto& c : report.modality_comparison) {
      out << c.metric << ',' << num(c.uwb.mean) << ',' << num(c.fmcw.mean) << ',' << num(std::abs(c.uwb.mean - c.fmcw.mean))
          << ',' << c.uwb.n << ',' << c.fmcw.n << ',';
      if (c.tested)
        out << num(c.test.u) << ',' << num(c.test.p) << ',' << int(c.test.exact) << '\n';
      else
        out << ",,\n";
    }
  }
  {
    auto out = open_output(dir / "trajectory_fit.csv");
    out << "trial,modality,quantity,r,p,n,valid\n";
    for (const auto& t : report.trials)
      for (const auto& e : t.modalities) {
        const std::pair<const char*, const TrajectoryFit*> rows[] = {{"torso_range", &e.torso_range},
                                                                     {"torso_velocity", &e.torso_velocity},
                                                                     {"feet_range", &e.feet_range},
                                                                     {"feet_velocity", &e.feet_velocity}};
        for (const auto& [name, f] : rows)
          out << t.index << ',' << to_string(e.modality) << ',' << name << ',' << num(f->r) << ',' << num(f->p) << ','
              << f->n << ',' << int(f->valid) << '\n';
      }
  }
  {
    auto out = open_output(dir / "segments.csv");
    out << "trial,modality,estimated,reference,max_boundary_error_s\n";
    for (const auto& t : report.trials)
      for (const auto& e : t.modalities)
        out << t.index << ',' << to_string(e.modality) << ',' << e.segments.estimated << ',' << e.segments.reference
            << ',' << num(e.segments.max_boundary_error) << '\n';
  }

  json j;
  j["format"] = "gaitradar-report-1";
  json trials = json::array();
  for (const auto& t : report.trials) {
    json tj = {{"index", t.index}, {"seed", t.seed}, {"ok", t.ok}, {"reference_strides", t.reference.size()}};
    if (!t.ok) tj["error"] = t.error;
    json mods = json::array();
    for (const auto& e : t.modalities) mods.push_back(modality_report(e));
    tj["modalities"] = mods;
    trials.push_back(tj);
  }
  j["trials"] = trials;
  j["failed_trials"] = report.failed_trials;
  json acc = json::object();
  for (const auto& [m, a] : report.parameter_accuracy)
    for (auto p : kAllGaitParameters) acc[to_string(m)][to_string(p)] = accuracy_json(a[static_cast<std::size_t>(p)]);
  for (const auto& [m, a] : report.event_accuracy)
    for (auto k : kAllEventMetrics) acc[to_string(m)][to_string(k)] = accuracy_json(a[static_cast<std::size_t>(k)]);
  j["accuracy"] = acc;
  json agr = json::array();
  for (const auto& a : report.agreement) {
    const auto& r = a.report;
    agr.push_back({{"comparison", a.comparison},
                   {"parameter", to_string(a.parameter)},
                   {"n_pairs", r.n_pairs},
                   {"valid", r.valid},
                   {"pearson_r", r.pearson_r},
                   {"pearson_p", r.pearson_p},
                   {"icc_2_1", r.icc},
                   {"bias", r.bland_altman.bias},
                   {"sd_diff", r.bland_altman.sd_diff},
                   {"loa_low", r.bland_altman.loa_low},
                   {"loa_high", r.bland_altman.loa_high}});
  }
  j["agreement"] = agr;
  json cmp = json::array();
  for (const auto& c : report.modality_comparison) {
    json cj = {{"metric", c.metric},
               {"uwb_mean", c.uwb.mean},
               {"fmcw_mean", c.fmcw.mean},
               {"gap", std::abs(c.uwb.mean - c.fmcw.mean)}};
    if (c.tested) cj["mann_whitney"] = {{"u", c.test.u}, {"p", c.test.p}, {"exact", c.test.exact}};
    cmp.push_back(cj);
  }
  j["modality_comparison"] = cmp;
  j["warnings"] = report.warnings;
  auto out = open_output(dir / "report.json");
  out << j.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

void SubjectSpread::validate() const {
  if (!(walking_speed >= 0.0 && walking_speed < 1.0) || !(stride_time >= 0.0 && stride_time < 1.0))
    throw InvalidArgument("SubjectSpread: spreads must lie in [0, 1)");
}

void EvaluationConfig::validate() const {
  if (!(event_match_tolerance > 0.0)) throw InvalidArgument("EvaluationConfig: event_match_tolerance must be positive");
  if (!(max_alignment_lag >= 0.0)) throw InvalidArgument("EvaluationConfig: max_alignment_lag must be >= 0");
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.noise.static_clutter = {{3.0, 2.0}, {6.5, 1.0}};
  return c;
}

void ExperimentConfig::validate() const {
  gait.validate();
  subjects.validate();
  protocol.validate();
  evaluation.validate();
  if (modalities.empty()) throw InvalidArgument("ExperimentConfig: no modality selected");
  for (std::size_t i = 0; i < modalities.size(); ++i)
    for (std::size_t k = i + 1; k < modalities.size(); ++k)
      if (modalities[i] == modalities[k]) throw InvalidArgument("ExperimentConfig: modality listed twice");
  for (Modality m : modalities) {
    const RadarConfig& rc = radar(m);
    if (rc.modality != m) throw InvalidArgument("ExperimentConfig: radar config does not match its modality");
    rc.validate();
    noise.validate(rc);
    validate_pipeline(pipeline, rc.slow_time_rate);
    if (!(trigger_latency(m) >= 0.0)) throw InvalidArgument("ExperimentConfig: trigger latency must be >= 0");
  }
  if (trials == 0) throw InvalidArgument("ExperimentConfig: trials must be >= 1");
  if (jobs == 0) throw InvalidArgument("ExperimentConfig: jobs must be >= 1");
  if (!(rdt_emit_interval > 0.0)) throw InvalidArgument("ExperimentConfig: rdt_emit_interval must be positive");
  if (output_dir.empty()) throw InvalidArgument("ExperimentConfig: output_dir is empty");
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const ExperimentConfig& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  ExperimentConfig c = base;
  Fields f(j, "config");
  if (const json* s = f.sub("gait")) read_gait(*s, c.gait);
  if (const json* s = f.sub("subjects")) {
    Fields g(*s, "subjects");
    g.get("walking_speed", c.subjects.walking_speed);
    g.get("stride_time", c.subjects.stride_time);
    g.finish();
  }
  if (const json* s = f.sub("protocol")) read_protocol(*s, c.protocol);
  if (const json* s = f.sub("noise")) read_noise(*s, c.noise);
  if (const json* s = f.sub("uwb")) read_radar(*s, c.uwb, "uwb");
  if (const json* s = f.sub("fmcw")) read_radar(*s, c.fmcw, "fmcw");
  if (const json* s = f.sub("pipeline")) read_pipeline(*s, c.pipeline);
  if (const json* s = f.sub("evaluation")) {
    Fields g(*s, "evaluation");
    g.get("event_match_tolerance", c.evaluation.event_match_tolerance);
    g.get("max_alignment_lag", c.evaluation.max_alignment_lag);
    g.get("align", c.evaluation.align);
    g.finish();
  }
  if (const json* s = f.sub("modalities")) {
    std::vector<std::string> names;
    try {
      names = s->get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config.modalities: ") + e.what());
    }
    c.modalities.clear();
    for (const auto& n : names) c.modalities.push_back(modality_from_string(n));
  }
  f.get("uwb_trigger_latency", c.uwb_trigger_latency);
  f.get("fmcw_trigger_latency", c.fmcw_trigger_latency);
  f.get("trials", c.trials);
  f.get("seed", c.seed);
  std::string out = c.output_dir.string();
  f.get("output_dir", out);
  c.output_dir = out;
  f.get("jobs", c.jobs);
  f.get("save_recordings", c.save_recordings);
  f.get("emit_rdt", c.emit_rdt);
  f.get("rdt_emit_interval", c.rdt_emit_interval);
  f.finish();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, const ExperimentConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str(), base);
}

std::string dump_experiment_config(const ExperimentConfig& c) {
  json mods = json::array();
  for (Modality m : c.modalities) mods.push_back(to_string(m));
  json j = {{"gait", gait_json(c.gait)},
            {"subjects", {{"walking_speed", c.subjects.walking_speed}, {"stride_time", c.subjects.stride_time}}},
            {"protocol", protocol_json(c.protocol)},
            {"noise", noise_json(c.noise)},
            {"uwb", radar_json(c.uwb)},
            {"fmcw", radar_json(c.fmcw)},
            {"uwb_trigger_latency", c.uwb_trigger_latency},
            {"fmcw_trigger_latency", c.fmcw_trigger_latency},
            {"pipeline", pipeline_json(c.pipeline)},
            {"evaluation",
             {{"event_match_tolerance", c.evaluation.event_match_tolerance},
              {"max_alignment_lag", c.evaluation.max_alignment_lag},
              {"align", c.evaluation.align}}},
            {"modalities", mods},
            {"trials", c.trials},
            {"seed", c.seed},
            {"output_dir", c.output_dir.string()},
            {"jobs", c.jobs},
            {"save_recordings", c.save_recordings},
            {"emit_rdt", c.emit_rdt},
            {"rdt_emit_interval", c.rdt_emit_interval}};
  return j.dump(2) + "\n";
}

std::string to_string(EventMetric m) {
  switch (m) {
    case EventMetric::HsTime: return "hs_time";
    case EventMetric::HsRange: return "hs_range";
    case EventMetric::ToTime: return "to_time";
    case EventMetric::ToRange: return "to_range";
  }
  return "unknown";
}

ModalityEvaluation evaluate(const PipelineResult& r, const KinematicTruth& truth, Modality modality,
                            const EvaluationConfig& cfg) {
  cfg.validate();
  ModalityEvaluation e;
  e.modality = modality;
  const std::size_t frames = r.feet.size();
  const auto& tf = r.feet.time;

  // Trigger latency: cross-correlate walking-masked feet speed on the frame clock.
  if (cfg.align && frames >= 3 && !truth.walking_intervals.empty()) {
    std::vector<double> radar(frames), reference(frames);
    for (std::size_t i = 0; i < frames; ++i) {
      radar[i] = r.walking[i] ? std::abs(r.feet.velocity[i]) : 0.0;
      reference[i] = in_intervals(truth.walking_intervals, tf[i])
                         ? std::abs(interpolate(truth.merged_feet.time, truth.merged_feet.velocity, tf[i]))
                         : 0.0;
    }
    try {
      e.alignment_lag = align_streams(radar, reference, 1.0 / (tf[1] - tf[0]), cfg.max_alignment_lag);
      e.aligned = true;
    } catch (const Error& ex) {
      e.warnings.push_back(std::string("alignment skipped: ") + ex.what());
    }
  }
  const double lag = e.alignment_lag;

  // Trajectories over walking frames with a confident torso peak.
  std::vector<double> tr, trr, tv, tvr, fr, frr, fv, fvr;
  for (std::size_t i = 0; i < frames; ++i) {
    if (!r.walking[i] || r.torso_low_confidence[i]) continue;
    const double t = tf[i] - lag;
    tr.push_back(r.torso.range[i]);
    trr.push_back(interpolate(truth.torso.time, truth.torso.range, t));
    tv.push_back(r.torso.velocity[i]);
    tvr.push_back(interpolate(truth.torso.time, truth.torso.velocity, t));
    if (r.feet_low_confidence[i]) continue;
    fr.push_back(r.feet.range[i]);
    frr.push_back(interpolate(truth.merged_feet.time, truth.merged_feet.range, t));
    fv.push_back(r.feet.velocity[i]);
    fvr.push_back(interpolate(truth.merged_feet.time, truth.merged_feet.velocity, t));
  }
  e.torso_range = fit(tr, trr);
  e.torso_velocity = fit(tv, tvr);
  e.feet_range = fit(fr, frr);
  e.feet_velocity = fit(fv, fvr);
  if (!e.feet_velocity.valid) e.warnings.push_back("too few walking frames for trajectory correlation");

  e.segments = score_segments(r, truth, lag);

  const auto& ev = r.events;
  const auto& rv = truth.true_events;
  e.hs_detected = ev.hs_count();
  e.to_detected = ev.to_count();
  score_events(ev.hs_times, ev.hs_ranges, rv.hs_times, rv.hs_ranges, lag, cfg.event_match_tolerance,
               e.events[static_cast<std::size_t>(EventMetric::HsTime)],
               e.events[static_cast<std::size_t>(EventMetric::HsRange)]);
  score_events(ev.to_times, ev.to_ranges, rv.to_times, rv.to_ranges, lag, cfg.event_match_tolerance,
               e.events[static_cast<std::size_t>(EventMetric::ToTime)],
               e.events[static_cast<std::size_t>(EventMetric::ToRange)]);

  e.estimated = r.parameters;
  GaitParameterSet shifted = r.parameters;
  for (auto& s : shifted.strides) s.start_time -= lag;
  e.stride_matches = match_strides(shifted, truth.true_parameters);
  for (auto p : kAllGaitParameters) {
    std::vector<double> est, ref;
    for (const auto& [i, j] : e.stride_matches) {
      est.push_back(parameter_value(shifted.strides[i], p));
      ref.push_back(parameter_value(truth.true_parameters.strides[j], p));
    }
    e.parameters[static_cast<std::size_t>(p)] = accuracy(est, ref);
  }
  if (truth.true_parameters.empty()) e.warnings.push_back("reference has no strides; no parameter statistics");
  else if (e.stride_matches.empty()) e.warnings.push_back("no estimated stride matched the reference");
  return e;
}

std::string modality_report_json(const ModalityEvaluation& eval) { return modality_report(eval).dump(2) + "\n"; }

const ModalityEvaluation* ExperimentReport::find(std::size_t trial, Modality m) const {
  for (const auto& t : trials)
    if (t.index == trial)
      for (const auto& e : t.modalities)
        if (e.modality == m) return &e;
  return nullptr;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t index) { return derive_seed(master, index); }

GaitModel trial_gait(const ExperimentConfig& cfg, std::uint64_t seed) {
  GaitModel g = cfg.gait;
  Rng rng(derive_seed(seed, 3));
  const double speed_factor = rng.uniform(1.0 - cfg.subjects.walking_speed, 1.0 + cfg.subjects.walking_speed);
  const double time_factor = rng.uniform(1.0 - cfg.subjects.stride_time, 1.0 + cfg.subjects.stride_time);
  g.walking_speed *= speed_factor;
  g.stride_time *= time_factor;
  return g;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  {
    auto out = open_output(cfg.output_dir / "config.json");
    out << dump_experiment_config(cfg);
  }

  ExperimentReport report;
  report.trials.resize(cfg.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.trials; i = next++) report.trials[i] = run_trial(cfg, i);
  };
  const std::size_t threads = std::min(cfg.jobs, cfg.trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& t : report.trials) {
    if (!t.ok) {
      ++report.failed_trials;
      report.warnings.push_back("trial " + std::to_string(t.index) + " failed: " + t.error);
      continue;
    }
    for (const auto& e : t.modalities)
      for (const auto& w : e.warnings)
        report.warnings.push_back("trial " + std::to_string(t.index) + " " + to_string(e.modality) + ": " + w);
  }
  aggregate(cfg, report);
  write_report_files(cfg, report);
  return report;
}

void simulate_trial(const ExperimentConfig& cfg, std::size_t index, const std::filesystem::path& dir) {
  cfg.validate();
  std::filesystem::create_directories(dir);
  const std::uint64_t seed = trial_seed(cfg.seed, index);
  const KinematicTruth truth = simulate_walk(trial_gait(cfg, seed), cfg.protocol, derive_seed(seed, 0));
  write_reference_files(dir, truth);
  for (Modality m : cfg.modalities) {
    RangeProfileMatrix profiles = synthesize(truth, cfg.radar(m), cfg.noise,
                                             derive_seed(seed, 1 + static_cast<std::uint64_t>(m)),
                                             cfg.trigger_latency(m));
    write_rpm(dir / (to_string(m) + ".rpm"), profiles);
  }
}

ModalityEvaluation replay(const std::filesystem::path& recording, const std::filesystem::path& truth_sidecar,
                          const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  RangeProfileMatrix profiles = read_rpm(recording);
  validate_pipeline(cfg.pipeline, profiles.config().slow_time_rate);
  cfg.evaluation.validate();
  const KinematicTruth truth = read_truth_sidecar(truth_sidecar);
  std::filesystem::create_directories(out_dir);
  return process_recording(std::move(profiles), truth, cfg, out_dir).eval;
}

}  // namespace gaitradar
