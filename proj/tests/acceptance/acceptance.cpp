// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaitradar/doppler.hpp"
#include "gaitradar/experiment.hpp"
#include "gaitradar/gait.hpp"
#include "gaitradar/preprocess.hpp"
#include "gaitradar/random.hpp"
#include "gaitradar/synth.hpp"
#include "stats_check.hpp"
#include "support.hpp"

using namespace gaitradar;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [miss: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  std::printf("criterion %d %-30s %s%s\n", id, name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------

void trajectory_fidelity(const ExperimentConfig& cfg, const ExperimentReport& r) {
  Verdict v;
  for (Modality m : cfg.modalities) {
    double min_tr = 1.0, min_tv = 1.0, min_fv = 1.0, sum_tr = 0.0, sum_tv = 0.0, sum_fv = 0.0, worst_time = 0.0;
    std::size_t n = 0;
    for (const auto& t : r.trials) {
      const auto* e = r.find(t.index, m);
      if (e == nullptr) continue;
      ++n;
      min_tr = std::min(min_tr, e->torso_range.r);
      min_tv = std::min(min_tv, e->torso_velocity.r);
      min_fv = std::min(min_fv, e->feet_velocity.r);
      sum_tr += e->torso_range.r;
      sum_tv += e->torso_velocity.r;
      sum_fv += e->feet_velocity.r;
      for (std::size_t k = 0; k < t.modalities.size(); ++k)
        if (t.modalities[k].modality == m && k < t.pipeline_seconds.size())
          worst_time = std::max(worst_time, t.pipeline_seconds[k] * 75.0 / cfg.gait.trial_duration);
    }
    const std::string tag = to_string(m);
    v.require(n == r.trials.size(), tag + " trials missing");
    if (n == 0) continue;
    const double dn = static_cast<double>(n);
    v.detail << ' ' << tag << ": torso range r " << fmt(sum_tr / dn) << " (min " << fmt(min_tr) << "), torso vel r "
             << fmt(sum_tv / dn) << " (min " << fmt(min_tv) << "), feet vel r " << fmt(sum_fv / dn) << " (min "
             << fmt(min_fv) << "), " << fmt(worst_time, 1) << " s per 75 s;";
    v.require(min_tr >= 0.995, tag + " torso range r");
    v.require(min_tv >= 0.995, tag + " torso velocity r");
    v.require(min_fv >= 0.90, tag + " feet velocity r");
    v.require(worst_time < 10.0, tag + " runtime");
  }
  report(1, "trajectory fidelity", v);
}

void event_detection(const ExperimentReport& r) {
  Verdict v;
  for (const auto& [m, acc] : r.event_accuracy) {
    v.detail << ' ' << to_string(m) << ':';
    for (EventMetric em : kAllEventMetrics) {
      const auto& a = acc[static_cast<std::size_t>(em)];
      const bool time = em == EventMetric::HsTime || em == EventMetric::ToTime;
      const double need = time ? 99.5 : 88.0;
      v.detail << ' ' << to_string(em) << ' ' << fmt(a.mean, 2) << "% (n " << a.n << ')';
      v.require(a.n > 0 && a.mean >= need, to_string(m) + " " + to_string(em));
    }
    v.detail << ';';
  }
  v.require(!r.event_accuracy.empty(), "no event accuracy");
  report(2, "event detection", v);
}

double parameter_threshold(GaitParameter p) {
  switch (p) {
    case GaitParameter::StrideTime: return 97.0;
    case GaitParameter::WalkingSpeed: return 93.0;
    case GaitParameter::StrideLength: return 91.0;
    case GaitParameter::StanceTime: return 89.0;
    case GaitParameter::SwingTime: return 84.0;
  }
  return 100.0;
}

void parameter_accuracy(const ExperimentReport& r) {
  Verdict v;
  for (const auto& [m, acc] : r.parameter_accuracy) {
    v.detail << ' ' << to_string(m) << ':';
    for (GaitParameter p : kAllGaitParameters) {
      const auto& a = acc[static_cast<std::size_t>(p)];
      v.detail << ' ' << to_string(p) << ' ' << fmt(a.mean, 2) << '%';
      v.require(a.n > 0 && a.mean >= parameter_threshold(p), to_string(m) + " " + to_string(p));
    }
    v.detail << ';';
  }
  v.require(!r.parameter_accuracy.empty(), "no parameter accuracy");
  report(3, "parameter accuracy", v);
}

void cross_modality(const ExperimentReport& r) {
  Verdict v;
  const std::array<AccuracySummary, 5>* uwb = nullptr;
  const std::array<AccuracySummary, 5>* fmcw = nullptr;
  for (const auto& [m, acc] : r.parameter_accuracy) (m == Modality::Uwb ? uwb : fmcw) = &acc;
  v.require(uwb != nullptr && fmcw != nullptr, "both modalities");
  if (uwb != nullptr && fmcw != nullptr) {
    v.detail << " gaps:";
    for (GaitParameter p : kAllGaitParameters) {
      const auto i = static_cast<std::size_t>(p);
      const double gap = std::abs((*uwb)[i].mean - (*fmcw)[i].mean);
      v.detail << ' ' << to_string(p) << ' ' << fmt(gap, 2);
      v.require(gap <= 4.1, "gap " + to_string(p));
    }
  }
  for (GaitParameter p : {GaitParameter::WalkingSpeed, GaitParameter::StrideTime}) {
    const ParameterAgreement* a = nullptr;
    for (const auto& x : r.agreement)
      if (x.comparison == "uwb_vs_fmcw" && x.parameter == p) a = &x;
    const double need = p == GaitParameter::WalkingSpeed ? 0.95 : 0.85;
    if (a == nullptr || !a->report.valid) {
      v.require(false, to_string(p) + " pearson unavailable");
      continue;
    }
    v.detail << "; " << to_string(p) << " pearson " << fmt(a->report.pearson_r) << " (n " << a->report.n_pairs << ')';
    v.require(a->report.pearson_r >= need, to_string(p) + " pearson");
  }
  report(4, "cross-modality equivalence", v);
}

void segmentation(const ExperimentReport& r) {
  Verdict v;
  std::size_t scored = 0, exact = 0;
  double worst = 0.0;
  for (const auto& t : r.trials)
    for (const auto& e : t.modalities) {
      ++scored;
      if (e.segments.estimated == e.segments.reference) ++exact;
      worst = std::max(worst, e.segments.max_boundary_error);
    }
  v.detail << " two-traversal trials: " << exact << '/' << scored << " exact counts, worst boundary " << fmt(worst, 3)
           << " s;";
  v.require(scored > 0 && exact == scored, "segment count");
  v.require(worst <= 0.5, "boundary error");

  // 1000 one-second windows of white noise at a 100 Hz frame rate.
  Rng rng(2024);
  Trajectory noise;
  for (std::size_t i = 0; i < 999 * 5 + 100; ++i) {
    noise.time.push_back(static_cast<double>(i) * 0.01);
    noise.range.push_back(3.0);
    noise.velocity.push_back(std::abs(rng.normal()));
  }
  const WalkSegConfig wcfg;
  const auto c = walking_confidence(noise, wcfg);
  const auto high = std::count_if(c.value.begin(), c.value.end(),
                                  [&](double x) { return x >= wcfg.confidence_threshold; });
  const double rate = static_cast<double>(high) / static_cast<double>(c.value.size());
  v.detail << " white noise " << high << '/' << c.value.size() << " windows = " << fmt(100.0 * rate, 2) << '%';
  v.require(c.value.size() == 1000 && rate < 0.05, "white-noise rate");
  report(5, "walking segmentation", v);
}

double db_power_ratio(const RangeProfileMatrix& after, const RangeProfileMatrix& before, std::size_t bin) {
  const std::size_t a = after.slow_samples() / 10, b = after.slow_samples() - a;
  double pa = 0.0, pb = 0.0;
  for (std::size_t n = a; n < b; ++n) {
    pa += std::norm(after(n, bin));
    pb += std::norm(before(n, bin));
  }
  return 10.0 * std::log10(pa / pb);
}

void clutter_suppression() {
  Verdict v;
  for (auto rc : {RadarConfig::uwb(), RadarConfig::fmcw()}) {
    // Static point scatterer at 3 m plus a 1 m/s Doppler tone in another bin.
    const auto scene = gaitradar::test::point_scene({3.0, 0.5, 1.0}, {}, 6.0);
    const NoiseModel quiet = NoiseModel::noiseless();
    auto profiles = synthesize(scene, rc, quiet, 1);
    const double fd = 2.0 / rc.wavelength;
    const std::size_t tone_bin = 150;
    for (std::size_t i = 0; i < profiles.slow_samples(); ++i)
      profiles(i, tone_bin) = std::polar(1.0, 2.0 * kPi * fd * static_cast<double>(i) / rc.slow_time_rate);
    const RangeProfileMatrix before = profiles;
    suppress_clutter(profiles, ClutterFilterConfig{});
    const auto clutter_bin = static_cast<std::size_t>(3.0 / rc.range_resolution);
    const double static_db = db_power_ratio(profiles, before, clutter_bin);
    const double tone_db = db_power_ratio(profiles, before, tone_bin);
    v.detail << ' ' << to_string(rc.modality) << ": static " << fmt(static_db, 1) << " dB, 1 m/s " << fmt(tone_db, 3)
             << " dB;";
    v.require(static_db <= -40.0, to_string(rc.modality) + " static");
    v.require(tone_db >= -1.0, to_string(rc.modality) + " tone");
  }
  report(6, "clutter suppression", v);
}

void statistics_oracles() {
  Verdict v;
  const auto d = oracle::check_stats(20260101, 100);
  v.detail << " worst deviation " << d.worst() << " (pearson r " << d.pearson_r << ", p " << d.pearson_p << ", icc "
           << d.icc << ", bland-altman " << d.bland_altman << ", U " << d.mw_u << ", exact p " << d.mw_exact_p
           << ", normal p " << d.mw_normal_p << "); " << d.exact_cases << " exact, " << d.normal_cases << " normal";
  v.require(d.worst() <= 1e-9, "oracle deviation");
  v.require(d.exact_cases > 0 && d.normal_cases > 0, "both Mann-Whitney paths");
  report(7, "statistics oracles", v);
}

bool confidence_in_unit_interval(const fs::path& csv, std::size_t& rows) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) return false;
    const double c = std::stod(line.substr(comma + 1));
    if (!(c >= 0.0 && c <= 1.0)) return false;
    ++rows;
  }
  return true;
}

void invariants(const ExperimentReport& main, const ExperimentConfig& main_cfg, const fs::path& det_a,
                const fs::path& det_b) {
  Verdict v;
  std::size_t strides = 0;
  double worst = 0.0;
  for (const auto& t : main.trials)
    for (const auto& e : t.modalities)
      for (const auto& s : e.estimated.strides) {
        ++strides;
        worst = std::max(worst, std::abs(s.stance_time + s.swing_time - s.stride_time) /
                                    (std::numeric_limits<double>::epsilon() * s.stride_time));
      }
  v.detail << ' ' << strides << " strides, worst stance+swing-stride " << fmt(worst, 1) << " ulp;";
  v.require(strides > 0 && worst <= 2.0, "stance + swing = stride");

  std::size_t rows = 0;
  bool bounded = true;
  for (const auto& entry : fs::recursive_directory_iterator(main_cfg.output_dir))
    if (entry.path().filename().string().ends_with("_confidence.csv"))
      bounded = confidence_in_unit_interval(entry.path(), rows) && bounded;
  v.detail << ' ' << rows << " confidence values in [0,1]: " << (bounded ? "yes" : "no") << ';';
  v.require(bounded && rows > 0, "confidence bounds");

  Rng rng(77);
  int argmax_kept = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> frame(180 * 128);
    for (double& x : frame) x = std::abs(rng.normal()) * rng.uniform();
    const auto peak = std::max_element(frame.begin(), frame.end()) - frame.begin();
    NakaRushtonConfig nr;
    nr.semi_saturation_quantile = rng.uniform(0.5, 0.9999);
    naka_rushton_frame(frame, nr);
    if (std::max_element(frame.begin(), frame.end()) - frame.begin() == peak) ++argmax_kept;
  }
  v.detail << " contrast argmax kept " << argmax_kept << "/200;";
  v.require(argmax_kept == 200, "argmax preservation");

  std::size_t compared = 0, differing = 0;
  // The rerun covers the first trials only; per-trial files depend on nothing else.
  for (const auto& entry : fs::recursive_directory_iterator(det_b)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), det_b);
    if (!rel.begin()->string().starts_with("trial_")) continue;
    ++compared;
    if (!fs::exists(det_a / rel) || slurp(entry.path()) != slurp(det_a / rel)) ++differing;
  }
  v.detail << " determinism " << compared - differing << '/' << compared << " files identical";
  v.require(compared > 0 && differing == 0, "determinism");
  report(8, "structural invariants", v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitradar acceptance run"};
  std::size_t trials = 10;
  std::size_t jobs = 1;
  std::string out = (fs::temp_directory_path() / "gaitradar_acceptance").string();
  app.add_option("--trials", trials, "Trials in the main run")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Scratch output directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path root = out;
  fs::remove_all(root);

  try {
    auto cfg = ExperimentConfig::defaults();
    cfg.trials = trials;
    cfg.jobs = jobs;
    cfg.output_dir = root / "main";
    std::printf("main run: %zu trials of %.0f s, both modalities, %.0f dB SNR\n", cfg.trials, cfg.gait.trial_duration,
                cfg.noise.snr_db);
    std::fflush(stdout);
    const auto main_report = run_experiment(cfg);
    for (const auto& t : main_report.trials)
      if (!t.ok) std::printf("trial %zu failed: %s\n", t.index, t.error.c_str());

    // Two traversals with one turn; the first trials are rerun for the determinism check.
    auto seg = ExperimentConfig::defaults();
    seg.protocol.max_traversals = 2;
    seg.gait.trial_duration = 25.0;
    seg.trials = 10;
    seg.seed = 7;
    seg.jobs = jobs;
    seg.output_dir = root / "segments_a";
    const auto seg_report = run_experiment(seg);
    seg.trials = 2;
    seg.output_dir = root / "segments_b";
    (void)run_experiment(seg);

    trajectory_fidelity(cfg, main_report);
    event_detection(main_report);
    parameter_accuracy(main_report);
    cross_modality(main_report);
    segmentation(seg_report);
    clutter_suppression();
    statistics_oracles();
    invariants(main_report, cfg, root / "segments_a", root / "segments_b");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
