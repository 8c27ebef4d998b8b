// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaitradar/gait.hpp"
#include "gaitradar/pipeline.hpp"
#include "gaitradar/signal_core.hpp"
#include "gaitradar/stats.hpp"
#include "gaitradar/synth.hpp"

namespace gaitradar {

/// How estimates are scored against the reference.
struct EvaluationConfig {
  // Event pairing tolerance, s. Half of a nominal 0.55 s step.
  double event_match_tolerance = 0.275;
  // Largest trigger latency searched by the stream alignment, s.
  double max_alignment_lag = 0.5;
  bool align = true;

  void validate() const;
};

/// Between-trial gait variation, standing in for a group of walkers. Each
/// trial scales the walking speed and stride time by independent uniform
/// factors in [1 - spread, 1 + spread].
/// The speed spread is capped by the swing-speed limit: at a 0.6 duty factor
/// the peak foot speed is five times the walking speed.
struct SubjectSpread {
  double walking_speed = 0.1;
  double stride_time = 0.08;

  void validate() const;
};

struct ExperimentConfig {
  GaitModel gait;
  SubjectSpread subjects;
  WalkProtocol protocol;
  NoiseModel noise;
  RadarConfig uwb = RadarConfig::uwb();
  RadarConfig fmcw = RadarConfig::fmcw();
  // Radar start delay relative to the reference clock, s, per modality.
  double uwb_trigger_latency = 0.0;
  double fmcw_trigger_latency = 0.0;
  PipelineConfig pipeline;
  EvaluationConfig evaluation;
  std::vector<Modality> modalities{Modality::Uwb, Modality::Fmcw};
  std::size_t trials = 10;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "gaitradar-out";
  std::size_t jobs = 1;
  bool save_recordings = false;
  bool emit_rdt = false;
  double rdt_emit_interval = 5.0;  // s between dumped frames

  /// Defaults with two static reflectors inside the walkway's range span.
  static ExperimentConfig defaults();

  const RadarConfig& radar(Modality m) const { return m == Modality::Uwb ? uwb : fmcw; }
  double trigger_latency(Modality m) const { return m == Modality::Uwb ? uwb_trigger_latency : fmcw_trigger_latency; }

  void validate() const;
};

/// JSON text to config. Keys absent from the text keep the values of `base`;
/// unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text, const ExperimentConfig& base);
ExperimentConfig load_experiment_config(const std::filesystem::path& path, const ExperimentConfig& base);
std::string dump_experiment_config(const ExperimentConfig& config);

/// Pearson r of one pipeline trajectory against the reference; `valid` is
/// false when fewer than three frames qualify or a series is constant.
struct TrajectoryFit {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  bool valid = false;
};

struct SegmentScore {
  std::size_t estimated = 0;
  std::size_t reference = 0;
  // Largest begin or end offset over reference intervals paired by overlap, s;
  // infinite when some reference interval has no overlapping estimate.
  double max_boundary_error = 0.0;
};

enum class EventMetric { HsTime, HsRange, ToTime, ToRange };
inline constexpr EventMetric kAllEventMetrics[] = {EventMetric::HsTime, EventMetric::HsRange, EventMetric::ToTime,
                                                   EventMetric::ToRange};
std::string to_string(EventMetric m);

/// One modality of one trial, scored against the reference.
struct ModalityEvaluation {
  Modality modality = Modality::Uwb;
  double alignment_lag = 0.0;  // s the radar clock trails the reference
  bool aligned = false;
  TrajectoryFit torso_range;
  TrajectoryFit torso_velocity;
  TrajectoryFit feet_range;
  TrajectoryFit feet_velocity;
  SegmentScore segments;
  std::array<AccuracySummary, 4> events;      // indexed by EventMetric
  std::array<AccuracySummary, 5> parameters;  // indexed by GaitParameter
  GaitParameterSet estimated;
  // Strides on the reference clock, paired with reference strides.
  MatchList stride_matches;
  std::size_t hs_detected = 0;
  std::size_t to_detected = 0;
  std::vector<std::string> warnings;
};

/// Scores a pipeline result against reference kinematics. When enabled, the
/// trigger latency is estimated first and estimates are moved onto the
/// reference clock before pairing.
ModalityEvaluation evaluate(const PipelineResult& result, const KinematicTruth& truth, Modality modality,
                            const EvaluationConfig& cfg);

/// Per-trial report as JSON text, the same for a live run and a replay.
std::string modality_report_json(const ModalityEvaluation& eval);

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  GaitParameterSet reference;
  std::vector<ModalityEvaluation> modalities;
  // Wall-clock pipeline time per modality, s. Kept out of written outputs.
  std::vector<double> pipeline_seconds;
};

struct ParameterAgreement {
  std::string comparison;  // "uwb_vs_reference", "fmcw_vs_reference", "uwb_vs_fmcw"
  GaitParameter parameter = GaitParameter::StrideTime;
  AgreementReport report;
};

struct AccuracyComparison {
  std::string metric;  // parameter or event metric name
  AccuracySummary uwb;
  AccuracySummary fmcw;
  MannWhitneyResult test;
  bool tested = false;
};

struct ExperimentReport {
  std::vector<TrialResult> trials;
  std::size_t failed_trials = 0;
  // Pooled per-pair accuracies, [modality][parameter].
  std::vector<std::pair<Modality, std::array<AccuracySummary, 5>>> parameter_accuracy;
  std::vector<std::pair<Modality, std::array<AccuracySummary, 4>>> event_accuracy;
  std::vector<ParameterAgreement> agreement;
  std::vector<AccuracyComparison> modality_comparison;  // empty unless both modalities ran
  std::vector<std::string> warnings;

  bool failed() const { return !trials.empty() && failed_trials == trials.size(); }
  const ModalityEvaluation* find(std::size_t trial, Modality m) const;
};

/// Simulates, synthesizes and processes every trial, then writes per-trial
/// files and the pooled tables under config.output_dir. Trials run on up to
/// config.jobs threads; outputs do not depend on the thread count.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes the recordings and reference sidecar of one trial without
/// processing them.
void simulate_trial(const ExperimentConfig& config, std::size_t trial, const std::filesystem::path& dir);

/// Reprocesses a stored recording against its reference sidecar and writes
/// the per-modality outputs of one trial into `out_dir`.
ModalityEvaluation replay(const std::filesystem::path& recording, const std::filesystem::path& truth_sidecar,
                          const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Seed of trial `index` under the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t index);

/// Gait model of the trial with the given seed, after the subject spread.
GaitModel trial_gait(const ExperimentConfig& config, std::uint64_t trial_seed);

}  // namespace gaitradar
