// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gaitradar/experiment.hpp"
#include "support.hpp"

using namespace gaitradar;
namespace fs = std::filesystem;

namespace {

ExperimentConfig short_config(const fs::path& out) {
  auto cfg = ExperimentConfig::defaults();
  cfg.gait.trial_duration = 12.0;
  cfg.modalities = {Modality::Uwb};
  cfg.trials = 2;
  cfg.seed = 11;
  cfg.output_dir = out;
  return cfg;
}

// The walking column (last) of a trajectories CSV.
std::vector<bool> walking_column(const fs::path& csv) {
  std::istringstream in(gaitradar::test::slurp(csv));
  std::string line;
  std::getline(in, line);
  std::vector<bool> out;
  while (std::getline(in, line)) out.push_back(line.substr(line.rfind(',') + 1) == "1");
  return out;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parsing keeps the base, rejects unknown keys and round-trips") {
    const auto base = ExperimentConfig::defaults();
    const auto cfg = parse_experiment_config(R"({"seed": 7, "gait": {"walking_speed": 1.0}, "modalities": ["fmcw"]})",
                                             base);
    CHECK(cfg.seed == 7);
    CHECK(cfg.gait.walking_speed == 1.0);
    CHECK(cfg.gait.stride_time == base.gait.stride_time);
    REQUIRE(cfg.modalities.size() == 1);
    CHECK(cfg.modalities[0] == Modality::Fmcw);
    CHECK_THROWS_AS(parse_experiment_config(R"({"sed": 7})", base), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_config(R"({"gait": {"speed": 1.0}})", base), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_config("{", base), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_config(R"({"trials": 0})", base).validate(), InvalidArgument);

    const std::string text = dump_experiment_config(cfg);
    const auto again = parse_experiment_config(text, ExperimentConfig{});
    CHECK(dump_experiment_config(again) == text);
  }

  TEST_CASE("subject spread draws stay inside their bounds") {
    auto cfg = ExperimentConfig::defaults();
    for (std::size_t i = 0; i < 50; ++i) {
      const auto g = trial_gait(cfg, trial_seed(cfg.seed, i));
      CHECK(g.walking_speed >= cfg.gait.walking_speed * (1.0 - cfg.subjects.walking_speed));
      CHECK(g.walking_speed <= cfg.gait.walking_speed * (1.0 + cfg.subjects.walking_speed));
      CHECK(g.stride_time >= cfg.gait.stride_time * (1.0 - cfg.subjects.stride_time));
      CHECK(g.stride_time <= cfg.gait.stride_time * (1.0 + cfg.subjects.stride_time));
    }
    cfg.subjects = {0.0, 0.0};
    const auto g = trial_gait(cfg, 123);
    CHECK(g.walking_speed == cfg.gait.walking_speed);
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    cfg.subjects.walking_speed = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }

  TEST_CASE("runs are deterministic and independent of the thread count") {
    const auto root = gaitradar::test::scratch_dir("experiment_determinism");
    auto a = short_config(root / "a");
    auto b = short_config(root / "b");
    b.jobs = 2;
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    CHECK(ra.failed_trials == 0);
    CHECK(rb.failed_trials == 0);
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a.output_dir)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), a.output_dir);
      if (rel == "config.json") continue;  // records the job count
      INFO(rel.string());
      REQUIRE(fs::exists(b.output_dir / rel));
      CHECK(gaitradar::test::slurp(entry.path()) == gaitradar::test::slurp(b.output_dir / rel));
      ++compared;
    }
    CHECK(compared >= 10);
    const auto* e = ra.find(0, Modality::Uwb);
    REQUIRE(e != nullptr);
    for (const auto& s : e->estimated.strides)
      CHECK(std::abs(s.stance_time + s.swing_time - s.stride_time) <= 1e-12);
  }

  TEST_CASE("replaying a stored recording reproduces the live outputs") {
    const auto root = gaitradar::test::scratch_dir("experiment_replay");
    auto cfg = short_config(root / "live");
    cfg.trials = 1;
    cfg.save_recordings = true;
    const auto live = run_experiment(cfg);
    REQUIRE(live.failed_trials == 0);
    const auto trial = cfg.output_dir / "trial_000";
    replay(trial / "uwb.rpm", trial / "reference.json", cfg, root / "replay");
    for (const char* name : {"uwb_report.json", "uwb_events.csv", "uwb_strides.csv", "uwb_trajectories.csv"}) {
      INFO(name);
      CHECK(gaitradar::test::slurp(trial / name) == gaitradar::test::slurp(root / "replay" / name));
    }

    // A lower confidence threshold can only grow the walking mask.
    auto loose = cfg;
    loose.pipeline.walkseg.confidence_threshold = 0.5;
    replay(trial / "uwb.rpm", trial / "reference.json", loose, root / "loose");
    const auto strict_mask = walking_column(trial / "uwb_trajectories.csv");
    const auto loose_mask = walking_column(root / "loose" / "uwb_trajectories.csv");
    REQUIRE(strict_mask.size() == loose_mask.size());
    std::size_t strict_count = 0, loose_count = 0;
    for (std::size_t i = 0; i < strict_mask.size(); ++i) {
      if (strict_mask[i]) CHECK(loose_mask[i]);
      strict_count += strict_mask[i] ? 1 : 0;
      loose_count += loose_mask[i] ? 1 : 0;
    }
    CHECK(strict_count > 0);
    CHECK(loose_count >= strict_count);

    simulate_trial(cfg, 0, root / "sim");
    CHECK(fs::exists(root / "sim" / "uwb.rpm"));
    CHECK(fs::exists(root / "sim" / "reference.json"));
    replay(root / "sim" / "uwb.rpm", root / "sim" / "reference.json", cfg, root / "sim_replay");
    CHECK(gaitradar::test::slurp(trial / "uwb_report.json") ==
          gaitradar::test::slurp(root / "sim_replay" / "uwb_report.json"));
  }

  TEST_CASE("a subject who never walks yields warnings, not a crash") {
    const auto root = gaitradar::test::scratch_dir("experiment_standing");
    auto cfg = short_config(root);
    cfg.trials = 1;
    cfg.gait.walking_speed = 0.0;
    cfg.subjects = {0.0, 0.0};
    const auto r = run_experiment(cfg);
    REQUIRE(r.trials.size() == 1);
    if (r.trials[0].ok) {
      const auto* e = r.find(0, Modality::Uwb);
      REQUIRE(e != nullptr);
      CHECK_FALSE(e->warnings.empty());
      CHECK(e->estimated.size() <= 1);
    } else {
      CHECK_FALSE(r.trials[0].error.empty());
    }
    CHECK(fs::exists(root / "report.json"));
  }
}
