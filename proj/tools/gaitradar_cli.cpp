// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

// gaitradar command-line front end: simulate, run, replay, stats.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaitradar/experiment.hpp"
#include "gaitradar/rpm_io.hpp"
#include "gaitradar/stats.hpp"

namespace {

using namespace gaitradar;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string modality = "both";
  bool emit_rdt = false;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> trials;
  bool save_recordings = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config; absent keys keep their defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--modality", o.modality, "Radar modality")->check(CLI::IsMember({"uwb", "fmcw", "both"}));
  cmd->add_flag("--emit-rdt", o.emit_rdt, "Dump contrast-enhanced range-Doppler frames");
  cmd->add_option("--jobs", o.jobs, "Trials processed in parallel")->check(CLI::PositiveNumber);
}

ExperimentConfig build_config(const CommonOptions& o, bool modality_given) {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  if (!o.config_path.empty()) cfg = load_experiment_config(o.config_path, cfg);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (modality_given || o.config_path.empty()) {
    if (o.modality == "both")
      cfg.modalities = {Modality::Uwb, Modality::Fmcw};
    else
      cfg.modalities = {modality_from_string(o.modality)};
  }
  if (o.emit_rdt) cfg.emit_rdt = true;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.trials) cfg.trials = *o.trials;
  if (o.save_recordings) cfg.save_recordings = true;
  return cfg;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

void print_summary(const ExperimentReport& r) {
  std::cout << "trials: " << r.trials.size() << " (" << r.failed_trials << " failed)\n";
  for (const auto& [m, acc] : r.parameter_accuracy) {
    std::cout << to_string(m) << " parameter accuracy:";
    for (auto p : kAllGaitParameters) {
      const auto& a = acc[static_cast<std::size_t>(p)];
      std::cout << ' ' << to_string(p) << '=' << (a.n ? pct(a.mean) : "n/a");
    }
    std::cout << '\n';
  }
  for (const auto& [m, acc] : r.event_accuracy) {
    std::cout << to_string(m) << " event accuracy:";
    for (auto k : kAllEventMetrics) {
      const auto& a = acc[static_cast<std::size_t>(k)];
      std::cout << ' ' << to_string(k) << '=' << (a.n ? pct(a.mean) : "n/a");
    }
    std::cout << '\n';
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

// Reads two named numeric columns of a headed CSV; rows with an empty cell in
// either column are skipped.
std::pair<std::vector<double>, std::vector<double>> read_columns(const std::string& path, const std::string& xcol,
                                                                 const std::string& ycol) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(path + ": no column '" + name + "'");
  };
  const std::size_t ix = column(xcol), iy = column(ycol);
  std::vector<double> x, y;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() <= std::max(ix, iy)) throw Error(path + ": row " + std::to_string(row) + " is short");
    if (cells[ix].empty() || cells[iy].empty()) continue;
    try {
      x.push_back(std::stod(cells[ix]));
      y.push_back(std::stod(cells[iy]));
    } catch (const std::exception&) {
      throw Error(path + ": row " + std::to_string(row) + " is not numeric");
    }
  }
  return {x, y};
}

int cmd_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu", i);
    simulate_trial(cfg, i, cfg.output_dir / name);
    std::cout << "wrote " << (cfg.output_dir / name).string() << '\n';
  }
  return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
  const ExperimentReport r = run_experiment(cfg);
  print_summary(r);
  std::cout << "outputs: " << cfg.output_dir.string() << '\n';
  return r.failed() ? 1 : 0;
}

int cmd_replay(ExperimentConfig cfg, const std::string& recording, const std::string& truth, bool out_given) {
  if (!out_given) cfg.output_dir = std::filesystem::path(recording).parent_path() / "replay";
  const ModalityEvaluation e = replay(recording, truth, cfg, cfg.output_dir);
  std::cout << modality_report_json(e);
  for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_stats(const std::string& path, const std::string& xcol, const std::string& ycol) {
  const auto [x, y] = read_columns(path, xcol, ycol);
  const AgreementReport a = agreement(x, y);
  std::cout << "n_pairs " << a.n_pairs << '\n';
  if (a.valid) {
    std::cout << "pearson_r " << a.pearson_r << "\npearson_p " << a.pearson_p << "\nicc_2_1 " << a.icc << '\n'
              << "bias " << a.bland_altman.bias << "\nloa " << a.bland_altman.loa_low << ' '
              << a.bland_altman.loa_high << '\n';
  } else {
    std::cout << "agreement: not enough varying pairs\n";
  }
  if (!x.empty() && !y.empty()) {
    const MannWhitneyResult mw = mann_whitney_u(x, y);
    std::cout << "mann_whitney_u " << mw.u << "\nmann_whitney_p " << mw.p << (mw.exact ? " (exact)" : " (normal)")
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar gait analysis: simulate walkers, run the pipeline, score and compare modalities"};
  app.require_subcommand(1);

  CommonOptions sim_opts, run_opts, replay_opts;

  auto* sim = app.add_subcommand("simulate", "Write synthetic recordings and reference sidecars");
  add_common(sim, sim_opts);
  sim->add_option("--trials", sim_opts.trials, "Number of trials")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Simulate, process and score every trial");
  add_common(run, run_opts);
  run->add_option("--trials", run_opts.trials, "Number of trials")->check(CLI::PositiveNumber);
  run->add_flag("--save-recordings", run_opts.save_recordings, "Keep the synthesized recordings");

  std::string recording, truth;
  auto* rep = app.add_subcommand("replay", "Reprocess a stored recording against its reference sidecar");
  add_common(rep, replay_opts);
  rep->add_option("recording", recording, "Recording file (.rpm)")->required()->check(CLI::ExistingFile);
  rep->add_option("--truth", truth, "Reference sidecar (JSON)")->required()->check(CLI::ExistingFile);

  std::string csv, xcol = "x", ycol = "y";
  auto* st = app.add_subcommand("stats", "Agreement and Mann-Whitney test of two CSV columns");
  st->add_option("csv", csv, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
  st->add_option("--x", xcol, "First column");
  st->add_option("--y", ycol, "Second column");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(build_config(sim_opts, sim->count("--modality") > 0));
    if (run->parsed()) return cmd_run(build_config(run_opts, run->count("--modality") > 0));
    if (rep->parsed())
      return cmd_replay(build_config(replay_opts, true), recording, truth, rep->count("--out") > 0);
    if (st->parsed()) return cmd_stats(csv, xcol, ycol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
