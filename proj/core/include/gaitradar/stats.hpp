// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gaitradar/signal_core.hpp"

namespace gaitradar {

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Sample correlation with a two-sided Student-t p-value (n - 2 dof).
/// Throws InvalidArgument for n < 3 or zero variance.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Two-way random-effects, absolute-agreement, single-measure ICC for two
/// raters. All-equal data give 1.
double icc_2_1(std::span<const double> x, std::span<const double> y);

struct BlandAltman {
  double bias = 0.0;
  double sd_diff = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  std::vector<std::pair<double, double>> points;  // (pair mean, x - y)
};

BlandAltman bland_altman(std::span<const double> x, std::span<const double> y);

struct MannWhitneyResult {
  double u = 0.0;  // U of sample a
  double p = 1.0;  // two-sided
  bool exact = false;
};

inline constexpr std::size_t kMannWhitneyExactLimit = 400;  // n_a * n_b

/// Mid-rank U with an exact permutation p for n_a * n_b <= 400, otherwise the
/// tie-corrected normal approximation with continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Normal-approximation p regardless of sample size.
double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b);

struct AccuracySummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;  // pairs with a zero reference
  std::vector<double> values;
};

/// Per-pair 100 * (1 - |e - r| / |r|), floored at 0.
AccuracySummary accuracy(std::span<const double> estimates, std::span<const double> references);

/// Pools several summaries by their per-pair values.
AccuracySummary pool_accuracy(std::span<const AccuracySummary> parts);

struct AgreementReport {
  double pearson_r = 0.0;
  double pearson_p = 1.0;
  double icc = 0.0;
  BlandAltman bland_altman;
  std::size_t n_pairs = 0;
  bool valid = false;  // false when n < 3 or a series is constant
};

AgreementReport agreement(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1); 0 for n < 2.
double sample_sd(std::span<const double> x);

}  // namespace gaitradar
