// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

// Brute-force reference implementations of the agreement statistics, written
// independently of the library so each can serve as a test oracle.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gaitradar/random.hpp"

namespace gaitradar::oracle {

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  // Raw-moment formula.
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

// Two-sided p of Student t by Simpson quadrature of the density over [0, |t|].
inline double student_t_two_sided_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * std::numbers::pi);
  auto pdf = [&](double u) { return c * std::pow(1.0 + u * u / df, -(df + 1.0) / 2.0); };
  const double a = std::abs(t);
  const int n = 200000;
  const double h = a / n;
  double s = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return std::max(0.0, 1.0 - 2.0 * s * h / 3.0);
}

inline double pearson_p(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  return student_t_two_sided_p(r * std::sqrt(df / (1.0 - r * r)), df);
}

// ICC(2,1) from the full two-way ANOVA table, residuals formed explicitly.
inline double icc_2_1(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const std::vector<const std::vector<double>*> raters{&x, &y};
  const double k = 2.0;
  std::vector<double> row(n, 0.0), col(2, 0.0);
  double grand = 0.0;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      row[i] += (*raters[j])[i] / k;
      col[j] += (*raters[j])[i] / static_cast<double>(n);
      grand += (*raters[j])[i] / (k * static_cast<double>(n));
    }
  double ssr = 0.0, ssc = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) ssr += k * (row[i] - grand) * (row[i] - grand);
  for (std::size_t j = 0; j < 2; ++j) ssc += static_cast<double>(n) * (col[j] - grand) * (col[j] - grand);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double e = (*raters[j])[i] - row[i] - col[j] + grand;
      sse += e * e;
    }
  const double nn = static_cast<double>(n);
  const double msr = ssr / (nn - 1.0), msc = ssc / (k - 1.0), mse = sse / ((nn - 1.0) * (k - 1.0));
  return (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / nn);
}

struct BlandAltmanOracle {
  double bias, sd, low, high;
};

inline BlandAltmanOracle bland_altman(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] - y[i];
  const double bias = s / n;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i] - bias) * (x[i] - y[i] - bias);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {bias, sd, bias - 1.96 * sd, bias + 1.96 * sd};
}

// U of sample a by pairwise comparison, ties counting one half.
inline double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double p : a)
    for (double q : b) u += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return u;
}

// Exact two-sided p by enumerating every relabelling of the pooled sample.
inline double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto n = static_cast<unsigned>(pooled.size());
  const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::abs(mann_whitney_u(a, b) - mu);
  std::uint64_t hit = 0, all = 0;
  std::vector<double> ga, gb;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != a.size()) continue;
    ga.clear();
    gb.clear();
    for (unsigned i = 0; i < n; ++i) (mask >> i & 1u ? ga : gb).push_back(pooled[i]);
    ++all;
    if (std::abs(mann_whitney_u(ga, gb) - mu) >= observed - 1e-9) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(all);
}

// Tie-corrected normal approximation with continuity correction.
inline double mann_whitney_normal_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size()), n = na + nb;
  double ties = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += (t * t * t - t) / 12.0;
    i = j;
  }
  const double sigma = std::sqrt(na * nb / (n * (n - 1.0)) * ((n * n * n - n) / 12.0 - ties));
  const double z = std::max(std::abs(mann_whitney_u(a, b) - na * nb / 2.0) - 0.5, 0.0) / sigma;
  return std::min(1.0, 2.0 * 0.5 * std::erfc(z / std::numbers::sqrt2));
}

inline double accuracy_mean(const std::vector<double>& e, const std::vector<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += std::max(0.0, 100.0 - 100.0 * std::abs(e[i] / r[i] - 1.0));
  return s / static_cast<double>(e.size());
}

// Correlated pair sample of size n; `tied` draws from a coarse grid so ties occur.
inline void draw_pairs(Rng& rng, std::size_t n, bool tied, std::vector<double>& x, std::vector<double>& y) {
  x.resize(n);
  y.resize(n);
  const double rho = rng.uniform(-0.95, 0.95);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal();
    x[i] = 1.0 + z1;
    y[i] = 2.0 + rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    if (tied) {
      x[i] = std::round(x[i] * 2.0) / 2.0;
      y[i] = std::round(y[i] * 2.0) / 2.0;
    }
  }
}

}  // namespace gaitradar::oracle
