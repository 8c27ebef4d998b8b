// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace gaitradar::detail {

// Linear-interpolation quantile (Hyndman-Fan type 7). Reorders `v`.
inline double quantile_inplace(std::span<double> v, double q) {
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (frac == 0.0 || lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + frac * (b - a);
}

// Whether the type-7 q-quantile of `v` is <= t, in one pass without a copy.
inline bool quantile_at_most(std::span<const double> v, double q, double t) {
  if (v.empty()) return true;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::size_t below = 0;
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
  for (double x : v) {
    const bool in = x <= t;
    below += in ? 1 : 0;
    a = in && x > a ? x : a;
    b = !in && x < b ? x : b;
  }
  // Sorted positions lo and lo + 1 straddle t only when exactly lo + 1 values are <= t.
  if (below >= lo + 2) return true;
  if (below <= lo) return false;
  if (frac == 0.0 || lo + 1 >= v.size()) return true;
  return a + frac * (b - a) <= t;
}

// Type-7 q-quantile of the positive entries of `v`, without a copy when q is
// high: only the values from sorted position floor(q (n - 1)) upward are kept.
inline double positive_quantile(std::span<const double> v, double q) {
  std::size_t n = 0;
  for (double x : v) n += x > 0.0 ? 1 : 0;
  if (n == 0) return 0.0;
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  const std::size_t keep = n - lo;
  if (keep > n / 8) {
    std::vector<double> all;
    all.reserve(n);
    for (double x : v)
      if (x > 0.0) all.push_back(x);
    return quantile_inplace(all, q);
  }
  std::priority_queue<double, std::vector<double>, std::greater<>> top;
  for (double x : v) {
    if (!(x > 0.0)) continue;
    if (top.size() < keep) {
      top.push(x);
    } else if (x > top.top()) {
      top.pop();
      top.push(x);
    }
  }
  const double a = top.top();
  if (frac == 0.0 || keep < 2) return a;
  top.pop();
  return a + frac * (top.top() - a);
}

// Offset in [-0.5, 0.5] of the vertex of the parabola through (-1, a), (0, b), (1, c).
inline double parabolic_offset(double a, double b, double c) {
  const double den = a - 2.0 * b + c;
  if (den >= 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

}  // namespace gaitradar::detail
