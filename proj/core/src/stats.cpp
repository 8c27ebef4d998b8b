// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include "gaitradar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace gaitradar {

namespace {

void require_pairs(std::span<const double> x, std::span<const double> y, std::size_t min_n, const char* who) {
  if (x.size() != y.size()) throw InvalidArgument(std::string(who) + ": inputs differ in length");
  if (x.size() < min_n) throw InvalidArgument(std::string(who) + ": too few pairs");
}

// Mid-ranks (1-based) of the pooled sample, and the tie term sum(t^3 - t).
std::vector<double> mid_ranks(std::span<const double> pooled, double& tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> rank(n);
  tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[idx[j]] == pooled[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) rank[idx[k]] = r;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  return rank;
}

double normal_p(double u, double na, double nb, double tie_term) {
  const double n = na + nb;
  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(std::abs(u - mu) - 0.5, 0.0) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y, 3, "pearson");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] - mx, b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw InvalidArgument("pearson: correlation undefined for zero variance");
  PearsonResult out;
  out.n = x.size();
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(out.n - 2);
  if (std::abs(out.r) >= 1.0) {
    out.p = 0.0;
  } else {
    const double t = std::abs(out.r) * std::sqrt(df / (1.0 - out.r * out.r));
    boost::math::students_t dist(df);
    out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  }
  return out;
}

double icc_2_1(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y, 3, "icc_2_1");
  const double n = static_cast<double>(x.size());
  const double k = 2.0;
  const double mx = mean(x), my = mean(y);
  const double grand = 0.5 * (mx + my);
  double ss_rows = 0.0, ss_total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double row = 0.5 * (x[i] + y[i]);
    ss_rows += k * (row - grand) * (row - grand);
    ss_total += (x[i] - grand) * (x[i] - grand) + (y[i] - grand) * (y[i] - grand);
  }
  const double ss_cols = n * ((mx - grand) * (mx - grand) + (my - grand) * (my - grand));
  const double ss_err = std::max(ss_total - ss_rows - ss_cols, 0.0);
  const double ms_r = ss_rows / (n - 1.0);
  const double ms_c = ss_cols / (k - 1.0);
  const double ms_e = ss_err / ((n - 1.0) * (k - 1.0));
  const double den = ms_r + (k - 1.0) * ms_e + (k / n) * (ms_c - ms_e);
  if (den == 0.0) return 1.0;
  return (ms_r - ms_e) / den;
}

BlandAltman bland_altman(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y, 2, "bland_altman");
  std::vector<double> d(x.size());
  BlandAltman out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d[i] = x[i] - y[i];
    out.points.emplace_back(0.5 * (x[i] + y[i]), d[i]);
  }
  out.bias = mean(d);
  out.sd_diff = sample_sd(d);
  out.loa_low = out.bias - 1.96 * out.sd_diff;
  out.loa_high = out.bias + 1.96 * out.sd_diff;
  return out;
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("mann_whitney_u: both samples must be non-empty");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const auto rank = mid_ranks(pooled, tie_term);
  const double ra = std::accumulate(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(na), 0.0);
  MannWhitneyResult out;
  out.u = ra - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;

  if (na * nb > kMannWhitneyExactLimit) {
    out.p = normal_p(out.u, static_cast<double>(na), static_cast<double>(nb), tie_term);
    return out;
  }

  // Permutation distribution of the doubled rank sum of a subset of size k,
  // k the smaller sample; mid-ranks are half-integers so doubling is exact.
  out.exact = true;
  const std::size_t k = std::min(na, nb);
  std::vector<long> twice(n);
  long total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    twice[i] = std::lround(2.0 * rank[i]);
    total += twice[i];
  }
  const auto max_sum = static_cast<std::size_t>(total);
  std::vector<std::vector<double>> ways(k + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(twice[i]);
    for (std::size_t j = std::min(k, i + 1); j >= 1; --j)
      for (std::size_t s = max_sum; s >= r; --s) {
        ways[j][s] += ways[j - 1][s - r];
        if (s == r) break;
      }
  }
  // U of the chosen subset from its doubled rank sum.
  const double kk = static_cast<double>(k);
  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
  const double u_small = k == na ? out.u : static_cast<double>(na) * static_cast<double>(nb) - out.u;
  const double observed = std::abs(u_small - mu);
  double hit = 0.0, all = 0.0;
  for (std::size_t s = 0; s <= max_sum; ++s) {
    const double w = ways[k][s];
    if (w == 0.0) continue;
    all += w;
    const double u = static_cast<double>(s) / 2.0 - kk * (kk + 1.0) / 2.0;
    if (std::abs(u - mu) >= observed - 1e-9) hit += w;
  }
  out.p = std::min(1.0, hit / all);
  return out;
}

double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("mann_whitney_normal_p: both samples must be non-empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const auto rank = mid_ranks(pooled, tie_term);
  const double ra = std::accumulate(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double na = static_cast<double>(a.size());
  return normal_p(ra - na * (na + 1.0) / 2.0, na, static_cast<double>(b.size()), tie_term);
}

AccuracySummary accuracy(std::span<const double> estimates, std::span<const double> references) {
  if (estimates.size() != references.size()) throw InvalidArgument("accuracy: inputs differ in length");
  AccuracySummary out;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (references[i] == 0.0) {
      ++out.excluded;
      continue;
    }
    const double rel = std::abs(estimates[i] - references[i]) / std::abs(references[i]);
    out.values.push_back(std::max(0.0, 100.0 * (1.0 - rel)));
  }
  out.n = out.values.size();
  out.mean = mean(out.values);
  out.sd = sample_sd(out.values);
  return out;
}

AccuracySummary pool_accuracy(std::span<const AccuracySummary> parts) {
  AccuracySummary out;
  for (const auto& p : parts) {
    out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    out.excluded += p.excluded;
  }
  out.n = out.values.size();
  out.mean = mean(out.values);
  out.sd = sample_sd(out.values);
  return out;
}

AgreementReport agreement(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("agreement: inputs differ in length");
  AgreementReport out;
  out.n_pairs = x.size();
  if (x.size() >= 2) out.bland_altman = bland_altman(x, y);
  if (x.size() < 3) return out;
  out.icc = icc_2_1(x, y);
  try {
    const auto pr = pearson(x, y);
    out.pearson_r = pr.r;
    out.pearson_p = pr.p;
    out.valid = true;
  } catch (const InvalidArgument&) {
    out.valid = false;
  }
  return out;
}

}  // namespace gaitradar
