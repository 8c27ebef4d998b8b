// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gaitradar Authors

#include <cmath>
#include <vector>

#include "doctest.h"
#include "gaitradar/stats.hpp"
#include "stats_check.hpp"

using namespace gaitradar;

TEST_SUITE("stats") {
  TEST_CASE("every statistic matches its brute-force oracle on 100 seeded instances") {
    const auto d = oracle::check_stats(7, 100);
    CHECK(d.pearson_r <= 1e-9);
    CHECK(d.pearson_p <= 1e-9);
    CHECK(d.icc <= 1e-9);
    CHECK(d.bland_altman <= 1e-9);
    CHECK(d.mw_u <= 1e-9);
    CHECK(d.mw_exact_p <= 1e-9);
    CHECK(d.mw_normal_p <= 1e-9);
    CHECK(d.accuracy <= 1e-9);
    CHECK(d.exact_cases == 50);
    CHECK(d.normal_cases == 50);
  }

  TEST_CASE("pearson on hand-checked data") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{2, 4, 5, 4, 5};
    const auto r = pearson(x, y);
    CHECK(r.r == doctest::Approx(6.0 / std::sqrt(10.0 * 6.0)));
    CHECK(r.n == 5);
    CHECK(pearson(x, x).p == 0.0);
    const std::vector<double> flat{1, 1, 1, 1, 1};
    CHECK_THROWS_AS(pearson(x, flat), InvalidArgument);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
  }

  TEST_CASE("icc rewards agreement, not just correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> offset(x), same(x);
    for (double& v : offset) v += 10.0;
    CHECK(icc_2_1(x, same) == doctest::Approx(1.0));
    CHECK(icc_2_1(x, offset) < 0.2);
    const std::vector<double> c{2, 2, 2};
    CHECK(icc_2_1(c, c) == 1.0);
  }

  TEST_CASE("mann-whitney picks the exact path by sample size") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{4, 5, 6};
    const auto r = mann_whitney_u(a, b);
    CHECK(r.exact);
    CHECK(r.u == 0.0);
    CHECK(r.p == doctest::Approx(0.1));  // 2 of 20 labellings are this extreme
    std::vector<double> big_a(21), big_b(20);
    for (std::size_t i = 0; i < big_a.size(); ++i) big_a[i] = static_cast<double>(i);
    for (std::size_t i = 0; i < big_b.size(); ++i) big_b[i] = static_cast<double>(i) + 0.5;
    CHECK_FALSE(mann_whitney_u(big_a, big_b).exact);
    CHECK_THROWS_AS(mann_whitney_u(a, std::vector<double>{}), InvalidArgument);
  }

  TEST_CASE("accuracy floors at zero and skips zero references") {
    const std::vector<double> e{1.1, 5.0, 1.0};
    const std::vector<double> r{1.0, 1.0, 0.0};
    const auto s = accuracy(e, r);
    CHECK(s.n == 2);
    CHECK(s.excluded == 1);
    CHECK(s.values[0] == doctest::Approx(90.0));
    CHECK(s.values[1] == 0.0);
    CHECK(s.mean == doctest::Approx(45.0));
    const AccuracySummary parts[] = {s, accuracy(std::vector<double>{2.0}, std::vector<double>{2.0})};
    const auto pooled = pool_accuracy(parts);
    CHECK(pooled.n == 3);
    CHECK(pooled.mean == doctest::Approx(190.0 / 3.0));
  }

  TEST_CASE("agreement degrades gracefully") {
    const std::vector<double> x{1, 2};
    const auto a = agreement(x, x);
    CHECK_FALSE(a.valid);
    CHECK(a.n_pairs == 2);
    const std::vector<double> c{3, 3, 3};
    const std::vector<double> v{1, 2, 3};
    CHECK_FALSE(agreement(c, v).valid);
    CHECK(agreement(v, v).valid);
  }
}
