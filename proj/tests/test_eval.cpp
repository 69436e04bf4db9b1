#include <doctest.h>

#include <random>

#include "carboncast/errors.hpp"
#include "carboncast/eval.hpp"
#include "oracles.hpp"

using namespace carboncast;

TEST_SUITE_BEGIN("eval");

TEST_CASE("relative rmsfe") {
  CHECK(relative_rmsfe({1.0, -2.0, 0.5}, {1.0, -2.0, 0.5}) == doctest::Approx(1.0));
  CHECK(relative_rmsfe({0.5, -1.0, 0.25}, {1.0, -2.0, 0.5}) == doctest::Approx(0.5));
  CHECK(relative_rmsfe({1.0, 2.0, 2.0}, {2.0, 2.0, 2.0}) ==
        doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-10));
  CHECK_THROWS_AS(relative_rmsfe({1.0}, {0.0}), data_error);
}

TEST_CASE("success ratio") {
  CHECK(success_ratio({1, -1, 0}, {1, -1, 0}) == doctest::Approx(1.0));
  CHECK(success_ratio({1, -1, 1, -1}, {1, 1, 1, 1}) == doctest::Approx(0.5));
  CHECK(success_ratio({0}, {1}) == doctest::Approx(0.0));  // zero forecast is a miss
}

TEST_CASE("qcrps single component and hand instance") {
  // direct evaluation of the score component
  CHECK(oracles::qs_component(0.25, 2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-12));

  QuantileGrid g;
  g.J = 4;
  g.levels = {1.0, 2.0, 3.0};
  double brute = oracles::qcrps_brute(g.levels, 4, 2.5);
  CHECK(brute == doctest::Approx(0.5).epsilon(1e-12));  // (0.75 + 0.5 + 0.25)/3
  CHECK(qcrps(g, 2.5) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("degenerate density at the truth scores zero") {
  QuantileGrid g;
  g.J = 20;
  g.levels.assign(19, 42.0);
  CHECK(qcrps(g, 42.0) == doctest::Approx(0.0));
  for (auto region : {QcrpsRegion::center, QcrpsRegion::right, QcrpsRegion::left}) {
    CHECK(weighted_qcrps(g, 42.0, region) == doctest::Approx(0.0));
  }
}

TEST_CASE("qcrps and weighted variants match brute force on random instances") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-1.0, 3.0);
  for (int rep = 0; rep < 1000; ++rep) {
    QuantileGrid g;
    g.J = 20;
    std::vector<double> q(19);
    for (auto& v : q) v = 50.0 + 10.0 * nd(gen);
    std::sort(q.begin(), q.end());
    g.levels = q;
    double realized = 50.0 + 15.0 * ud(gen);
    CHECK(qcrps(g, realized) ==
          doctest::Approx(oracles::qcrps_brute(q, 20, realized)).epsilon(1e-12));
    CHECK(weighted_qcrps(g, realized, QcrpsRegion::center) ==
          doctest::Approx(oracles::weighted_qcrps_brute(q, 20, realized,
                                                        oracles::WeightKind::center))
              .epsilon(1e-12));
    CHECK(weighted_qcrps(g, realized, QcrpsRegion::right) ==
          doctest::Approx(oracles::weighted_qcrps_brute(q, 20, realized,
                                                        oracles::WeightKind::right))
              .epsilon(1e-12));
    CHECK(weighted_qcrps(g, realized, QcrpsRegion::left) ==
          doctest::Approx(oracles::weighted_qcrps_brute(q, 20, realized,
                                                        oracles::WeightKind::left))
              .epsilon(1e-12));
    CHECK(qcrps(g, realized) >= 0.0);
  }
}

TEST_CASE("center weights are symmetric under grid mirroring") {
  // quantiles symmetric about the realization: mirroring the grid leaves the
  // center-weighted score unchanged (nu(alpha) = nu(1-alpha))
  QuantileGrid g;
  g.J = 20;
  double R = 10.0;
  std::vector<double> q(19);
  for (int j = 0; j < 19; ++j) q[static_cast<std::size_t>(j)] = R + (j - 9) * 0.5;
  g.levels = q;
  QuantileGrid mirrored;
  mirrored.J = 20;
  std::vector<double> qm(19);
  for (int j = 0; j < 19; ++j) qm[static_cast<std::size_t>(j)] = 2.0 * R - q[static_cast<std::size_t>(18 - j)];
  mirrored.levels = qm;
  CHECK(weighted_qcrps(g, R, QcrpsRegion::center) ==
        doctest::Approx(weighted_qcrps(mirrored, R, QcrpsRegion::center)).epsilon(1e-12));
  // right weighting of the grid equals left weighting of the mirror
  CHECK(weighted_qcrps(g, R, QcrpsRegion::right) ==
        doctest::Approx(weighted_qcrps(mirrored, R, QcrpsRegion::left)).epsilon(1e-12));
}

TEST_CASE("unweighted qcrps equals the nu=1 weighted machinery") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  QuantileGrid g;
  g.J = 20;
  std::vector<double> q(19);
  for (auto& v : q) v = nd(gen);
  std::sort(q.begin(), q.end());
  g.levels = q;
  double R = 0.3;
  // center + right + left weights: a(1-a) + a^2 + (1-a)^2 = 1 - a(1-a)
  double combined = weighted_qcrps(g, R, QcrpsRegion::center) +
                    weighted_qcrps(g, R, QcrpsRegion::right) +
                    weighted_qcrps(g, R, QcrpsRegion::left) +
                    weighted_qcrps(g, R, QcrpsRegion::center);
  // ... so center applied twice restores nu = 1 exactly
  CHECK(combined == doctest::Approx(qcrps(g, R)).epsilon(1e-12));
}

TEST_CASE("dm test") {
  std::vector<double> zeros(50, 0.0);
  auto r0 = dm_test(zeros, 1);
  CHECK(r0.statistic == doctest::Approx(0.0));
  CHECK(r0.p_value == doctest::Approx(1.0));

  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(1.0, 0.1);
  std::vector<double> d(100);
  for (auto& v : d) v = nd(gen);
  auto r1 = dm_test(d, 1);
  CHECK(std::abs(r1.statistic) > 10.0);
  CHECK(r1.p_value < 1e-4);

  // h=1 equals the textbook t statistic
  std::normal_distribution<double> nd2(0.1, 1.0);
  std::vector<double> d2(60);
  for (auto& v : d2) v = nd2(gen);
  auto r2 = dm_test(d2, 1);
  CHECK(r2.statistic == doctest::Approx(oracles::t_stat(d2)).epsilon(1e-12));

  std::vector<double> constant(20, 3.0);
  CHECK_THROWS_AS(dm_test(constant, 1), data_error);
}

TEST_CASE("pt test") {
  // independence with matched margins: 25/25/25/25
  std::vector<int> sf, sr;
  for (int i = 0; i < 25; ++i) { sf.push_back(1); sr.push_back(1); }
  for (int i = 0; i < 25; ++i) { sf.push_back(1); sr.push_back(-1); }
  for (int i = 0; i < 25; ++i) { sf.push_back(-1); sr.push_back(1); }
  for (int i = 0; i < 25; ++i) { sf.push_back(-1); sr.push_back(-1); }
  auto r = pt_test(sf, sr);
  CHECK(std::abs(r.statistic) < 1e-10);

  // perfect association, balanced margins
  sf.clear();
  sr.clear();
  for (int i = 0; i < 50; ++i) { sf.push_back(1); sr.push_back(1); }
  for (int i = 0; i < 50; ++i) { sf.push_back(-1); sr.push_back(-1); }
  auto r2 = pt_test(sf, sr);
  CHECK(r2.p_value < 1e-6);

  // hand-built 2x2 table 40/10/10/40 against the direct formula
  sf.clear();
  sr.clear();
  for (int i = 0; i < 40; ++i) { sf.push_back(1); sr.push_back(1); }
  for (int i = 0; i < 10; ++i) { sf.push_back(1); sr.push_back(-1); }
  for (int i = 0; i < 10; ++i) { sf.push_back(-1); sr.push_back(1); }
  for (int i = 0; i < 40; ++i) { sf.push_back(-1); sr.push_back(-1); }
  auto r3 = pt_test(sf, sr);
  CHECK(r3.statistic ==
        doctest::Approx(oracles::pt_stat_from_table(40, 10, 10, 40)).epsilon(1e-10));

  std::vector<int> all_up(20, 1);
  CHECK_THROWS_AS(pt_test(all_up, all_up), data_error);
}

TEST_CASE("fluctuation test geometry and trivial path") {
  std::vector<double> zeros(58, 0.0);
  auto r = fluctuation_test(zeros, 19);
  CHECK(static_cast<int>(r.path.size()) == 58 - 19 + 1);
  CHECK(r.mu == doctest::Approx(19.0 / 58.0));
  for (double v : r.path) CHECK(v == doctest::Approx(0.0));
  CHECK_FALSE(r.reject);

  CHECK_THROWS_AS(fluctuation_test(zeros, 18), data_error);
  CHECK_THROWS_AS(fluctuation_test(zeros, 59), data_error);
}

TEST_CASE("fluctuation burst instance against the sliding-window oracle") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> d(58);
  for (auto& v : d) v = nd(gen);
  for (int i = 25; i < 35; ++i) d[static_cast<std::size_t>(i)] += 8.0;  // burst inside one window
  auto r = fluctuation_test(d, 19);
  double lrv = bartlett_long_run_variance(d, 0);
  auto brute = oracles::fluctuation_brute(d, 19, lrv);
  REQUIRE(brute.size() == r.path.size());
  for (std::size_t i = 0; i < brute.size(); ++i) {
    CHECK(r.path[i] == doctest::Approx(brute[i]).epsilon(1e-12));
  }
  CHECK(r.max_statistic > r.cv_one_sided_5pct);
  CHECK(r.reject);
}

TEST_CASE("full-window fluctuation equals the scaled full-sample mean") {
  std::mt19937_64 gen(23);
  std::normal_distribution<double> nd(0.2, 1.0);
  std::vector<double> d(41);
  for (auto& v : d) v = nd(gen);
  auto r = fluctuation_test(d, 41);
  REQUIRE(r.path.size() == 1);
  double lrv = bartlett_long_run_variance(d, 0);
  double dbar = 0.0;
  for (double v : d) dbar += v;
  dbar /= d.size();
  CHECK(r.path[0] == doctest::Approx(std::sqrt(41.0) * dbar / std::sqrt(lrv)).epsilon(1e-12));
}

TEST_CASE("scale invariance of the tests") {
  std::mt19937_64 gen(29);
  std::normal_distribution<double> nd(0.1, 1.0);
  std::vector<double> d(60);
  for (auto& v : d) v = nd(gen);
  std::vector<double> d_scaled = d;
  for (auto& v : d_scaled) v *= 7.5;

  auto dm_a = dm_test(d, 3);
  auto dm_b = dm_test(d_scaled, 3);
  CHECK(dm_a.statistic == doctest::Approx(dm_b.statistic).epsilon(1e-10));

  auto fl_a = fluctuation_test(d, 19);
  auto fl_b = fluctuation_test(d_scaled, 19);
  for (std::size_t i = 0; i < fl_a.path.size(); ++i) {
    CHECK(fl_a.path[i] == doctest::Approx(fl_b.path[i]).epsilon(1e-10));
  }
}

TEST_CASE("critical value interpolation") {
  CHECK(fluctuation_cv(0.1, true) == doctest::Approx(3.176));
  CHECK(fluctuation_cv(0.9, true) == doctest::Approx(1.975));
  CHECK(fluctuation_cv(0.05, true) == doctest::Approx(3.176));  // clamped
  CHECK(fluctuation_cv(0.35, true) ==
        doctest::Approx(0.5 * (2.770 + 2.624)).epsilon(1e-12));
  CHECK(fluctuation_cv(0.5, false) == doctest::Approx(2.779));
}

TEST_CASE("distribution helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(student_t_cdf(0.0, 10) == doctest::Approx(0.5));
  // t(1) = Cauchy: F(1) = 3/4
  CHECK(student_t_cdf(1.0, 1) == doctest::Approx(0.75).epsilon(1e-10));
  // large dof approaches the normal
  CHECK(student_t_cdf(1.959963985, 100000) == doctest::Approx(0.975).epsilon(1e-5));
}

TEST_SUITE_END();
