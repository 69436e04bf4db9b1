#include <doctest.h>

#include <random>

#include "carboncast/errors.hpp"
#include "carboncast/forecast.hpp"

using namespace carboncast;

TEST_SUITE_BEGIN("forecast");

TEST_CASE("rw point forecasts are no-change in levels") {
  RwPosterior rw;
  rw.last_level_log = std::log(80.0);
  Eigen::MatrixXd hist(5, 1);
  hist.setZero();
  Eigen::MatrixXd path = iterate_point_forecast(ModelPosterior(rw), hist, 6);
  std::vector<double> dlog(6);
  for (int h = 0; h < 6; ++h) dlog[static_cast<std::size_t>(h)] = path(h, 0);
  auto levels = to_levels(rw.last_level_log, dlog);
  for (double v : levels) CHECK(v == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("ar(1) forecasts decay geometrically") {
  ArimaEstimate est;
  est.ar = 1;
  est.phi = 0.5;
  est.mu = 0.0;
  est.z_last = 0.2;
  est.ma_state = 0.0;
  Eigen::MatrixXd hist(3, 1);
  hist.setZero();
  Eigen::MatrixXd path = iterate_point_forecast(ModelPosterior(est), hist, 3);
  CHECK(path(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(path(1, 0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(path(2, 0) == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("var iteration matches a dense companion-matrix oracle") {
  VarSpec spec;
  spec.n = 2;
  spec.p = 1;
  Eigen::MatrixXd A(2, 2);
  A << 0.5, 0.2, -0.1, 0.4;
  Eigen::VectorXd a0(2);
  a0 << 0.05, -0.02;
  ConjugatePosterior post;
  post.spec = spec;
  post.coef_mean.resize(3, 2);
  post.coef_mean.row(0) = a0.transpose();
  post.coef_mean.block(1, 0, 2, 2) = A.transpose();
  post.coef_row_cov = Eigen::MatrixXd::Identity(3, 3);
  post.sigma_scale = Eigen::MatrixXd::Identity(2, 2);
  post.sigma_dof = 10.0;

  Eigen::MatrixXd hist(4, 2);
  hist << 0.1, 0.2, -0.3, 0.1, 0.2, -0.1, 0.15, 0.05;
  const int H = 5;
  Eigen::MatrixXd path = iterate_point_forecast(ModelPosterior(post), hist, H);

  Eigen::VectorXd y = hist.row(3).transpose();
  for (int h = 0; h < H; ++h) {
    y = a0 + A * y;  // repeated matrix multiplication oracle
    CHECK(path(h, 0) == doctest::Approx(y(0)).epsilon(1e-12));
    CHECK(path(h, 1) == doctest::Approx(y(1)).epsilon(1e-12));
  }
}

TEST_CASE("iteration guards against explosive paths") {
  ArimaEstimate est;
  est.ar = 1;
  est.phi = 0.999;  // fine
  est.mu = 9.0;     // absurd drift in log units
  est.z_last = 5.0;
  Eigen::MatrixXd hist(2, 1);
  hist.setZero();
  CHECK_THROWS_AS(iterate_point_forecast(ModelPosterior(est), hist, 12), numerical_error);
}

TEST_CASE("level conversion") {
  auto flat = to_levels(std::log(42.0), {0.0, 0.0, 0.0});
  for (double v : flat) CHECK(v == doctest::Approx(42.0).epsilon(1e-12));

  auto up = to_levels(std::log(100.0), {0.01, 0.01});
  CHECK(up[0] == doctest::Approx(100.0 * std::exp(0.01)).epsilon(1e-12));
  CHECK(up[1] == doctest::Approx(100.0 * std::exp(0.02)).epsilon(1e-12));

  auto one = to_levels(std::log(7.0), {0.3});
  CHECK(one[0] == doctest::Approx(7.0 * std::exp(0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(to_levels(5.0, {2000.0}), numerical_error);
}

TEST_CASE("level conversion inverts log differencing") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> levels{30.0};
  for (int i = 0; i < 50; ++i) levels.push_back(levels.back() * std::exp(0.05 * nd(gen)));
  MonthlySeries s(MonthDate(2015, 1), levels);
  auto d = log_diff(s);
  auto rebuilt = to_levels(std::log(levels[0]), d.values);
  for (std::size_t i = 0; i < rebuilt.size(); ++i) {
    CHECK(rebuilt[i] == doctest::Approx(levels[i + 1]).epsilon(1e-10));
  }
}

TEST_CASE("sign forecast") {
  CHECK(sign_forecast(105.0, 100.0) == 1);
  CHECK(sign_forecast(100.0, 100.0) == 0);
  CHECK(sign_forecast(99.999, 100.0) == -1);
}

TEST_CASE("degenerate posterior draws equal the point path") {
  RwPosterior rw;
  rw.resid_var = 0.0;
  rw.last_level_log = std::log(50.0);
  Eigen::MatrixXd hist(2, 1);
  hist.setZero();
  Eigen::MatrixXd draws = simulate_predictive(ModelPosterior(rw), hist, rw.last_level_log, 4,
                                              600, 99);
  for (int h = 0; h < 4; ++h) {
    for (int m = 0; m < 600; ++m) CHECK(draws(h, m) == doctest::Approx(50.0).epsilon(1e-12));
  }
}

TEST_CASE("rw predictive variance follows the h*sigma^2 scaling law") {
  RwPosterior rw;
  rw.resid_var = 0.04;
  rw.last_level_log = std::log(100.0);
  Eigen::MatrixXd hist(2, 1);
  hist.setZero();
  const int M = 100000;
  Eigen::MatrixXd draws =
      simulate_predictive(ModelPosterior(rw), hist, rw.last_level_log, 3, M, 2024);
  for (int h = 0; h < 3; ++h) {
    std::vector<double> logs(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) logs[static_cast<std::size_t>(m)] = std::log(draws(h, m));
    double mean = 0.0;
    for (double v : logs) mean += v;
    mean /= M;
    double var = 0.0;
    for (double v : logs) var += (v - mean) * (v - mean);
    var /= (M - 1);
    CHECK(var == doctest::Approx(0.04 * (h + 1)).epsilon(0.05));
  }
}

TEST_CASE("sv predictive with phi=0 and no vol-of-vol has constant variance") {
  SvDraw d;
  d.coef = Eigen::MatrixXd::Zero(2, 1);  // intercept 0, lag 0
  d.b0 = Eigen::MatrixXd::Identity(1, 1);
  d.h = Eigen::MatrixXd::Constant(1, 10, -2.0);
  d.mu = Eigen::VectorXd::Constant(1, -2.0);
  d.phi = Eigen::VectorXd::Zero(1);
  d.sig2_eps = Eigen::VectorXd::Constant(1, 1e-18);
  SvDraws sv;
  sv.spec.n = 1;
  sv.spec.p = 1;
  sv.draw_count = 1;
  sv.draws.push_back(d);
  sv.coef_mean = d.coef;

  Eigen::MatrixXd hist(3, 1);
  hist.setZero();
  const int M = 20000;
  Eigen::MatrixXd draws = simulate_predictive(ModelPosterior(sv), hist, 0.0, 1, M, 7);
  std::vector<double> logs(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) logs[static_cast<std::size_t>(m)] = std::log(draws(0, m));
  double mean = 0.0;
  for (double v : logs) mean += v;
  mean /= M;
  double var = 0.0;
  for (double v : logs) var += (v - mean) * (v - mean);
  var /= (M - 1);
  CHECK(var == doctest::Approx(std::exp(-2.0)).epsilon(0.05));
}

TEST_CASE("quantile grid conventions") {
  std::vector<double> draws;
  for (int i = 1; i <= 100; ++i) draws.push_back(i);
  QuantileGrid g = quantile_grid(draws, 20);
  REQUIRE(g.size() == 19);
  CHECK(g.alpha(0) == doctest::Approx(0.05));
  CHECK(g.alpha(18) == doctest::Approx(0.95));
  CHECK(g.levels[9] == doctest::Approx(50.5).epsilon(1e-12));  // alpha = 0.5

  std::vector<double> same(50, 3.25);
  QuantileGrid gc = quantile_grid(same, 20);
  for (double v : gc.levels) CHECK(v == doctest::Approx(3.25));

  // monotone in alpha for random draws
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  std::vector<double> rnd(777);
  for (auto& v : rnd) v = nd(gen);
  QuantileGrid gr = quantile_grid(rnd, 20);
  for (int j = 1; j < gr.size(); ++j) {
    CHECK(gr.levels[static_cast<std::size_t>(j)] >= gr.levels[static_cast<std::size_t>(j - 1)]);
  }
}

TEST_CASE("predictive simulation is deterministic given the seed") {
  RwPosterior rw;
  rw.resid_var = 0.01;
  rw.last_level_log = std::log(60.0);
  Eigen::MatrixXd hist(2, 1);
  hist.setZero();
  auto a = simulate_predictive(ModelPosterior(rw), hist, rw.last_level_log, 3, 800, 5);
  auto b = simulate_predictive(ModelPosterior(rw), hist, rw.last_level_log, 3, 800, 5);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(simulate_predictive(ModelPosterior(rw), hist, 1.0, 3, 100, 5), data_error);
}

TEST_SUITE_END();
