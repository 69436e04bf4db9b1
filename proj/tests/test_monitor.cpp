#include <doctest.h>

#include <random>

#include "carboncast/backtest.hpp"
#include "carboncast/errors.hpp"
#include "carboncast/monitor.hpp"
#include "carboncast/synth.hpp"

using namespace carboncast;

TEST_SUITE_BEGIN("monitor");

namespace {

ForecastRecord make_record(const std::string& variable, MonthDate origin, int h, double point,
                           double origin_level) {
  ForecastRecord r;
  r.model_id = "m";
  r.variable = variable;
  r.origin = origin;
  r.horizon = h;
  r.point_level = point;
  r.origin_level = origin_level;
  r.sign = point > origin_level ? 1 : (point < origin_level ? -1 : 0);
  return r;
}

}  // namespace

TEST_CASE("demand pressure basics") {
  std::vector<ForecastRecord> recs;
  MonthDate o(2020, 1);
  recs.push_back(make_record("emissions", o, 1, 100.0, 100.0));
  recs.push_back(make_record("emissions", o, 12, 100.0, 100.0));
  MonthDate o2 = o.plus_months(1);
  recs.push_back(make_record("emissions", o2, 1, 100.0, 100.0));
  recs.push_back(make_record("emissions", o2, 12, 95.0, 100.0));
  // an origin missing horizon 12 gets skipped with a warning
  recs.push_back(make_record("emissions", o.plus_months(2), 1, 90.0, 100.0));

  PressureIndex idx = demand_pressure(recs);
  REQUIRE(idx.values.size() == 2);
  CHECK(idx.values[0] == doctest::Approx(0.0));
  CHECK(idx.values[1] == doctest::Approx(-5.0));
  CHECK(idx.warnings.size() == 1);
}

TEST_CASE("price pressure counting") {
  // trailing year of prices 90..101 (max 101, min 90)
  std::vector<double> hist;
  for (int i = 0; i < 12; ++i) hist.push_back(90.0 + i);
  MonthlySeries price(MonthDate(2019, 2), hist, Transform::none, "price");
  MonthDate origin = price.last_date();  // 2020-01

  std::vector<ForecastRecord> all_above, inside, three_below;
  for (int h = 1; h <= 12; ++h) {
    all_above.push_back(make_record("price", origin, h, 150.0, 101.0));
    inside.push_back(make_record("price", origin, h, 95.0, 101.0));
    three_below.push_back(make_record("price", origin, h, h <= 3 ? 80.0 : 95.0, 101.0));
  }
  auto up = price_pressure(all_above, price, PressureKind::price_up);
  REQUIRE(up.values.size() == 1);
  CHECK(up.values[0] == doctest::Approx(1.0));

  auto up0 = price_pressure(inside, price, PressureKind::price_up);
  auto down0 = price_pressure(inside, price, PressureKind::price_down);
  CHECK(up0.values[0] == doctest::Approx(0.0));
  CHECK(down0.values[0] == doctest::Approx(0.0));

  auto down3 = price_pressure(three_below, price, PressureKind::price_down);
  CHECK(down3.values[0] == doctest::Approx(0.25));
}

TEST_CASE("price pressure skips origins without a trailing year") {
  std::vector<double> hist(6, 100.0);
  MonthlySeries price(MonthDate(2020, 1), hist, Transform::none, "price");
  std::vector<ForecastRecord> recs;
  for (int h = 1; h <= 12; ++h) {
    recs.push_back(make_record("price", price.last_date(), h, 120.0, 100.0));
  }
  auto up = price_pressure(recs, price, PressureKind::price_up);
  CHECK(up.values.empty());
  CHECK(up.warnings.size() == 1);
}

TEST_CASE("pp+ and pp- cannot sum above one") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> hist;
  for (int i = 0; i < 24; ++i) hist.push_back(100.0 * std::exp(0.05 * nd(gen)));
  MonthlySeries price(MonthDate(2018, 1), hist, Transform::none, "price");

  std::vector<ForecastRecord> recs;
  for (int oi = 11; oi < 24; ++oi) {
    MonthDate origin = price.date_at(oi);
    for (int h = 1; h <= 12; ++h) {
      double point = 100.0 * std::exp(0.3 * nd(gen));
      recs.push_back(make_record("price", origin, h, point, price.values[static_cast<std::size_t>(oi)]));
    }
  }
  auto up = price_pressure(recs, price, PressureKind::price_up);
  auto down = price_pressure(recs, price, PressureKind::price_down);
  REQUIRE(up.values.size() == down.values.size());
  for (std::size_t i = 0; i < up.values.size(); ++i) {
    CHECK(up.values[i] + down.values[i] <= 1.0 + 1e-12);
    CHECK(up.values[i] >= 0.0);
    CHECK(up.values[i] <= 1.0);
  }
}

TEST_CASE("backward smoothing stores raw values untouched") {
  std::vector<ForecastRecord> recs;
  for (int i = 0; i < 5; ++i) {
    MonthDate o = MonthDate(2020, 1).plus_months(i);
    recs.push_back(make_record("emissions", o, 1, 100.0, 100.0));
    recs.push_back(make_record("emissions", o, 12, 100.0 + i, 100.0));
  }
  auto idx = demand_pressure(recs);
  REQUIRE(idx.values.size() == 5);
  REQUIRE(idx.smoothed.size() == 3);
  CHECK(idx.values[2] == doctest::Approx(2.0));
  CHECK(idx.smoothed[0] == doctest::Approx(1.0));  // mean(0,1,2)
  CHECK(idx.smoothed[2] == doctest::Approx(3.0));  // mean(2,3,4)
}

TEST_CASE("fixed-event to fixed-horizon conversion") {
  CHECK(fe_to_fh(80.0, 100.0, 12) == doctest::Approx(80.0));  // January identity
  CHECK(fe_to_fh(80.0, 100.0, 6) == doctest::Approx(90.0));
  for (int k = 1; k <= 12; ++k) CHECK(fe_to_fh(55.5, 55.5, k) == doctest::Approx(55.5));
  CHECK_THROWS_AS(fe_to_fh(80.0, 100.0, 0), data_error);
  CHECK_THROWS_AS(fe_to_fh(80.0, 100.0, 13), data_error);

  // monotone and bounded by the two inputs
  for (int k = 1; k <= 12; ++k) {
    double v = fe_to_fh(70.0, 90.0, k);
    CHECK(v >= 70.0);
    CHECK(v <= 90.0);
    if (k < 12) CHECK(fe_to_fh(70.0, 90.0, k + 1) <= v);
  }
}

TEST_CASE("downward-trending emissions push demand pressure negative") {
  SynthConfig cfg;  // emissions trend is negative by construction
  cfg.seed = 12;
  DataBundle bundle = generate_bundle(cfg).data;

  BacktestPlan plan;
  plan.first_estimation_end = MonthDate(2018, 12);
  plan.last_origin = MonthDate(2021, 12);
  plan.horizons = 12;
  plan.density = false;
  plan.seed = 55;
  plan.models = {parse_model_spec("bvar(1)")};
  auto records = run_expanding_window(bundle, plan);
  auto idx = demand_pressure(records);
  REQUIRE(idx.values.size() >= 30);
  int negative = 0;
  for (double v : idx.values) {
    if (v < 0.0) ++negative;
  }
  CHECK(negative >= static_cast<int>(0.9 * idx.values.size()));
}

TEST_SUITE_END();
