#include "carboncast/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "carboncast/csv.hpp"
#include "carboncast/errors.hpp"

namespace carboncast {

namespace {

void smooth_backward_3(PressureIndex& idx) {
  // backward 3-month moving average over contiguous origins
  for (std::size_t i = 2; i < idx.values.size(); ++i) {
    bool contiguous = idx.origins[i].months_since(idx.origins[i - 1]) == 1 &&
                      idx.origins[i - 1].months_since(idx.origins[i - 2]) == 1;
    if (contiguous) {
      idx.smoothed.push_back((idx.values[i] + idx.values[i - 1] + idx.values[i - 2]) / 3.0);
    } else {
      idx.smoothed.push_back(idx.values[i]);
    }
  }
}

// P(R > x) from a quantile grid: piecewise-linear CDF through (q_j, alpha_j),
// flat beyond the tabulated quantiles.
double exceed_probability(const QuantileGrid& grid, double x) {
  if (grid.size() == 0) throw data_error("price_pressure: record has no quantiles");
  if (x < grid.levels.front()) return 1.0 - grid.alpha(0);
  if (x >= grid.levels.back()) return 1.0 - grid.alpha(grid.size() - 1);
  for (int j = 0; j + 1 < grid.size(); ++j) {
    double q0 = grid.levels[static_cast<std::size_t>(j)];
    double q1 = grid.levels[static_cast<std::size_t>(j + 1)];
    if (x >= q0 && x < q1) {
      double frac = q1 > q0 ? (x - q0) / (q1 - q0) : 0.0;
      double alpha = grid.alpha(j) + frac * (grid.alpha(j + 1) - grid.alpha(j));
      return 1.0 - alpha;
    }
  }
  return 1.0 - grid.alpha(grid.size() - 1);
}

}  // namespace

PressureIndex demand_pressure(const std::vector<ForecastRecord>& emission_records) {
  std::map<int, std::pair<const ForecastRecord*, const ForecastRecord*>> by_origin;
  for (const auto& r : emission_records) {
    if (r.variable != "emissions") continue;
    auto& slot = by_origin[r.origin.index()];
    if (r.horizon == 1) slot.first = &r;
    if (r.horizon == 12) slot.second = &r;
  }
  PressureIndex idx;
  idx.kind = PressureKind::demand;
  for (const auto& [oi, pair] : by_origin) {
    if (!pair.first || !pair.second) {
      idx.warnings.push_back("origin " + MonthDate::from_index(oi).to_string() +
                             " skipped: missing horizon 1 or 12");
      continue;
    }
    idx.origins.push_back(MonthDate::from_index(oi));
    idx.values.push_back(pair.second->point_level - pair.first->point_level);
  }
  smooth_backward_3(idx);
  return idx;
}

PressureIndex price_pressure(const std::vector<ForecastRecord>& price_records,
                             const MonthlySeries& price_history, PressureKind direction,
                             bool density_variant) {
  if (direction == PressureKind::demand) {
    throw data_error("price_pressure: direction must be price_up or price_down");
  }
  const bool up = direction == PressureKind::price_up;
  std::map<int, std::vector<const ForecastRecord*>> by_origin;
  for (const auto& r : price_records) {
    if (r.variable != "price") continue;
    if (r.horizon >= 1 && r.horizon <= 12) by_origin[r.origin.index()].push_back(&r);
  }
  PressureIndex idx;
  idx.kind = direction;
  for (const auto& [oi, recs] : by_origin) {
    MonthDate origin = MonthDate::from_index(oi);
    if (recs.size() != 12) {
      idx.warnings.push_back("origin " + origin.to_string() + " skipped: incomplete horizons");
      continue;
    }
    MonthDate trail_start = origin.plus_months(-11);
    if (!price_history.covers(trail_start) || !price_history.covers(origin)) {
      idx.warnings.push_back("origin " + origin.to_string() + " skipped: <12 trailing levels");
      continue;
    }
    double extremum = price_history.at(trail_start);
    for (int k = 1; k <= 11; ++k) {
      double v = price_history.at(trail_start.plus_months(k));
      extremum = up ? std::max(extremum, v) : std::min(extremum, v);
    }
    double acc = 0.0;
    for (const auto* r : recs) {
      if (density_variant) {
        double p_exceed = exceed_probability(r->quantiles, extremum);
        acc += up ? p_exceed : 1.0 - p_exceed;
      } else {
        bool breach = up ? r->point_level > extremum : r->point_level < extremum;
        acc += breach ? 1.0 : 0.0;
      }
    }
    idx.origins.push_back(origin);
    idx.values.push_back(acc / 12.0);
  }
  smooth_backward_3(idx);
  return idx;
}

double fe_to_fh(double current_year_forecast, double next_year_forecast, int k) {
  if (k < 1 || k > 12) throw data_error("fe_to_fh: k must be in 1..12");
  if (!std::isfinite(current_year_forecast) || !std::isfinite(next_year_forecast)) {
    throw data_error("fe_to_fh: non-finite input");
  }
  double w = static_cast<double>(k) / 12.0;
  return w * current_year_forecast + (1.0 - w) * next_year_forecast;
}

void write_pressure_csv(const std::string& path, const PressureIndex& index) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "origin,value,smoothed\n";
  for (std::size_t i = 0; i < index.values.size(); ++i) {
    out << index.origins[i].to_string() << "," << format_double(index.values[i]) << ",";
    if (i >= 2 && i - 2 < index.smoothed.size()) out << format_double(index.smoothed[i - 2]);
    out << "\n";
  }
}

}  // namespace carboncast
