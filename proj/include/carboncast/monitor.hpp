#pragma once

#include <string>
#include <vector>

#include "carboncast/forecast.hpp"
#include "carboncast/timeseries.hpp"

namespace carboncast {

enum class PressureKind { demand, price_up, price_down };

// Origin-dated monitoring index. Raw values are always kept; `smoothed`
// holds the backward 3-month moving average used for presentation (empty
// until at least 3 origins exist).
struct PressureIndex {
  PressureKind kind = PressureKind::demand;
  std::vector<MonthDate> origins;
  std::vector<double> values;
  std::vector<double> smoothed;
  std::vector<std::string> warnings;
};

// f_{t+12|t} - f_{t+1|t} on emission forecast levels; negative values signal
// loosening market conditions. Origins missing either horizon are skipped
// with a warning.
PressureIndex demand_pressure(const std::vector<ForecastRecord>& emission_records);

// PP+_t = (1/12) sum_h 1[Rhat_{t+h|t} > max(R_t..R_{t-11})], PP- analogous
// with min and <. Point forecasts by default; when `density_variant` is set
// the indicator becomes the predictive probability of breaching the trailing
// extremum, read off the record's quantile grid.
PressureIndex price_pressure(const std::vector<ForecastRecord>& price_records,
                             const MonthlySeries& price_history, PressureKind direction,
                             bool density_variant = false);

// Overlap-weighted fixed-event to fixed-horizon conversion:
// (k/12) * current + ((12-k)/12) * next.
double fe_to_fh(double current_year_forecast, double next_year_forecast, int k);

void write_pressure_csv(const std::string& path, const PressureIndex& index);

}  // namespace carboncast
