#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carboncast/data_bundle.hpp"
#include "carboncast/forecast.hpp"
#include "carboncast/models.hpp"

namespace carboncast {

enum class ModelFamily { rw, rwd, arima, bar, bvar, bfavar };

struct ModelSpecCfg {
  ModelFamily family = ModelFamily::rw;
  int p = 1;           // lag order (bar/bvar/bfavar) or AR order (arima)
  int ma = 0;          // MA order (arima)
  bool aic = false;    // per-origin AIC lag selection (bar)
  int n_factors = 0;   // bfavar
  bool sv = false;     // stochastic volatility (bvar/bfavar)
  std::string id;      // canonical token, e.g. "bfavar(1,2)-sv"

  bool multivariate() const {
    return family == ModelFamily::bvar || family == ModelFamily::bfavar;
  }
};

// Parses tokens like "rw", "rwd", "arima(0,1,1)", "bar(3)", "bar(aic)",
// "bvar(1)", "bvar(1)-sv", "bfavar(1,2)", "bfavar(3,1)-sv".
ModelSpecCfg parse_model_spec(const std::string& token);

struct BacktestPlan {
  MonthDate first_estimation_end;
  MonthDate last_origin;
  int horizons = 12;
  std::vector<ModelSpecCfg> models;
  bool density = true;
  int predictive_draws = 5000;
  int quantile_J = 20;
  std::uint64_t seed = 0;
  // When set, origins continue past last_origin so every horizon is scored
  // on the same target months [first+H, last+H].
  bool extend_origins = false;
  bool store_draws = false;
  bool emit_emissions_records = true;
  int sv_draws = 5000;
  int sv_burn = 2000;
  int aic_pmax = 12;
  int jobs = 1;
  // Standardization/factor statistics recomputed inside each window by
  // default (no look-ahead); `false` freezes them on the full sample.
  bool per_window_standardization = true;
  bool standardize_factors = false;
  bool chow_lin_constant = true;
  MinnesotaPrior minnesota;
  SvConfig svcfg;

  void validate() const;
  MonthDate common_eval_first() const { return first_estimation_end.plus_months(horizons); }
  MonthDate common_eval_last() const { return last_origin.plus_months(horizons); }
  MonthDate run_last_origin() const {
    return extend_origins ? last_origin.plus_months(horizons - 1) : last_origin;
  }
};

// Expanding-window run: for each origin the data are truncated, the panel
// re-standardized, factors re-extracted, emissions re-interpolated, every
// model re-fit and iterated h = 1..H. Records come back in canonical
// (origin, model, variable, horizon) order; realizations are attached where
// future data exist.
std::vector<ForecastRecord> run_expanding_window(const DataBundle& bundle,
                                                 const BacktestPlan& plan);

// Records whose target month falls in the common evaluation range and that
// carry a realization.
std::vector<ForecastRecord> filter_to_evaluation_sample(const std::vector<ForecastRecord>& records,
                                                        const BacktestPlan& plan);

void write_records_csv(const std::string& path, const std::vector<ForecastRecord>& records);
std::vector<ForecastRecord> read_records_csv(const std::string& path);
void write_records_json(const std::string& path, const std::vector<ForecastRecord>& records,
                        bool include_draws);

}  // namespace carboncast
