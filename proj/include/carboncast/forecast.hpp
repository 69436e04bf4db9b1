#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "carboncast/eval.hpp"
#include "carboncast/models.hpp"
#include "carboncast/month_date.hpp"

namespace carboncast {

// One (origin, horizon) cell of a backtest run for one model and target
// variable.
struct ForecastRecord {
  std::string model_id;
  std::string variable;  // "price" or "emissions"
  MonthDate origin;
  int horizon = 0;
  double point_level = 0.0;
  int sign = 0;
  double origin_level = 0.0;
  double draw_mean_level = 0.0;  // mean of level draws, kept for diagnostics
  QuantileGrid quantiles;        // empty when densities are disabled
  std::vector<double> draws;     // retained only on request
  std::optional<double> realized;
};

// Plug-in multi-step iteration at posterior-mean (or ML) coefficients.
// `history` holds the estimation-scale data (rows = time, columns =
// variables); the last p rows feed the first step. Returns an H x n matrix
// of transformed-scale forecasts.
Eigen::MatrixXd iterate_point_forecast(const ModelPosterior& post,
                                       const Eigen::MatrixXd& history, int H);

// level_h = exp(r_last + cumulative sum of the delta-log path through h).
std::vector<double> to_levels(double r_last, const std::vector<double>& dlog_path);

// sign(point - origin) with exact zero mapped to 0.
int sign_forecast(double point_level, double level_at_origin);

// Predictive level draws for the target column: H x M matrix. Conjugate
// posteriors sample (coefficients, Sigma) before simulating Gaussian paths;
// SV models reuse retained MCMC draws and propagate the log-volatility
// forward with fresh innovations; RW/ARIMA simulate at the point estimates.
Eigen::MatrixXd simulate_predictive(const ModelPosterior& post, const Eigen::MatrixXd& history,
                                    double r_last, int H, int M, std::uint64_t seed,
                                    int target_col = 0);

// Empirical quantiles at alpha_j = j/J by linear interpolation of order
// statistics.
QuantileGrid quantile_grid(const std::vector<double>& draws, int J);

}  // namespace carboncast
