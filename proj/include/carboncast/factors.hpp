#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "carboncast/timeseries.hpp"

namespace carboncast {

// Principal-component decomposition of a standardized predictor panel.
// Loadings columns are orthonormal eigenvectors of the correlation matrix;
// factors are the PC scores. Each factor's sign is flipped so its largest
// absolute loading is positive.
struct FactorModel {
  Eigen::MatrixXd loadings;            // predictors x k
  std::vector<MonthlySeries> factors;  // k score series
  std::vector<double> eigenvalues;     // descending, all N of them
  std::vector<double> variance_shares; // first k shares of total variance
  std::vector<std::string> predictor_names;
};

FactorModel extract_factors(const PredictorPanel& panel, int k);

// R^2 of a univariate OLS of `factor` on `predictor` (with intercept);
// equals the squared sample correlation.
double factor_r2(const MonthlySeries& factor, const MonthlySeries& predictor);

// Per-class contribution series for one factor: sum over predictors in the
// class of loading * standardized value. Class sums add up to the factor
// score at every date.
std::map<PredictorClass, MonthlySeries> factor_contributions(const FactorModel& model,
                                                             const PredictorPanel& panel,
                                                             int which);

enum class MaMode { centered, backward };

// Arithmetic moving average; ends are shortened, never padded.
MonthlySeries moving_average(const MonthlySeries& s, int window, MaMode mode);

}  // namespace carboncast
