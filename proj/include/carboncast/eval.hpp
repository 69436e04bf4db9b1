#pragma once

#include <string>
#include <vector>

namespace carboncast {

// Equally spaced quantile forecasts q(alpha_j), alpha_j = j/J for j=1..J-1.
struct QuantileGrid {
  int J = 20;
  std::vector<double> levels;  // size J-1, nondecreasing

  double alpha(int j) const { return static_cast<double>(j + 1) / J; }  // j is 0-based
  int size() const { return static_cast<int>(levels.size()); }
  void validate() const;
};

struct ScoreReport {
  std::string model_id;
  int horizon = 0;
  double rmsfe = 0.0;
  double relative_rmsfe = 1.0;
  double success_ratio = 0.0;
  double qcrps = 0.0;
  double wqcrps_center = 0.0;
  double wqcrps_right = 0.0;
  double wqcrps_left = 0.0;
  int n_obs = 0;
};

double rmsfe_of(const std::vector<double>& errors);
// RMSFE(model)/RMSFE(benchmark); below one means the model wins.
double relative_rmsfe(const std::vector<double>& model_errors,
                      const std::vector<double>& benchmark_errors);

// Share of exact sign matches (signs in {-1,0,+1}).
double success_ratio(const std::vector<int>& forecast_signs,
                     const std::vector<int>& realized_signs);

// Quantile score 2[1(R<=q) - alpha](q - R) averaged over the grid.
double qcrps(const QuantileGrid& quantiles, double realized);

enum class QcrpsRegion { center, right, left };

// Weighted variant: nu(alpha) = alpha(1-alpha) (center), alpha^2 (right
// tail), (1-alpha)^2 (left tail).
double weighted_qcrps(const QuantileGrid& quantiles, double realized, QcrpsRegion region);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Diebold-Mariano with Bartlett HAC (truncation h-1), Harvey small-sample
// correction, two-sided p from Student-t with n-1 dof. At h=1 this is the
// plain t-test on the loss differential.
TestResult dm_test(const std::vector<double>& loss_diff, int horizon);

// Pesaran-Timmermann static test of directional accuracy; one-sided p from
// the standard normal. Signs are mapped to up/down via (sign > 0).
TestResult pt_test(const std::vector<int>& forecast_signs,
                   const std::vector<int>& realized_signs);

struct FluctuationResult {
  int m = 0;
  double mu = 0.0;  // m/n
  std::vector<double> path;       // length n-m+1, centers m/2 .. n-1-m/2
  int first_center = 0;           // index into d of the first center
  double cv_one_sided_5pct = 0.0;
  double max_statistic = 0.0;
  bool reject = false;
};

// Rolling centered-window mean of the loss differential scaled by sqrt(m)
// over the full-sample HAC standard error; one-sided 5% critical value
// interpolated in mu = m/n from the published table.
FluctuationResult fluctuation_test(const std::vector<double>& loss_diff, int m,
                                   int hac_lags = 0);

// One-sided / two-sided 5% critical value for the fluctuation test at ratio
// mu (linear interpolation, clamped to the tabulated range [0.1, 0.9]).
double fluctuation_cv(double mu, bool one_sided = true);

// --- distribution helpers (shared with tests) -------------------------------

double normal_cdf(double x);
double student_t_cdf(double x, double dof);
// Bartlett-kernel long-run variance with `lags` autocovariance terms
// (denominator n); falls back to the plain variance when non-positive.
double bartlett_long_run_variance(const std::vector<double>& x, int lags);

}  // namespace carboncast
