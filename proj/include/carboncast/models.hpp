#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "carboncast/timeseries.hpp"

namespace carboncast {

struct VarSpec {
  int n = 1;
  int p = 1;
  bool include_intercept = true;
  std::vector<std::string> variable_names;

  int n_regressors() const { return n * p + (include_intercept ? 1 : 0); }
  void validate() const;
};

// Shrinkage hyperparameters. lambda_overall scales all lag coefficients,
// lambda_cross multiplies cross-variable lags, lag variances decay as
// 1/lag^lambda_lagdecay, residual-variance ratios come from univariate AR
// fits. own_mean_first_lag is the prior mean of each variable's first own
// lag (0 for growth rates).
struct MinnesotaPrior {
  double lambda_overall = 0.2;
  double lambda_cross = 0.5;
  double lambda_lagdecay = 2.0;
  double intercept_scale = 100.0;
  double own_mean_first_lag = 0.0;

  void validate() const;
};

// No-change forecaster, optionally with drift; Gaussian innovations for
// density work.
struct RwPosterior {
  bool drift = false;
  double drift_mean = 0.0;
  double resid_var = 0.0;
  double last_level_log = 0.0;  // r_T, kept for convenience
};

// Exact Gaussian ML estimate of an ARMA(ar, ma) with mean on a differenced
// series, ar/ma in {0, 1}. Forecasting state: z_T = y_T - mu and the
// filtered MA component theta*eps_T.
struct ArimaEstimate {
  int ar = 0;
  int ma = 0;
  double mu = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double z_last = 0.0;
  double ma_state = 0.0;  // theta * E[eps_T | data]
};

// Matrix-variate Normal-inverse-Wishart posterior of a (B)VAR: coefficients
// K x n with row covariance coef_row_cov, Sigma ~ IW(sigma_scale, sigma_dof).
struct ConjugatePosterior {
  VarSpec spec;
  Eigen::MatrixXd coef_mean;
  Eigen::MatrixXd coef_row_cov;
  Eigen::MatrixXd sigma_scale;
  double sigma_dof = 0.0;

  void validate() const;
};

struct SvConfig {
  double mu_prior_mean = 0.0;
  double mu_prior_var = 100.0;  // diffuse N(0, 10^2)
  double phi_prior_mean = 0.95;
  double phi_prior_sd = 0.04;
  double phi_bound = 0.995;
  double sig2_prior_shape = 5.0;   // inverse-gamma
  double sig2_prior_scale = 0.16;
  double b0_prior_var = 10.0;      // free lower-triangle elements of B0
  double h_divergence_bound = 50.0;
  int thin = 1;
};

struct SvDraw {
  Eigen::MatrixXd coef;      // K x n
  Eigen::MatrixXd b0;        // n x n, unit lower triangular
  Eigen::MatrixXd h;         // n x T log-volatility paths
  Eigen::VectorXd mu;        // n
  Eigen::VectorXd phi;       // n
  Eigen::VectorXd sig2_eps;  // n
};

struct SvDraws {
  VarSpec spec;
  int draw_count = 0;
  std::vector<SvDraw> draws;
  Eigen::MatrixXd coef_mean;  // used for plug-in point forecasts

  void validate() const;
};

using ModelPosterior = std::variant<RwPosterior, ArimaEstimate, ConjugatePosterior, SvDraws>;

// --- estimation -------------------------------------------------------------

// y is the log-level series; differences are taken internally.
RwPosterior fit_rw(const MonthlySeries& y, bool drift);

ArimaEstimate fit_arima(const MonthlySeries& y_diff, int ar, int ma);

ConjugatePosterior fit_bar(const MonthlySeries& y_diff, int p, const MinnesotaPrior& prior);

// Smallest-AIC lag order among AR(1..pmax) fit by OLS on the common sample.
int select_lag_aic(const MonthlySeries& y_diff, int pmax);

ConjugatePosterior fit_bvar_minnesota(const Eigen::MatrixXd& Y, const VarSpec& spec,
                                      const MinnesotaPrior& prior);

// Design-level conjugate update: rows of (X, Y) are exchangeable
// observations; omega0_diag is the diagonal prior row covariance.
ConjugatePosterior fit_niw_design(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                  const Eigen::MatrixXd& prior_mean,
                                  const Eigen::VectorXd& omega0_diag, const Eigen::MatrixXd& s0,
                                  double nu0, const VarSpec& spec);

// Gibbs sampler for the VAR with Choleski multivariate stochastic
// volatility: Sigma_t^{-1} = B0' D_t^{-1} B0 with D_t = diag(exp(h_{i,t}))
// and independent AR(1) log-volatilities. Coefficients get an
// independent-Normal Minnesota prior; log-vol paths are drawn with the
// 7-component Gaussian-mixture auxiliary sampler and
// forward-filter backward-sampling.
SvDraws fit_bvar_sv(const Eigen::MatrixXd& Y, const VarSpec& spec,
                    const MinnesotaPrior& prior, const SvConfig& sv, int draws, int burn,
                    std::uint64_t seed);

// --- shared helpers ---------------------------------------------------------

// Lagged design matrix: rows t = p..T-1, columns [1, y_{t-1}', ..., y_{t-p}'].
void build_var_design(const Eigen::MatrixXd& Y, const VarSpec& spec, Eigen::MatrixXd& X,
                      Eigen::MatrixXd& Y_eff);

// OLS residual variance of a univariate AR(p) with intercept, per column.
Eigen::VectorXd ar_residual_variances(const Eigen::MatrixXd& Y, int p);

// One-line JSON summary (model id, spec, hyperparameters, posterior moments).
std::string posterior_summary_json(const std::string& model_id, const ModelPosterior& post,
                                   std::uint64_t seed);

}  // namespace carboncast
