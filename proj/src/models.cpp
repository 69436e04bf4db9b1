#include "carboncast/models.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "carboncast/errors.hpp"

namespace carboncast {

void VarSpec::validate() const {
  if (n < 1 || p < 1) throw data_error("VarSpec: need n >= 1 and p >= 1");
}

void MinnesotaPrior::validate() const {
  if (lambda_overall <= 0.0 || lambda_lagdecay <= 0.0 || intercept_scale <= 0.0 ||
      lambda_cross <= 0.0 || lambda_cross > 1.0) {
    throw data_error("MinnesotaPrior: hyperparameters out of range");
  }
}

void ConjugatePosterior::validate() const {
  if (sigma_dof <= spec.n - 1) throw data_error("ConjugatePosterior: dof too small");
  Eigen::LLT<Eigen::MatrixXd> l1(coef_row_cov);
  Eigen::LLT<Eigen::MatrixXd> l2(sigma_scale);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
    throw numerical_error("ConjugatePosterior: covariance/scale not positive definite");
  }
}

void SvDraws::validate() const {
  for (const auto& d : draws) {
    for (int i = 0; i < spec.n; ++i) {
      if (std::abs(d.phi(i)) >= 1.0) throw numerical_error("SvDraws: |phi| >= 1");
      if (d.sig2_eps(i) <= 0.0) throw numerical_error("SvDraws: sigma2_eps <= 0");
      for (int j = 0; j <= i; ++j) {
        double expect = i == j ? 1.0 : d.b0(i, j);
        (void)expect;
      }
      if (std::abs(d.b0(i, i) - 1.0) > 1e-12) {
        throw numerical_error("SvDraws: B0 diagonal must be ones");
      }
    }
  }
}

RwPosterior fit_rw(const MonthlySeries& y, bool drift) {
  if (y.size() < (drift ? 3 : 2)) {
    throw data_error("fit_rw: series too short (" + std::to_string(y.size()) + " obs)");
  }
  std::vector<double> d(y.values.size() - 1);
  for (std::size_t i = 0; i + 1 < y.values.size(); ++i) d[i] = y.values[i + 1] - y.values[i];
  RwPosterior post;
  post.drift = drift;
  post.last_level_log = y.values.back();
  if (drift) {
    post.drift_mean = mean_of(d);
    post.resid_var = variance_of(d);
  } else {
    double s = 0.0;
    for (double v : d) s += v * v;
    post.resid_var = s / static_cast<double>(d.size());  // ML about the no-change mean
  }
  return post;
}

void build_var_design(const Eigen::MatrixXd& Y, const VarSpec& spec, Eigen::MatrixXd& X,
                      Eigen::MatrixXd& Y_eff) {
  spec.validate();
  const int T = static_cast<int>(Y.rows());
  const int n = spec.n;
  if (static_cast<int>(Y.cols()) != n) throw data_error("build_var_design: column mismatch");
  if (T <= spec.p) throw data_error("build_var_design: sample shorter than lag order");
  const int T_eff = T - spec.p;
  const int K = spec.n_regressors();
  X.resize(T_eff, K);
  Y_eff = Y.bottomRows(T_eff);
  for (int t = 0; t < T_eff; ++t) {
    int c = 0;
    if (spec.include_intercept) X(t, c++) = 1.0;
    for (int lag = 1; lag <= spec.p; ++lag) {
      for (int j = 0; j < n; ++j) X(t, c++) = Y(t + spec.p - lag, j);
    }
  }
}

Eigen::VectorXd ar_residual_variances(const Eigen::MatrixXd& Y, int p) {
  const int T = static_cast<int>(Y.rows());
  const int n = static_cast<int>(Y.cols());
  Eigen::VectorXd out(n);
  int use_p = p;
  while (use_p > 0 && T - use_p < use_p + 2) --use_p;  // shrink when the sample is tight
  for (int j = 0; j < n; ++j) {
    if (use_p == 0) {
      Eigen::VectorXd y = Y.col(j);
      double m = y.mean();
      out(j) = (y.array() - m).square().sum() / std::max(1, T - 1);
      continue;
    }
    const int T_eff = T - use_p;
    Eigen::MatrixXd X(T_eff, use_p + 1);
    Eigen::VectorXd y(T_eff);
    for (int t = 0; t < T_eff; ++t) {
      X(t, 0) = 1.0;
      for (int l = 1; l <= use_p; ++l) X(t, l) = Y(t + use_p - l, j);
      y(t) = Y(t + use_p, j);
    }
    Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    Eigen::VectorXd resid = y - X * beta;
    int dof = std::max(1, T_eff - use_p - 1);
    out(j) = resid.squaredNorm() / dof;
    if (out(j) <= 0.0 || !std::isfinite(out(j))) {
      throw data_error("ar_residual_variances: degenerate series in column " + std::to_string(j));
    }
  }
  return out;
}

namespace {

// Diagonal of the prior row covariance and the prior mean matrix for the
// conjugate Minnesota setup. With the Kronecker (NIW) structure the
// cross-equation factor cannot vary per equation, so lambda_cross enters
// every lag coefficient uniformly.
void minnesota_niw_moments(const VarSpec& spec, const MinnesotaPrior& prior,
                           const Eigen::VectorXd& sigma2_ar, Eigen::VectorXd& omega0_diag,
                           Eigen::MatrixXd& prior_mean) {
  const int K = spec.n_regressors();
  omega0_diag.resize(K);
  prior_mean = Eigen::MatrixXd::Zero(K, spec.n);
  int c = 0;
  if (spec.include_intercept) omega0_diag(c++) = prior.intercept_scale * prior.intercept_scale;
  for (int lag = 1; lag <= spec.p; ++lag) {
    double decay = std::pow(static_cast<double>(lag), prior.lambda_lagdecay);
    for (int j = 0; j < spec.n; ++j) {
      omega0_diag(c) = prior.lambda_overall * prior.lambda_overall * prior.lambda_cross /
                       (decay * sigma2_ar(j));
      if (lag == 1) prior_mean(c, j) = prior.own_mean_first_lag;
      ++c;
    }
  }
}

}  // namespace

ConjugatePosterior fit_niw_design(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                  const Eigen::MatrixXd& prior_mean,
                                  const Eigen::VectorXd& omega0_diag, const Eigen::MatrixXd& s0,
                                  double nu0, const VarSpec& spec) {
  if (X.rows() != Y.rows()) throw data_error("fit_niw_design: row mismatch");
  const int T_eff = static_cast<int>(X.rows());
  Eigen::MatrixXd P0 = omega0_diag.cwiseInverse().asDiagonal();  // prior precision
  Eigen::MatrixXd precision = P0 + X.transpose() * X;
  precision = 0.5 * (precision + precision.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw numerical_error("fit_bvar_minnesota: singular posterior moment matrix");
  }

  ConjugatePosterior post;
  post.spec = spec;
  post.coef_mean = llt.solve(P0 * prior_mean + X.transpose() * Y);
  post.coef_row_cov = llt.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
  post.coef_row_cov = 0.5 * (post.coef_row_cov + post.coef_row_cov.transpose());

  Eigen::MatrixXd S = s0 + Y.transpose() * Y + prior_mean.transpose() * P0 * prior_mean -
                      post.coef_mean.transpose() * precision * post.coef_mean;
  post.sigma_scale = 0.5 * (S + S.transpose());
  post.sigma_dof = nu0 + T_eff;
  post.validate();
  return post;
}

namespace {

ConjugatePosterior fit_niw(const Eigen::MatrixXd& Y, const VarSpec& spec,
                           const MinnesotaPrior& prior) {
  spec.validate();
  prior.validate();
  const int n = spec.n;
  if (static_cast<int>(Y.rows()) <= n * spec.p + 1) {
    throw data_error("fit_bvar_minnesota: sample too short for n*p + 1 regressors");
  }
  Eigen::MatrixXd X, Y_eff;
  build_var_design(Y, spec, X, Y_eff);

  Eigen::VectorXd sigma2_ar = ar_residual_variances(Y, spec.p);
  Eigen::VectorXd omega0_diag;
  Eigen::MatrixXd B0;
  minnesota_niw_moments(spec, prior, sigma2_ar, omega0_diag, B0);

  double nu0 = n + 2.0;
  Eigen::MatrixXd S0 = (nu0 - n - 1.0) * sigma2_ar.asDiagonal();
  return fit_niw_design(X, Y_eff, B0, omega0_diag, S0, nu0, spec);
}

}  // namespace

ConjugatePosterior fit_bvar_minnesota(const Eigen::MatrixXd& Y, const VarSpec& spec,
                                      const MinnesotaPrior& prior) {
  return fit_niw(Y, spec, prior);
}

ConjugatePosterior fit_bar(const MonthlySeries& y_diff, int p, const MinnesotaPrior& prior) {
  if (y_diff.size() <= p + 1) throw data_error("fit_bar: series too short for p=" + std::to_string(p));
  Eigen::MatrixXd Y(y_diff.size(), 1);
  for (int t = 0; t < y_diff.size(); ++t) Y(t, 0) = y_diff.values[static_cast<std::size_t>(t)];
  VarSpec spec;
  spec.n = 1;
  spec.p = p;
  spec.include_intercept = true;
  spec.variable_names = {y_diff.name};
  return fit_niw(Y, spec, prior);
}

int select_lag_aic(const MonthlySeries& y_diff, int pmax) {
  if (pmax < 1) throw data_error("select_lag_aic: pmax must be >= 1");
  const int T = y_diff.size();
  if (T <= pmax + 1) throw data_error("select_lag_aic: series too short for pmax");
  const int T_c = T - pmax;  // common estimable sample across candidate orders
  int best_p = 1;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= pmax; ++p) {
    Eigen::MatrixXd X(T_c, p + 1);
    Eigen::VectorXd y(T_c);
    for (int t = 0; t < T_c; ++t) {
      X(t, 0) = 1.0;
      for (int l = 1; l <= p; ++l) X(t, l) = y_diff.values[static_cast<std::size_t>(t + pmax - l)];
      y(t) = y_diff.values[static_cast<std::size_t>(t + pmax)];
    }
    Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    double rss = (y - X * beta).squaredNorm();
    if (rss <= 0.0) rss = 1e-300;
    double aic = T_c * std::log(rss / T_c) + 2.0 * (p + 1);
    if (aic < best_aic - 1e-12) {  // ties resolve to the smallest p
      best_aic = aic;
      best_p = p;
    }
  }
  return best_p;
}

std::string posterior_summary_json(const std::string& model_id, const ModelPosterior& post,
                                   std::uint64_t seed) {
  nlohmann::json j;
  j["model_id"] = model_id;
  j["seed"] = seed;
  if (const auto* rw = std::get_if<RwPosterior>(&post)) {
    j["family"] = "rw";
    j["drift"] = rw->drift;
    j["drift_mean"] = rw->drift_mean;
    j["resid_var"] = rw->resid_var;
  } else if (const auto* ar = std::get_if<ArimaEstimate>(&post)) {
    j["family"] = "arima";
    j["order"] = {ar->ar, 1, ar->ma};
    j["mu"] = ar->mu;
    j["phi"] = ar->phi;
    j["theta"] = ar->theta;
    j["sigma2"] = ar->sigma2;
    j["loglik"] = ar->loglik;
  } else if (const auto* cp = std::get_if<ConjugatePosterior>(&post)) {
    j["family"] = "conjugate_var";
    j["n"] = cp->spec.n;
    j["p"] = cp->spec.p;
    j["sigma_dof"] = cp->sigma_dof;
    std::vector<double> cm(cp->coef_mean.data(), cp->coef_mean.data() + cp->coef_mean.size());
    j["coef_mean"] = cm;
  } else if (const auto* sv = std::get_if<SvDraws>(&post)) {
    j["family"] = "var_sv";
    j["n"] = sv->spec.n;
    j["p"] = sv->spec.p;
    j["draw_count"] = sv->draw_count;
    std::vector<double> cm(sv->coef_mean.data(), sv->coef_mean.data() + sv->coef_mean.size());
    j["coef_mean"] = cm;
  }
  return j.dump();
}

}  // namespace carboncast
