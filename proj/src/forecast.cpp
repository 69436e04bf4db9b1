#include "carboncast/forecast.hpp"

#include <cmath>
#include <random>

#include "carboncast/errors.hpp"
#include "carboncast/timeseries.hpp"

namespace carboncast {

namespace {

constexpr double kDlogBlowupBound = 10.0;

void check_dlog(double v) {
  if (!std::isfinite(v) || std::abs(v) > kDlogBlowupBound) {
    throw numerical_error("forecast iteration blew up (|dlog| > 10)");
  }
}

// VAR one-step: x = [1, y_{t-1}', ..., y_{t-p}'], forecast = coef' x.
// `recent` rows are ordered oldest..newest with exactly p rows.
Eigen::VectorXd var_step(const Eigen::MatrixXd& coef, const VarSpec& spec,
                         const std::vector<Eigen::VectorXd>& recent) {
  const int K = spec.n_regressors();
  Eigen::VectorXd x(K);
  int c = 0;
  if (spec.include_intercept) x(c++) = 1.0;
  for (int lag = 1; lag <= spec.p; ++lag) {
    const Eigen::VectorXd& y = recent[recent.size() - static_cast<std::size_t>(lag)];
    for (int j = 0; j < spec.n; ++j) x(c++) = y(j);
  }
  return coef.transpose() * x;
}

std::vector<Eigen::VectorXd> recent_rows(const Eigen::MatrixXd& history, int p) {
  if (static_cast<int>(history.rows()) < p) {
    throw data_error("iterate_point_forecast: history shorter than lag order");
  }
  std::vector<Eigen::VectorXd> recent;
  for (int t = static_cast<int>(history.rows()) - p; t < static_cast<int>(history.rows()); ++t) {
    recent.push_back(history.row(t).transpose());
  }
  return recent;
}

Eigen::MatrixXd iterate_var(const Eigen::MatrixXd& coef, const VarSpec& spec,
                            const Eigen::MatrixXd& history, int H) {
  auto recent = recent_rows(history, spec.p);
  Eigen::MatrixXd out(H, spec.n);
  for (int h = 0; h < H; ++h) {
    Eigen::VectorXd f = var_step(coef, spec, recent);
    for (int j = 0; j < spec.n; ++j) check_dlog(f(j));
    out.row(h) = f.transpose();
    recent.push_back(f);
    recent.erase(recent.begin());
  }
  return out;
}

}  // namespace

Eigen::MatrixXd iterate_point_forecast(const ModelPosterior& post,
                                       const Eigen::MatrixXd& history, int H) {
  if (H < 1) throw data_error("iterate_point_forecast: H must be >= 1");
  if (const auto* rw = std::get_if<RwPosterior>(&post)) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(H, 1);
    if (rw->drift) out.setConstant(rw->drift_mean);
    return out;
  }
  if (const auto* ar = std::get_if<ArimaEstimate>(&post)) {
    Eigen::MatrixXd out(H, 1);
    // state [z, ma]: z_{T+1} = phi z_T + ma_state, then geometric decay
    double z = ar->phi * ar->z_last + ar->ma_state;
    for (int h = 0; h < H; ++h) {
      check_dlog(ar->mu + z);
      out(h, 0) = ar->mu + z;
      z = ar->phi * z;
    }
    return out;
  }
  if (const auto* cp = std::get_if<ConjugatePosterior>(&post)) {
    return iterate_var(cp->coef_mean, cp->spec, history, H);
  }
  const auto& sv = std::get<SvDraws>(post);
  return iterate_var(sv.coef_mean, sv.spec, history, H);
}

std::vector<double> to_levels(double r_last, const std::vector<double>& dlog_path) {
  if (!std::isfinite(r_last)) throw data_error("to_levels: non-finite origin log level");
  std::vector<double> out;
  out.reserve(dlog_path.size());
  double acc = r_last;
  for (double d : dlog_path) {
    if (!std::isfinite(d)) throw numerical_error("to_levels: non-finite path entry");
    acc += d;
    if (acc > 700.0) throw numerical_error("to_levels: overflow in level conversion");
    out.push_back(std::exp(acc));
  }
  return out;
}

int sign_forecast(double point_level, double level_at_origin) {
  if (!std::isfinite(point_level) || !std::isfinite(level_at_origin)) {
    throw data_error("sign_forecast: non-finite input");
  }
  double d = point_level - level_at_origin;
  if (d > 0.0) return 1;
  if (d < 0.0) return -1;
  return 0;
}

namespace {

// Inverse-Wishart draw via the Bartlett decomposition: W ~ Wishart(S^-1,
// nu), Sigma = W^-1 computed through triangular solves.
Eigen::MatrixXd draw_inverse_wishart(const Eigen::MatrixXd& scale, double dof,
                                     std::mt19937_64& gen) {
  const int n = static_cast<int>(scale.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) {
    throw numerical_error("draw_inverse_wishart: scale not positive definite");
  }
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    std::chi_squared_distribution<double> chi(dof - i);
    A(i, i) = std::sqrt(chi(gen));
    for (int j = 0; j < i; ++j) A(i, j) = nd(gen);
  }
  // C C' = S^-1 with C = (Ls')^-1; Sigma = (C A)^-T (C A)^-1 = M' M with
  // M = A^-1 Ls'
  Eigen::MatrixXd Ls = llt.matrixL();
  Eigen::MatrixXd M = A.triangularView<Eigen::Lower>().solve(Ls.transpose());
  Eigen::MatrixXd sigma = M.transpose() * M;
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd simulate_conjugate(const ConjugatePosterior& cp, const Eigen::MatrixXd& history,
                                   double r_last, int H, int M, std::mt19937_64& gen,
                                   int target_col) {
  const int n = cp.spec.n;
  const int K = cp.spec.n_regressors();
  std::normal_distribution<double> nd;
  Eigen::LLT<Eigen::MatrixXd> llt_row(cp.coef_row_cov);
  if (llt_row.info() != Eigen::Success) {
    throw numerical_error("simulate_predictive: coefficient row covariance not PD");
  }
  Eigen::MatrixXd L_row = llt_row.matrixL();
  auto recent0 = recent_rows(history, cp.spec.p);

  Eigen::MatrixXd out(H, M);
  for (int m = 0; m < M; ++m) {
    Eigen::MatrixXd sigma = draw_inverse_wishart(cp.sigma_scale, cp.sigma_dof, gen);
    Eigen::LLT<Eigen::MatrixXd> llt_sig(sigma);
    if (llt_sig.info() != Eigen::Success) {
      throw numerical_error("simulate_predictive: Sigma draw not PD");
    }
    Eigen::MatrixXd L_sig = llt_sig.matrixL();
    Eigen::MatrixXd Z(K, n);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < n; ++j) Z(i, j) = nd(gen);
    Eigen::MatrixXd coef = cp.coef_mean + L_row * Z * L_sig.transpose();

    auto recent = recent0;
    double acc = r_last;
    for (int h = 0; h < H; ++h) {
      Eigen::VectorXd mean = var_step(coef, cp.spec, recent);
      Eigen::VectorXd z(n);
      for (int j = 0; j < n; ++j) z(j) = nd(gen);
      Eigen::VectorXd y = mean + L_sig * z;
      recent.push_back(y);
      recent.erase(recent.begin());
      acc += y(target_col);
      if (acc > 700.0) throw numerical_error("simulate_predictive: overflow in level path");
      out(h, m) = std::exp(acc);
    }
  }
  return out;
}

Eigen::MatrixXd simulate_sv(const SvDraws& sv, const Eigen::MatrixXd& history, double r_last,
                            int H, int M, std::mt19937_64& gen, int target_col) {
  const int n = sv.spec.n;
  std::normal_distribution<double> nd;
  auto recent0 = recent_rows(history, sv.spec.p);
  if (sv.draw_count < 1) throw data_error("simulate_predictive: empty SV draw set");

  Eigen::MatrixXd out(H, M);
  for (int m = 0; m < M; ++m) {
    const SvDraw& d = sv.draws[static_cast<std::size_t>(m % sv.draw_count)];
    Eigen::VectorXd hvol = d.h.col(d.h.cols() - 1);
    auto recent = recent0;
    double acc = r_last;
    for (int h = 0; h < H; ++h) {
      for (int i = 0; i < n; ++i) {
        hvol(i) = d.mu(i) + d.phi(i) * (hvol(i) - d.mu(i)) +
                  std::sqrt(d.sig2_eps(i)) * nd(gen);
      }
      Eigen::VectorXd eps(n);
      for (int i = 0; i < n; ++i) eps(i) = std::exp(0.5 * hvol(i)) * nd(gen);
      // u = B0^{-1} eps by forward substitution (B0 unit lower triangular)
      Eigen::VectorXd u =
          d.b0.triangularView<Eigen::UnitLower>().solve(eps);
      Eigen::VectorXd y = var_step(d.coef, sv.spec, recent) + u;
      recent.push_back(y);
      recent.erase(recent.begin());
      acc += y(target_col);
      if (acc > 700.0) throw numerical_error("simulate_predictive: overflow in level path");
      out(h, m) = std::exp(acc);
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd simulate_predictive(const ModelPosterior& post, const Eigen::MatrixXd& history,
                                    double r_last, int H, int M, std::uint64_t seed,
                                    int target_col) {
  if (M < 500) throw data_error("simulate_predictive: need at least 500 draws");
  if (H < 1) throw data_error("simulate_predictive: H must be >= 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;

  if (const auto* rw = std::get_if<RwPosterior>(&post)) {
    double sd = std::sqrt(std::max(0.0, rw->resid_var));
    Eigen::MatrixXd out(H, M);
    for (int m = 0; m < M; ++m) {
      double acc = r_last;
      for (int h = 0; h < H; ++h) {
        acc += (rw->drift ? rw->drift_mean : 0.0) + sd * nd(gen);
        if (acc > 700.0) throw numerical_error("simulate_predictive: overflow in level path");
        out(h, m) = std::exp(acc);
      }
    }
    return out;
  }
  if (const auto* ar = std::get_if<ArimaEstimate>(&post)) {
    double sd = std::sqrt(std::max(0.0, ar->sigma2));
    Eigen::MatrixXd out(H, M);
    for (int m = 0; m < M; ++m) {
      double z = ar->z_last;
      double ma = ar->ma_state;
      double acc = r_last;
      for (int h = 0; h < H; ++h) {
        double eps = sd * nd(gen);
        z = ar->phi * z + ma + eps;
        ma = ar->theta * eps;
        acc += ar->mu + z;
        if (acc > 700.0) throw numerical_error("simulate_predictive: overflow in level path");
        out(h, m) = std::exp(acc);
      }
    }
    return out;
  }
  if (const auto* cp = std::get_if<ConjugatePosterior>(&post)) {
    return simulate_conjugate(*cp, history, r_last, H, M, gen, target_col);
  }
  return simulate_sv(std::get<SvDraws>(post), history, r_last, H, M, gen, target_col);
}

QuantileGrid quantile_grid(const std::vector<double>& draws, int J) {
  if (draws.empty()) throw data_error("quantile_grid: no draws");
  if (J < 2) throw data_error("quantile_grid: J must be >= 2");
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  QuantileGrid grid;
  grid.J = J;
  grid.levels.resize(static_cast<std::size_t>(J - 1));
  const double n1 = static_cast<double>(sorted.size() - 1);
  for (int j = 1; j < J; ++j) {
    double pos = (static_cast<double>(j) / J) * n1;
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    grid.levels[static_cast<std::size_t>(j - 1)] =
        lo + 1 < sorted.size() ? sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac : sorted.back();
  }
  grid.validate();
  return grid;
}

}  // namespace carboncast
