#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "carboncast/errors.hpp"
#include "carboncast/models.hpp"

namespace carboncast {

namespace {

// Concentrated Gaussian log-likelihood of an ARMA(<=1, <=1) with mean mu via
// the prediction-error decomposition. State alpha_t = [z_t, theta*eps_t]
// with z_t = y_t - mu; measurement is exact. sigma2 is concentrated out and
// reported back.
struct FilterOutput {
  double loglik = -std::numeric_limits<double>::infinity();
  double sigma2 = 0.0;
  double z_last = 0.0;
  double ma_state = 0.0;
};

FilterOutput arma_filter(const std::vector<double>& y, double mu, double phi, double theta) {
  const int n = static_cast<int>(y.size());
  Eigen::Matrix2d Tm;
  Tm << phi, 1.0, 0.0, 0.0;
  Eigen::Vector2d R(1.0, theta);
  Eigen::Matrix2d RRt = R * R.transpose();

  // stationary covariance of the state at unit innovation variance
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d TkT;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) TkT(2 * i + k, 2 * j + l) = Tm(i, j) * Tm(k, l);
  A -= TkT;
  Eigen::Vector4d vecQ(RRt(0, 0), RRt(1, 0), RRt(0, 1), RRt(1, 1));
  Eigen::Vector4d vecP = A.colPivHouseholderQr().solve(vecQ);
  Eigen::Matrix2d P;
  P << vecP(0), vecP(2), vecP(1), vecP(3);

  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  double sum_logf = 0.0, ssr = 0.0;
  Eigen::Vector2d a_filt = a;
  for (int t = 0; t < n; ++t) {
    double v = (y[static_cast<std::size_t>(t)] - mu) - a(0);
    double F = P(0, 0);
    if (F <= 1e-300 || !std::isfinite(F)) return {};
    sum_logf += std::log(F);
    ssr += v * v / F;
    a_filt = a + P.col(0) * (v / F);
    Eigen::Matrix2d P_filt = P - P.col(0) * P.row(0) / F;
    a = Tm * a_filt;
    P = Tm * P_filt * Tm.transpose() + RRt;
  }
  FilterOutput out;
  out.sigma2 = ssr / n;
  if (out.sigma2 <= 0.0 || !std::isfinite(out.sigma2)) return {};
  out.loglik = -0.5 * n * (std::log(2.0 * M_PI) + std::log(out.sigma2) + 1.0) - 0.5 * sum_logf;
  out.z_last = a_filt(0);
  out.ma_state = a_filt(1);
  return out;
}

// Nelder-Mead on an unconstrained parameterization; small and deterministic.
struct SimplexResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
};

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0, double step, int max_iter) {
  const int d = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d + 1), x0);
  std::vector<double> fv(static_cast<std::size_t>(d + 1));
  for (int i = 1; i <= d; ++i) pts[static_cast<std::size_t>(i)](i - 1) += step;
  for (int i = 0; i <= d; ++i) fv[static_cast<std::size_t>(i)] = f(pts[static_cast<std::size_t>(i)]);

  auto order = [&] {
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j)
        if (fv[static_cast<std::size_t>(j)] < fv[static_cast<std::size_t>(i)]) {
          std::swap(fv[static_cast<std::size_t>(i)], fv[static_cast<std::size_t>(j)]);
          std::swap(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
        }
  };
  order();
  SimplexResult res;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fv[static_cast<std::size_t>(d)] - fv[0]) < 1e-11 * (1.0 + std::abs(fv[0]))) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[static_cast<std::size_t>(i)];
    centroid /= d;
    Eigen::VectorXd xr = centroid + (centroid - pts[static_cast<std::size_t>(d)]);
    double fr = f(xr);
    if (fr < fv[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[static_cast<std::size_t>(d)]);
      double fe = f(xe);
      if (fe < fr) {
        pts[static_cast<std::size_t>(d)] = xe;
        fv[static_cast<std::size_t>(d)] = fe;
      } else {
        pts[static_cast<std::size_t>(d)] = xr;
        fv[static_cast<std::size_t>(d)] = fr;
      }
    } else if (fr < fv[static_cast<std::size_t>(d - 1)]) {
      pts[static_cast<std::size_t>(d)] = xr;
      fv[static_cast<std::size_t>(d)] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (pts[static_cast<std::size_t>(d)] - centroid);
      double fc = f(xc);
      if (fc < fv[static_cast<std::size_t>(d)]) {
        pts[static_cast<std::size_t>(d)] = xc;
        fv[static_cast<std::size_t>(d)] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          pts[static_cast<std::size_t>(i)] = pts[0] + 0.5 * (pts[static_cast<std::size_t>(i)] - pts[0]);
          fv[static_cast<std::size_t>(i)] = f(pts[static_cast<std::size_t>(i)]);
        }
      }
    }
    order();
  }
  res.x = pts[0];
  res.f = fv[0];
  return res;
}

}  // namespace

ArimaEstimate fit_arima(const MonthlySeries& y_diff, int ar, int ma) {
  if (ar < 0 || ar > 1 || ma < 0 || ma > 1) {
    throw config_error("fit_arima: only AR/MA orders in {0,1} are supported");
  }
  if (y_diff.size() < 20) throw data_error("fit_arima: need at least 20 observations");
  const auto& y = y_diff.values;
  double ybar = mean_of(y);
  double yvar = variance_of(y);
  if (yvar <= 0.0) throw data_error("fit_arima: zero-variance input");

  ArimaEstimate est;
  est.ar = ar;
  est.ma = ma;

  if (ar == 0 && ma == 0) {
    est.mu = ybar;
    est.sigma2 = yvar * (y.size() - 1.0) / y.size();
    est.loglik = -0.5 * y.size() * (std::log(2.0 * M_PI) + std::log(est.sigma2) + 1.0);
    est.z_last = y.back() - est.mu;
    est.ma_state = 0.0;
    return est;
  }

  const double bound = 0.999;
  auto unpack = [&](const Eigen::VectorXd& x, double& mu, double& phi, double& theta) {
    mu = x(0);
    int c = 1;
    phi = ar ? bound * std::tanh(x(c++)) : 0.0;
    theta = ma ? bound * std::tanh(x(c)) : 0.0;
  };
  auto neg_loglik = [&](const Eigen::VectorXd& x) {
    double mu, phi, theta;
    unpack(x, mu, phi, theta);
    FilterOutput f = arma_filter(y, mu, phi, theta);
    return std::isfinite(f.loglik) ? -f.loglik : 1e12;
  };

  const int dim = 1 + ar + ma;
  // three fixed starting points in (phi, theta) space
  const double starts[3][2] = {{0.0, 0.0}, {0.5, 0.3}, {-0.4, -0.2}};
  SimplexResult best;
  bool any_converged = false;
  for (const auto& s : starts) {
    Eigen::VectorXd x0(dim);
    x0(0) = ybar;
    int c = 1;
    if (ar) x0(c++) = std::atanh(s[0] / bound);
    if (ma) x0(c) = std::atanh(s[1] / bound);
    SimplexResult r = nelder_mead(neg_loglik, x0, 0.25, 600);
    any_converged = any_converged || r.converged;
    if (r.f < best.f) best = r;
  }
  if (!any_converged) {
    throw numerical_error("fit_arima: optimizer failed to converge; best loglik " +
                          std::to_string(-best.f));
  }

  unpack(best.x, est.mu, est.phi, est.theta);
  FilterOutput f = arma_filter(y, est.mu, est.phi, est.theta);
  est.sigma2 = f.sigma2;
  est.loglik = f.loglik;
  est.z_last = f.z_last;
  est.ma_state = f.ma_state;
  return est;
}

}  // namespace carboncast
