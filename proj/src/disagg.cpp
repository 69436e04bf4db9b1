#include "carboncast/disagg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "carboncast/errors.hpp"

namespace carboncast {

namespace {

struct GlsFit {
  double loglik = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd monthly;
};

// One GLS evaluation at a fixed rho. X is the monthly regressor matrix,
// C the (years x months) sum-aggregation matrix.
GlsFit gls_at_rho(double rho, const Eigen::MatrixXd& X, const Eigen::VectorXd& ya,
                  const Eigen::MatrixXd& C) {
  const int n_years = static_cast<int>(ya.size());
  const int n_months = static_cast<int>(X.rows());

  Eigen::MatrixXd V(n_months, n_months);
  const double scale = 1.0 / (1.0 - rho * rho);
  for (int i = 0; i < n_months; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = scale * std::pow(rho, i - j);
      V(i, j) = v;
      V(j, i) = v;
    }
  }
  Eigen::MatrixXd VCt = V * C.transpose();          // months x years
  Eigen::MatrixXd Va = C * VCt;                     // years x years
  Eigen::LLT<Eigen::MatrixXd> llt_va(Va);
  if (llt_va.info() != Eigen::Success) {
    throw numerical_error("chow_lin: aggregated AR(1) covariance not positive definite");
  }
  Eigen::MatrixXd CX = C * X;                       // years x k
  Eigen::MatrixXd Vinv_CX = llt_va.solve(CX);
  Eigen::VectorXd Vinv_ya = llt_va.solve(ya);
  Eigen::MatrixXd xtx = CX.transpose() * Vinv_CX;   // k x k
  Eigen::LLT<Eigen::MatrixXd> llt_xtx(xtx);
  if (llt_xtx.info() != Eigen::Success) {
    throw numerical_error("chow_lin: singular regressor cross-product (collinear indicator)");
  }
  GlsFit fit;
  fit.beta = llt_xtx.solve(CX.transpose() * Vinv_ya);
  Eigen::VectorXd resid = ya - CX * fit.beta;
  Eigen::VectorXd Vinv_resid = llt_va.solve(resid);
  double ssr = resid.dot(Vinv_resid);
  double sigma2 = ssr / n_years;
  if (sigma2 <= 0.0) sigma2 = 1e-300;
  double logdet = 0.0;
  for (int i = 0; i < n_years; ++i) logdet += 2.0 * std::log(llt_va.matrixL()(i, i));
  fit.loglik = -0.5 * n_years * (std::log(2.0 * M_PI) + std::log(sigma2) + 1.0) - 0.5 * logdet;
  // distribute annual residuals across months through the AR(1) covariance
  fit.monthly = X * fit.beta + VCt * Vinv_resid;
  return fit;
}

}  // namespace

ChowLinResult chow_lin(const AnnualSeries& annual, const MonthlySeries& indicator,
                       bool constant, std::optional<double> fixed_rho) {
  const int n_years = annual.size();
  if (n_years < 2) throw data_error("chow_lin: need at least 2 annual observations");
  const int n_months = 12 * n_years;
  if (indicator.size() != n_months) {
    throw data_error("chow_lin: indicator has " + std::to_string(indicator.size()) +
                     " months, expected " + std::to_string(n_months));
  }
  if (indicator.start.month != 1) {
    throw data_error("chow_lin: indicator must start in January");
  }

  const int k = constant ? 2 : 1;
  Eigen::MatrixXd X(n_months, k);
  for (int i = 0; i < n_months; ++i) {
    int c = 0;
    if (constant) X(i, c++) = 1.0;
    X(i, c) = indicator.values[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n_years, n_months);
  for (int y = 0; y < n_years; ++y) {
    for (int m = 0; m < 12; ++m) C(y, 12 * y + m) = 1.0;
  }
  Eigen::VectorXd ya(n_years);
  for (int y = 0; y < n_years; ++y) ya(y) = annual.values[static_cast<std::size_t>(y)];

  double best_rho;
  GlsFit best;
  if (fixed_rho) {
    if (std::abs(*fixed_rho) >= 0.99 + 1e-12) {
      throw data_error("chow_lin: fixed rho outside (-0.99, 0.99)");
    }
    best_rho = *fixed_rho;
    best = gls_at_rho(best_rho, X, ya, C);
  } else {
    // coarse grid, then golden-section refinement around the best point
    const int grid_n = 41;
    const double lo = -0.99, hi = 0.99;
    best_rho = 0.0;
    best.loglik = -std::numeric_limits<double>::infinity();
    double step = (hi - lo) / (grid_n - 1);
    for (int g = 0; g < grid_n; ++g) {
      double rho = lo + g * step;
      GlsFit fit = gls_at_rho(rho, X, ya, C);
      if (fit.loglik > best.loglik) {
        best = std::move(fit);
        best_rho = rho;
      }
    }
    double a = std::max(lo, best_rho - step);
    double b = std::min(hi, best_rho + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = gls_at_rho(c, X, ya, C).loglik;
    double fd = gls_at_rho(d, X, ya, C).loglik;
    for (int it = 0; it < 80 && (b - a) > 1e-9; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = gls_at_rho(c, X, ya, C).loglik;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = gls_at_rho(d, X, ya, C).loglik;
      }
    }
    double mid = 0.5 * (a + b);
    GlsFit fit = gls_at_rho(mid, X, ya, C);
    if (fit.loglik > best.loglik) {
      best = std::move(fit);
      best_rho = mid;
    }
  }

  ChowLinResult res;
  res.rho = best_rho;
  res.beta.assign(best.beta.data(), best.beta.data() + best.beta.size());
  res.fit_loglik = best.loglik;
  std::vector<double> vals(best.monthly.data(), best.monthly.data() + best.monthly.size());
  res.monthly = MonthlySeries(indicator.start, std::move(vals), Transform::none,
                              "interpolated_" + std::to_string(n_years) + "y");
  return res;
}

MonthlySeries weighted_indicator(const std::vector<MonthlySeries>& ip_series,
                                 const std::vector<double>& weights) {
  if (ip_series.empty()) throw data_error("weighted_indicator: no series");
  if (ip_series.size() != weights.size()) {
    throw data_error("weighted_indicator: series/weights length mismatch");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw data_error("weighted_indicator: negative weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw data_error("weighted_indicator: weights sum to zero");
  const auto& first = ip_series.front();
  for (const auto& s : ip_series) {
    if (s.size() != first.size() || s.start != first.start) {
      throw data_error("weighted_indicator: series '" + s.name + "' not aligned");
    }
  }
  std::vector<double> out(static_cast<std::size_t>(first.size()), 0.0);
  for (std::size_t j = 0; j < ip_series.size(); ++j) {
    double w = weights[j] / wsum;
    for (int i = 0; i < first.size(); ++i) {
      out[static_cast<std::size_t>(i)] += w * ip_series[j].values[static_cast<std::size_t>(i)];
    }
  }
  return MonthlySeries(first.start, std::move(out), Transform::none, "weighted_indicator");
}

MonthlySeries disaggregate_emissions(const AnnualSeries& annual,
                                     const MonthlySeries& indicator, bool constant) {
  if (indicator.start.month != 1) {
    throw data_error("disaggregate_emissions: indicator must start in January");
  }
  if (indicator.start.year < annual.start_year) {
    throw data_error("disaggregate_emissions: indicator starts before the annual sample");
  }
  const int offset_years = indicator.start.year - annual.start_year;
  const int full_years = indicator.size() / 12;
  const int tail_months = indicator.size() - 12 * full_years;
  if (full_years < 2) {
    throw data_error("disaggregate_emissions: need at least 2 complete indicator years");
  }

  // align annual values with the indicator span, carrying the last value
  // forward for years not yet reported
  AnnualSeries aligned;
  aligned.start_year = indicator.start.year;
  for (int y = 0; y < full_years; ++y) {
    int src = offset_years + y;
    aligned.values.push_back(src < annual.size()
                                 ? annual.values[static_cast<std::size_t>(src)]
                                 : annual.values.back());
  }

  MonthlySeries full_part = indicator.window(
      indicator.start, indicator.start.plus_months(12 * full_years - 1));
  ChowLinResult fit = chow_lin(aligned, full_part, constant);

  std::vector<double> vals = fit.monthly.values;
  if (tail_months > 0) {
    // regression fit plus AR(1)-decayed residual for the trailing partial year
    int base = 12 * full_years - 1;
    double last_resid = vals[static_cast<std::size_t>(base)];
    {
      double reg = 0.0;
      int c = 0;
      if (constant) reg += fit.beta[static_cast<std::size_t>(c++)];
      reg += fit.beta[static_cast<std::size_t>(c)] * indicator.values[static_cast<std::size_t>(base)];
      last_resid -= reg;
    }
    for (int m = 0; m < tail_months; ++m) {
      int idx = 12 * full_years + m;
      double reg = 0.0;
      int c = 0;
      if (constant) reg += fit.beta[static_cast<std::size_t>(c++)];
      reg += fit.beta[static_cast<std::size_t>(c)] * indicator.values[static_cast<std::size_t>(idx)];
      vals.push_back(reg + std::pow(fit.rho, m + 1) * last_resid);
    }
  }
  return MonthlySeries(indicator.start, std::move(vals), Transform::none, "emissions_monthly");
}

}  // namespace carboncast
