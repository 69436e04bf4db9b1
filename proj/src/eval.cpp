#include "carboncast/eval.hpp"

#include <algorithm>
#include <cmath>

#include "carboncast/errors.hpp"
#include "carboncast/timeseries.hpp"

namespace carboncast {

void QuantileGrid::validate() const {
  if (J < 2) throw data_error("QuantileGrid: J must be >= 2");
  if (size() != J - 1) {
    throw data_error("QuantileGrid: expected " + std::to_string(J - 1) + " quantiles, got " +
                     std::to_string(size()));
  }
  for (int j = 1; j < size(); ++j) {
    if (levels[static_cast<std::size_t>(j)] < levels[static_cast<std::size_t>(j - 1)]) {
      throw data_error("QuantileGrid: quantiles not nondecreasing");
    }
  }
}

double rmsfe_of(const std::vector<double>& errors) {
  if (errors.empty()) throw data_error("rmsfe_of: no errors");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return std::sqrt(s / static_cast<double>(errors.size()));
}

double relative_rmsfe(const std::vector<double>& model_errors,
                      const std::vector<double>& benchmark_errors) {
  if (model_errors.size() != benchmark_errors.size()) {
    throw data_error("relative_rmsfe: length mismatch");
  }
  double bench = rmsfe_of(benchmark_errors);
  if (bench <= 0.0) throw data_error("relative_rmsfe: zero benchmark RMSFE");
  return rmsfe_of(model_errors) / bench;
}

double success_ratio(const std::vector<int>& forecast_signs,
                     const std::vector<int>& realized_signs) {
  if (forecast_signs.empty() || forecast_signs.size() != realized_signs.size()) {
    throw data_error("success_ratio: empty or mismatched sign series");
  }
  int hits = 0;
  for (std::size_t i = 0; i < forecast_signs.size(); ++i) {
    if (forecast_signs[i] == realized_signs[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(forecast_signs.size());
}

namespace {

double quantile_score(double q, double alpha, double realized) {
  double ind = realized <= q ? 1.0 : 0.0;
  return 2.0 * (ind - alpha) * (q - realized);
}

}  // namespace

double qcrps(const QuantileGrid& quantiles, double realized) {
  quantiles.validate();
  double acc = 0.0;
  for (int j = 0; j < quantiles.size(); ++j) {
    acc += quantile_score(quantiles.levels[static_cast<std::size_t>(j)], quantiles.alpha(j), realized);
  }
  return acc / quantiles.size();
}

double weighted_qcrps(const QuantileGrid& quantiles, double realized, QcrpsRegion region) {
  quantiles.validate();
  double acc = 0.0;
  for (int j = 0; j < quantiles.size(); ++j) {
    double a = quantiles.alpha(j);
    double nu = 0.0;
    switch (region) {
      case QcrpsRegion::center: nu = a * (1.0 - a); break;
      case QcrpsRegion::right: nu = a * a; break;
      case QcrpsRegion::left: nu = (1.0 - a) * (1.0 - a); break;
    }
    acc += nu * quantile_score(quantiles.levels[static_cast<std::size_t>(j)], a, realized);
  }
  return acc / quantiles.size();
}

double bartlett_long_run_variance(const std::vector<double>& x, int lags) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw data_error("bartlett_long_run_variance: need at least 2 observations");
  double m = mean_of(x);
  auto gamma = [&](int k) {
    double s = 0.0;
    for (int t = k; t < n; ++t) s += (x[static_cast<std::size_t>(t)] - m) * (x[static_cast<std::size_t>(t - k)] - m);
    return s / n;
  };
  double g0 = gamma(0);
  double v = g0;
  for (int k = 1; k <= lags && k < n; ++k) {
    double w = 1.0 - static_cast<double>(k) / (lags + 1);
    v += 2.0 * w * gamma(k);
  }
  return v > 0.0 ? v : g0;
}

TestResult dm_test(const std::vector<double>& loss_diff, int horizon) {
  const int n = static_cast<int>(loss_diff.size());
  if (n < 10) throw data_error("dm_test: need at least 10 observations");
  if (horizon < 1) throw data_error("dm_test: horizon must be >= 1");
  double dbar = mean_of(loss_diff);
  double lrv = bartlett_long_run_variance(loss_diff, horizon - 1);
  if (lrv <= 0.0) {
    if (dbar == 0.0) return {0.0, 1.0};  // identical losses: no evidence either way
    throw data_error("dm_test: zero variance of the loss differential");
  }
  double h = horizon;
  double harvey = std::sqrt((n + 1.0 - 2.0 * h + h * (h - 1.0) / n) / n);
  TestResult res;
  res.statistic = harvey * dbar / std::sqrt(lrv / n);
  res.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(res.statistic), n - 1));
  return res;
}

TestResult pt_test(const std::vector<int>& forecast_signs,
                   const std::vector<int>& realized_signs) {
  const int n = static_cast<int>(forecast_signs.size());
  if (n < 10 || forecast_signs.size() != realized_signs.size()) {
    throw data_error("pt_test: need at least 10 paired observations");
  }
  double hits = 0.0, px = 0.0, py = 0.0;
  for (int i = 0; i < n; ++i) {
    bool up_f = forecast_signs[static_cast<std::size_t>(i)] > 0;
    bool up_r = realized_signs[static_cast<std::size_t>(i)] > 0;
    if (up_f == up_r) hits += 1.0;
    if (up_f) px += 1.0;
    if (up_r) py += 1.0;
  }
  hits /= n;
  px /= n;
  py /= n;
  if (px <= 0.0 || px >= 1.0 || py <= 0.0 || py >= 1.0) {
    throw data_error("pt_test: degenerate sign margins (no variation)");
  }
  double pstar = py * px + (1.0 - py) * (1.0 - px);
  double var_p = pstar * (1.0 - pstar) / n;
  double var_pstar = ((2.0 * py - 1.0) * (2.0 * py - 1.0) * px * (1.0 - px)) / n +
                     ((2.0 * px - 1.0) * (2.0 * px - 1.0) * py * (1.0 - py)) / n +
                     4.0 * py * px * (1.0 - py) * (1.0 - px) / (static_cast<double>(n) * n);
  double denom = var_p - var_pstar;
  if (denom <= 0.0) throw data_error("pt_test: nonpositive variance estimate");
  TestResult res;
  res.statistic = (hits - pstar) / std::sqrt(denom);
  res.p_value = 1.0 - normal_cdf(res.statistic);
  return res;
}

namespace {

// One-sided / two-sided 5% critical values from Giacomini & Rossi (2010),
// Table I, keyed by mu = m/n.
constexpr double kFluctMu[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
constexpr double kFluctCvOneSided[] = {3.176, 2.938, 2.770, 2.624, 2.475,
                                       2.352, 2.248, 2.080, 1.975};
constexpr double kFluctCvTwoSided[] = {3.393, 3.179, 3.012, 2.890, 2.779,
                                       2.634, 2.560, 2.433, 2.331};

}  // namespace

double fluctuation_cv(double mu, bool one_sided) {
  const double* cv = one_sided ? kFluctCvOneSided : kFluctCvTwoSided;
  const int n = 9;
  if (mu <= kFluctMu[0]) return cv[0];
  if (mu >= kFluctMu[n - 1]) return cv[n - 1];
  int i = 0;
  while (i + 1 < n && kFluctMu[i + 1] < mu) ++i;
  double frac = (mu - kFluctMu[i]) / (kFluctMu[i + 1] - kFluctMu[i]);
  return cv[i] * (1.0 - frac) + cv[i + 1] * frac;
}

FluctuationResult fluctuation_test(const std::vector<double>& loss_diff, int m, int hac_lags) {
  const int n = static_cast<int>(loss_diff.size());
  if (m % 2 == 0) throw data_error("fluctuation_test: window must be odd");
  if (m > n) throw data_error("fluctuation_test: window exceeds sample");
  FluctuationResult res;
  res.m = m;
  res.mu = static_cast<double>(m) / n;
  res.first_center = m / 2;
  double lrv = bartlett_long_run_variance(loss_diff, hac_lags);
  double se = std::sqrt(lrv);
  res.max_statistic = -std::numeric_limits<double>::infinity();
  for (int c = res.first_center; c + m / 2 < n; ++c) {
    double acc = 0.0;
    for (int j = c - m / 2; j <= c + m / 2; ++j) acc += loss_diff[static_cast<std::size_t>(j)];
    double stat = se > 0.0 ? std::sqrt(static_cast<double>(m)) * (acc / m) / se : 0.0;
    res.path.push_back(stat);
    res.max_statistic = std::max(res.max_statistic, stat);
  }
  res.cv_one_sided_5pct = fluctuation_cv(res.mu, true);
  res.reject = res.max_statistic > res.cv_one_sided_5pct;
  return res;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// regularized incomplete beta via Lentz continued fraction
double betacf(double a, double b, double x) {
  const int maxit = 300;
  const double eps = 3e-14, fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int mm = 1; mm <= maxit; ++mm) {
    int m2 = 2 * mm;
    double aa = mm * (b - mm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + mm) * (qab + mm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double incbeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double front = std::exp(lbeta + a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double x, double dof) {
  double ib = incbeta(dof / 2.0, 0.5, dof / (dof + x * x));
  return x >= 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

}  // namespace carboncast
