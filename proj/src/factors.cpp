#include "carboncast/factors.hpp"

#include <cmath>

#include "carboncast/errors.hpp"

namespace carboncast {

FactorModel extract_factors(const PredictorPanel& panel, int k) {
  panel.validate();
  const int n = panel.n_predictors();
  const int T = panel.length;
  if (k < 1 || k > std::min(n, T - 1)) {
    throw data_error("extract_factors: k=" + std::to_string(k) + " out of range");
  }

  Eigen::MatrixXd X(T, n);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < T; ++t) X(t, j) = panel.series[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(t)];
  }

  // SVD of the standardized data; singular values relate to correlation
  // eigenvalues via lambda = s^2/(T-1)
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  FactorModel model;
  model.loadings = svd.matrixV().leftCols(k);
  model.eigenvalues.resize(static_cast<std::size_t>(std::min(n, T)));
  double trace = 0.0;
  for (std::size_t i = 0; i < model.eigenvalues.size(); ++i) {
    model.eigenvalues[i] = sv(static_cast<int>(i)) * sv(static_cast<int>(i)) / (T - 1);
    trace += model.eigenvalues[i];
  }
  // the correlation matrix of a standardized panel has trace n even when
  // rank-deficient, so use n directly for the shares
  (void)trace;
  for (int i = 0; i < k; ++i) {
    model.variance_shares.push_back(model.eigenvalues[static_cast<std::size_t>(i)] / n);
  }

  // deterministic sign: largest-|loading| entry positive per factor
  for (int f = 0; f < k; ++f) {
    int imax = 0;
    double amax = 0.0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(model.loadings(j, f)) > amax) {
        amax = std::abs(model.loadings(j, f));
        imax = j;
      }
    }
    if (model.loadings(imax, f) < 0.0) model.loadings.col(f) = -model.loadings.col(f);
  }

  Eigen::MatrixXd scores = X * model.loadings;  // T x k
  for (int f = 0; f < k; ++f) {
    std::vector<double> vals(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) vals[static_cast<std::size_t>(t)] = scores(t, f);
    model.factors.emplace_back(panel.start, std::move(vals), Transform::none,
                               "factor" + std::to_string(f + 1));
  }
  for (const auto& s : panel.series) model.predictor_names.push_back(s.name);
  return model;
}

double factor_r2(const MonthlySeries& factor, const MonthlySeries& predictor) {
  if (factor.size() != predictor.size() || factor.start != predictor.start) {
    throw data_error("factor_r2: samples not aligned");
  }
  const int T = factor.size();
  if (T < 3) throw data_error("factor_r2: sample too short");
  double mf = mean_of(factor.values);
  double mp = mean_of(predictor.values);
  double sff = 0.0, spp = 0.0, sfp = 0.0;
  for (int t = 0; t < T; ++t) {
    double df = factor.values[static_cast<std::size_t>(t)] - mf;
    double dp = predictor.values[static_cast<std::size_t>(t)] - mp;
    sff += df * df;
    spp += dp * dp;
    sfp += df * dp;
  }
  if (spp <= 0.0) throw data_error("factor_r2: zero-variance predictor '" + predictor.name + "'");
  if (sff <= 0.0) throw data_error("factor_r2: zero-variance factor");
  return (sfp * sfp) / (sff * spp);
}

std::map<PredictorClass, MonthlySeries> factor_contributions(const FactorModel& model,
                                                             const PredictorPanel& panel,
                                                             int which) {
  if (which < 0 || which >= static_cast<int>(model.factors.size())) {
    throw data_error("factor_contributions: factor index out of range");
  }
  const int T = panel.length;
  std::map<PredictorClass, std::vector<double>> sums;
  for (int j = 0; j < panel.n_predictors(); ++j) {
    const auto& s = panel.series[static_cast<std::size_t>(j)];
    auto it = panel.class_of.find(s.name);
    if (it == panel.class_of.end()) {
      throw data_error("factor_contributions: unknown class for '" + s.name + "'");
    }
    auto& acc = sums[it->second];
    if (acc.empty()) acc.assign(static_cast<std::size_t>(T), 0.0);
    double lambda = model.loadings(j, which);
    for (int t = 0; t < T; ++t) acc[static_cast<std::size_t>(t)] += lambda * s.values[static_cast<std::size_t>(t)];
  }
  std::map<PredictorClass, MonthlySeries> out;
  for (auto& [klass, vals] : sums) {
    out.emplace(klass, MonthlySeries(panel.start, std::move(vals), Transform::none,
                                     "contrib_" + to_string(klass)));
  }
  return out;
}

MonthlySeries moving_average(const MonthlySeries& s, int window, MaMode mode) {
  if (window < 1 || window > s.size()) throw data_error("moving_average: invalid window");
  if (mode == MaMode::centered && window % 2 == 0) {
    throw data_error("moving_average: centered window must be odd");
  }
  std::vector<double> out;
  if (mode == MaMode::centered) {
    int half = window / 2;
    for (int t = half; t < s.size() - half; ++t) {
      double acc = 0.0;
      for (int j = -half; j <= half; ++j) acc += s.values[static_cast<std::size_t>(t + j)];
      out.push_back(acc / window);
    }
    return MonthlySeries(s.start.plus_months(half), std::move(out), s.transform_tag, s.name);
  }
  for (int t = window - 1; t < s.size(); ++t) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += s.values[static_cast<std::size_t>(t - j)];
    out.push_back(acc / window);
  }
  return MonthlySeries(s.start.plus_months(window - 1), std::move(out), s.transform_tag, s.name);
}

}  // namespace carboncast
