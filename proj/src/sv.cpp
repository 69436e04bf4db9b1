#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "carboncast/errors.hpp"
#include "carboncast/models.hpp"

namespace carboncast {

namespace {

// Kim-Shephard-Chib (1998) seven-component Gaussian mixture for log chi^2_1.
// Tabulated means target log(eps^2) + 1.2704; the offset is removed below.
constexpr int kMix = 7;
constexpr double kMixProb[kMix] = {0.00730, 0.10556, 0.00002, 0.04395,
                                   0.34001, 0.24566, 0.25750};
constexpr double kMixMeanRaw[kMix] = {-10.12999, -3.97281, -8.56686, 2.77786,
                                      0.61942,   1.79518,  -1.08819};
constexpr double kMixVar[kMix] = {5.79596, 2.61369, 5.17950, 0.16735,
                                  0.64009, 0.34023, 1.26261};
constexpr double kMixOffset = 1.2704;

struct VolParams {
  double mu = 0.0;
  double phi = 0.95;
  double sig2 = 0.04;
};

// Forward-filter backward-sample of one log-volatility path given mixture
// indicators. ystar_t = h_t + m_t + eta_t with eta ~ N(0, v_t);
// h_{t+1} = mu + phi (h_t - mu) + eps, eps ~ N(0, sig2), h_1 stationary.
void ffbs_logvol(const Eigen::VectorXd& ystar, const std::vector<int>& s,
                 const VolParams& vp, std::mt19937_64& gen, Eigen::Ref<Eigen::VectorXd> h) {
  const int T = static_cast<int>(ystar.size());
  std::normal_distribution<double> nd;
  Eigen::VectorXd a_filt(T), p_filt(T), a_pred(T), p_pred(T);
  double a = vp.mu;
  double p = vp.sig2 / (1.0 - vp.phi * vp.phi);
  for (int t = 0; t < T; ++t) {
    a_pred(t) = a;
    p_pred(t) = p;
    double m = kMixMeanRaw[s[static_cast<std::size_t>(t)]] - kMixOffset;
    double v = kMixVar[s[static_cast<std::size_t>(t)]];
    double F = p + v;
    double K = p / F;
    a_filt(t) = a + K * (ystar(t) - m - a);
    p_filt(t) = p * (1.0 - K);
    a = vp.mu + vp.phi * (a_filt(t) - vp.mu);
    p = vp.phi * vp.phi * p_filt(t) + vp.sig2;
  }
  h(T - 1) = a_filt(T - 1) + std::sqrt(std::max(0.0, p_filt(T - 1))) * nd(gen);
  for (int t = T - 2; t >= 0; --t) {
    double denom = vp.phi * vp.phi * p_filt(t) + vp.sig2;  // = p_pred(t+1)
    double gain = vp.phi * p_filt(t) / denom;
    double mean = a_filt(t) + gain * (h(t + 1) - (vp.mu + vp.phi * (a_filt(t) - vp.mu)));
    double var = p_filt(t) * (1.0 - gain * vp.phi);
    h(t) = mean + std::sqrt(std::max(0.0, var)) * nd(gen);
  }
}

double draw_inverse_gamma(double shape, double rate, std::mt19937_64& gen) {
  std::gamma_distribution<double> gd(shape, 1.0 / rate);
  double g = gd(gen);
  if (g <= 0.0) g = 1e-300;
  return 1.0 / g;
}

// Independent-Normal Minnesota moments per coefficient; unlike the
// conjugate version this keeps the own/cross distinction.
void minnesota_independent_moments(const VarSpec& spec, const MinnesotaPrior& prior,
                                   const Eigen::VectorXd& sigma2_ar, Eigen::VectorXd& mean,
                                   Eigen::VectorXd& var) {
  const int K = spec.n_regressors();
  mean = Eigen::VectorXd::Zero(spec.n * K);
  var.resize(spec.n * K);
  for (int eq = 0; eq < spec.n; ++eq) {
    int c = 0;
    if (spec.include_intercept) {
      var(eq * K + c) = prior.intercept_scale * prior.intercept_scale * sigma2_ar(eq);
      ++c;
    }
    for (int lag = 1; lag <= spec.p; ++lag) {
      double decay = std::pow(static_cast<double>(lag), prior.lambda_lagdecay);
      for (int j = 0; j < spec.n; ++j) {
        double l2 = prior.lambda_overall * prior.lambda_overall / decay;
        if (j == eq) {
          var(eq * K + c) = l2;
          if (lag == 1) mean(eq * K + c) = prior.own_mean_first_lag;
        } else {
          var(eq * K + c) = l2 * prior.lambda_cross * sigma2_ar(eq) / sigma2_ar(j);
        }
        ++c;
      }
    }
  }
}

}  // namespace

SvDraws fit_bvar_sv(const Eigen::MatrixXd& Y, const VarSpec& spec,
                    const MinnesotaPrior& prior, const SvConfig& sv, int draws, int burn,
                    std::uint64_t seed) {
  spec.validate();
  prior.validate();
  if (draws <= 0 || burn <= 0) throw data_error("fit_bvar_sv: draws and burn must be positive");
  const int n = spec.n;
  if (static_cast<int>(Y.rows()) <= n * spec.p + 10) {
    throw data_error("fit_bvar_sv: sample too short for SV estimation");
  }

  Eigen::MatrixXd X, Y_eff;
  build_var_design(Y, spec, X, Y_eff);
  const int T = static_cast<int>(X.rows());
  const int K = spec.n_regressors();

  Eigen::VectorXd sigma2_ar = ar_residual_variances(Y, spec.p);
  Eigen::VectorXd prior_mean_vec, prior_var_vec;
  minnesota_independent_moments(spec, prior, sigma2_ar, prior_mean_vec, prior_var_vec);

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;

  // initialize at OLS with a light ridge
  Eigen::MatrixXd XtX = X.transpose() * X;
  Eigen::MatrixXd B =
      (XtX + 1e-8 * Eigen::MatrixXd::Identity(K, K)).llt().solve(X.transpose() * Y_eff);
  Eigen::MatrixXd U = Y_eff - X * B;
  Eigen::MatrixXd B0 = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd h(n, T);
  std::vector<VolParams> vp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double v = U.col(i).squaredNorm() / T;
    if (v <= 0.0) throw data_error("fit_bvar_sv: degenerate residuals in equation " +
                                   std::to_string(i));
    vp[static_cast<std::size_t>(i)].mu = std::log(v);
    h.row(i).setConstant(std::log(v));
  }

  SvDraws out;
  out.spec = spec;
  Eigen::MatrixXd coef_sum = Eigen::MatrixXd::Zero(K, n);

  const int total = burn + draws * sv.thin;
  Eigen::MatrixXd P(n * K, n * K);
  Eigen::VectorXd rhs(n * K);
  Eigen::MatrixXd Sinv(n, n), Dinv(n, n);
  Eigen::VectorXd ystar(T);
  std::vector<int> mix_state(static_cast<std::size_t>(T));

  for (int it = 0; it < total; ++it) {
    // (i) VAR coefficients given volatilities and B0
    P = prior_var_vec.cwiseInverse().asDiagonal();
    rhs = prior_mean_vec.cwiseQuotient(prior_var_vec);
    for (int t = 0; t < T; ++t) {
      Dinv.setZero();
      for (int i = 0; i < n; ++i) Dinv(i, i) = std::exp(-h(i, t));
      Sinv.noalias() = B0.transpose() * Dinv * B0;
      Eigen::VectorXd xt = X.row(t).transpose();
      Eigen::MatrixXd xxt = xt * xt.transpose();
      Eigen::VectorXd sy = Sinv * Y_eff.row(t).transpose();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (Sinv(i, j) != 0.0) P.block(i * K, j * K, K, K) += Sinv(i, j) * xxt;
        }
        rhs.segment(i * K, K) += sy(i) * xt;
      }
    }
    P = 0.5 * (P + P.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) {
      throw numerical_error("fit_bvar_sv: coefficient precision not positive definite");
    }
    Eigen::VectorXd beta_mean = llt.solve(rhs);
    Eigen::VectorXd z(n * K);
    for (int i = 0; i < n * K; ++i) z(i) = nd(gen);
    Eigen::VectorXd beta =
        beta_mean + llt.matrixU().solve(z);  // U^{-1} z has covariance P^{-1}
    for (int i = 0; i < n; ++i) B.col(i) = beta.segment(i * K, K);
    U = Y_eff - X * B;

    // (ii) free elements of B0, equation by equation
    for (int i = 1; i < n; ++i) {
      Eigen::MatrixXd G(T, i);
      Eigen::VectorXd w(T);
      for (int t = 0; t < T; ++t) {
        w(t) = std::exp(-h(i, t));
        for (int j = 0; j < i; ++j) G(t, j) = -U(t, j);
      }
      Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(i, i) / sv.b0_prior_var;
      Eigen::VectorXd r = Eigen::VectorXd::Zero(i);
      for (int t = 0; t < T; ++t) {
        prec.noalias() += w(t) * G.row(t).transpose() * G.row(t);
        r.noalias() += w(t) * U(t, i) * G.row(t).transpose();
      }
      Eigen::LLT<Eigen::MatrixXd> lltb(0.5 * (prec + prec.transpose()));
      if (lltb.info() != Eigen::Success) {
        throw numerical_error("fit_bvar_sv: B0 step precision not positive definite");
      }
      Eigen::VectorXd bm = lltb.solve(r);
      Eigen::VectorXd zi(i);
      for (int j = 0; j < i; ++j) zi(j) = nd(gen);
      Eigen::VectorXd bi = bm + lltb.matrixU().solve(zi);
      for (int j = 0; j < i; ++j) B0(i, j) = bi(j);
    }

    // (iii) log-volatility paths via the auxiliary mixture sampler
    Eigen::MatrixXd Etil = U * B0.transpose();
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < T; ++t) {
        double e2 = Etil(t, i) * Etil(t, i);
        ystar(t) = std::log(e2 + 1e-100);
      }
      for (int t = 0; t < T; ++t) {
        double lw[kMix];
        double lmax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < kMix; ++j) {
          double resid = ystar(t) - h(i, t) - (kMixMeanRaw[j] - kMixOffset);
          lw[j] = std::log(kMixProb[j]) - 0.5 * std::log(kMixVar[j]) -
                  0.5 * resid * resid / kMixVar[j];
          lmax = std::max(lmax, lw[j]);
        }
        double cum = 0.0, pick = 0.0;
        for (int j = 0; j < kMix; ++j) cum += std::exp(lw[j] - lmax);
        pick = ud(gen) * cum;
        int sel = kMix - 1;
        cum = 0.0;
        for (int j = 0; j < kMix; ++j) {
          cum += std::exp(lw[j] - lmax);
          if (pick <= cum) {
            sel = j;
            break;
          }
        }
        mix_state[static_cast<std::size_t>(t)] = sel;
      }
      Eigen::VectorXd hrow = h.row(i).transpose();
      ffbs_logvol(ystar, mix_state, vp[static_cast<std::size_t>(i)], gen, hrow);
      h.row(i) = hrow.transpose();
      double hmax = h.row(i).cwiseAbs().maxCoeff();
      if (hmax > sv.h_divergence_bound) {
        throw numerical_error("fit_bvar_sv: log-volatility diverged (|h| = " +
                              std::to_string(hmax) + ", variable " + std::to_string(i) +
                              ", iteration " + std::to_string(it) + ")");
      }
    }

    // (iv) volatility parameters per variable
    for (int i = 0; i < n; ++i) {
      VolParams& v = vp[static_cast<std::size_t>(i)];
      // mu: Gaussian, combining the stationary initial state and transitions
      {
        double prec = 1.0 / sv.mu_prior_var;
        double num = sv.mu_prior_mean / sv.mu_prior_var;
        double one_m_phi2 = 1.0 - v.phi * v.phi;
        prec += one_m_phi2 / v.sig2;
        num += one_m_phi2 * h(i, 0) / v.sig2;
        double omp = 1.0 - v.phi;
        double acc = 0.0;
        for (int t = 1; t < T; ++t) acc += h(i, t) - v.phi * h(i, t - 1);
        prec += (T - 1) * omp * omp / v.sig2;
        num += omp * acc / v.sig2;
        v.mu = num / prec + std::sqrt(1.0 / prec) * nd(gen);
      }
      // phi: truncated-Gaussian proposal from the transition terms, MH
      // corrected for the stationary initial condition
      {
        double sxx = 0.0, sxy = 0.0;
        for (int t = 1; t < T; ++t) {
          double x = h(i, t - 1) - v.mu;
          sxx += x * x;
          sxy += x * (h(i, t) - v.mu);
        }
        double prec = 1.0 / (sv.phi_prior_sd * sv.phi_prior_sd) + sxx / v.sig2;
        double mean = (sv.phi_prior_mean / (sv.phi_prior_sd * sv.phi_prior_sd) + sxy / v.sig2) / prec;
        double sd = std::sqrt(1.0 / prec);
        double cand = v.phi;
        bool ok = false;
        for (int tries = 0; tries < 100; ++tries) {
          cand = mean + sd * nd(gen);
          if (std::abs(cand) < sv.phi_bound) {
            ok = true;
            break;
          }
        }
        if (ok) {
          double h1c = h(i, 0) - v.mu;
          auto log_init = [&](double ph) {
            return 0.5 * std::log(1.0 - ph * ph) - (1.0 - ph * ph) * h1c * h1c / (2.0 * v.sig2);
          };
          if (std::log(ud(gen)) < log_init(cand) - log_init(v.phi)) v.phi = cand;
        }
      }
      // sigma2_eps: conjugate inverse-gamma including the initial state
      {
        double one_m_phi2 = 1.0 - v.phi * v.phi;
        double h1c = h(i, 0) - v.mu;
        double ssr = one_m_phi2 * h1c * h1c;
        for (int t = 1; t < T; ++t) {
          double e = h(i, t) - v.mu - v.phi * (h(i, t - 1) - v.mu);
          ssr += e * e;
        }
        v.sig2 = draw_inverse_gamma(sv.sig2_prior_shape + 0.5 * T,
                                    sv.sig2_prior_scale + 0.5 * ssr, gen);
      }
    }

    if (it >= burn && (it - burn) % sv.thin == 0) {
      SvDraw d;
      d.coef = B;
      d.b0 = B0;
      d.h = h;
      d.mu.resize(n);
      d.phi.resize(n);
      d.sig2_eps.resize(n);
      for (int i = 0; i < n; ++i) {
        d.mu(i) = vp[static_cast<std::size_t>(i)].mu;
        d.phi(i) = vp[static_cast<std::size_t>(i)].phi;
        d.sig2_eps(i) = vp[static_cast<std::size_t>(i)].sig2;
      }
      out.draws.push_back(std::move(d));
      coef_sum += B;
    }
  }

  out.draw_count = static_cast<int>(out.draws.size());
  out.coef_mean = coef_sum / out.draw_count;
  out.validate();
  return out;
}

}  // namespace carboncast
