#include "carboncast/synth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "carboncast/errors.hpp"
#include "carboncast/rng.hpp"

namespace carboncast {

void SynthConfig::validate() const {
  if (T < 120) throw config_error("SynthConfig: T must be >= 120");
  if (n_predictors < 4) throw config_error("SynthConfig: need at least 4 predictors");
  if (true_factor_count < 1 || true_factor_count > 3) {
    throw config_error("SynthConfig: true factor count must be 1..3");
  }
  if (std::abs(price_ar) >= 1.0 || std::abs(factor_rho1) >= 1.0 ||
      std::abs(factor_rho2) >= 1.0 || std::abs(sv_phi) >= 1.0) {
    throw config_error("SynthConfig: non-stationary configuration rejected");
  }
  if (price_noise_sd <= 0.0 || idio_sd < 0.0) {
    throw config_error("SynthConfig: noise scales out of range");
  }
}

SynthBundle generate_bundle(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 gen(mix64(cfg.seed));
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;

  const MonthDate ip_start(cfg.start.year - cfg.ip_start_year_offset, 1);
  const MonthDate price_end = cfg.start.plus_months(cfg.T - 1);
  const int T_full = price_end.months_since(ip_start) + 1;
  const int k = cfg.true_factor_count;

  // latent factors over the full span, stationary AR(1) with unit variance
  std::vector<double> rho = {cfg.factor_rho1, cfg.factor_rho2, 0.8};
  Eigen::MatrixXd f(T_full, k);
  for (int j = 0; j < k; ++j) {
    double r = rho[static_cast<std::size_t>(j)];
    double innov = std::sqrt(1.0 - r * r);
    f(0, j) = nd(gen);
    for (int t = 1; t < T_full; ++t) f(t, j) = r * f(t - 1, j) + innov * nd(gen);
  }
  auto f_at = [&](const MonthDate& d, int j) { return f(d.months_since(ip_start), j); };

  // price: delta-log driven by lagged factors plus own lag
  std::vector<double> dlog_r(static_cast<std::size_t>(T_full), 0.0);
  std::vector<double> h_path(static_cast<std::size_t>(T_full), cfg.sv_mu);
  if (cfg.sv_on) {
    h_path[0] = cfg.sv_mu + cfg.sv_sigma / std::sqrt(1.0 - cfg.sv_phi * cfg.sv_phi) * nd(gen);
    for (int t = 1; t < T_full; ++t) {
      h_path[static_cast<std::size_t>(t)] =
          cfg.sv_mu + cfg.sv_phi * (h_path[static_cast<std::size_t>(t - 1)] - cfg.sv_mu) +
          cfg.sv_sigma * nd(gen);
    }
  }
  std::vector<double> loads = {cfg.price_factor_load1, cfg.price_factor_load2, 0.01};
  for (int t = 1; t < T_full; ++t) {
    double mean = cfg.price_ar * dlog_r[static_cast<std::size_t>(t - 1)];
    for (int j = 0; j < k; ++j) mean += loads[static_cast<std::size_t>(j)] * f(t - 1, j);
    double sd = cfg.sv_on ? std::exp(0.5 * h_path[static_cast<std::size_t>(t)]) : cfg.price_noise_sd;
    dlog_r[static_cast<std::size_t>(t)] = mean + sd * nd(gen);
  }
  // cumulate and pin the level at the start of the price sample to 25 EUR
  std::vector<double> r_full(static_cast<std::size_t>(T_full));
  r_full[0] = 0.0;
  for (int t = 1; t < T_full; ++t) {
    r_full[static_cast<std::size_t>(t)] =
        r_full[static_cast<std::size_t>(t - 1)] + dlog_r[static_cast<std::size_t>(t)];
  }
  const int price_off = cfg.start.months_since(ip_start);
  double shift = std::log(25.0) - r_full[static_cast<std::size_t>(price_off)];
  std::vector<double> price_vals(static_cast<std::size_t>(cfg.T));
  for (int t = 0; t < cfg.T; ++t) {
    price_vals[static_cast<std::size_t>(t)] =
        std::exp(r_full[static_cast<std::size_t>(price_off + t)] + shift);
  }

  SynthBundle out;
  out.data.price = MonthlySeries(cfg.start, std::move(price_vals), Transform::none, "price");

  // predictors: class pattern 8/7/3/2 scaled to n_predictors by largest
  // remainder (the production panel's own bullet counts sum to 20 of 21)
  int counts[4];
  const double base[4] = {8.0, 7.0, 3.0, 2.0};
  double frac[4];
  int assigned = 0;
  for (int c = 0; c < 4; ++c) {
    double share = cfg.n_predictors * base[c] / 20.0;
    counts[c] = std::max(1, static_cast<int>(share));
    frac[c] = share - static_cast<int>(share);
    assigned += counts[c];
  }
  while (assigned < cfg.n_predictors) {
    int best = 0;
    for (int c = 1; c < 4; ++c) {
      if (frac[c] > frac[best]) best = c;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  while (assigned > cfg.n_predictors) {
    int big = 0;
    for (int c = 1; c < 4; ++c) {
      if (counts[c] > counts[big]) big = c;
    }
    --counts[big];
    --assigned;
  }
  const char* prefix[4] = {"act", "ene", "tec", "wea"};
  const PredictorClass klass[4] = {PredictorClass::economic_activity, PredictorClass::energy,
                                   PredictorClass::technical, PredictorClass::weather};
  Eigen::MatrixXd lambda(cfg.n_predictors, k);
  int pj = 0;
  nlohmann::json truth;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < counts[c] && pj < cfg.n_predictors; ++i, ++pj) {
      for (int j = 0; j < k; ++j) {
        double mag = 0.3 + 0.7 * ud(gen);
        lambda(pj, j) = (ud(gen) < 0.5 ? -mag : mag);
      }
      std::string name = std::string(prefix[c]) + std::to_string(i + 1);
      // transform tags follow the production data conventions per class
      Transform tr = Transform::log_diff;
      if (c == 1 && i >= counts[1] - 2) tr = Transform::diff;
      if (c == 2 && i == 1) tr = Transform::log;
      if ((c == 2 && i == 2) || c == 3) tr = Transform::none;

      std::vector<double> x(static_cast<std::size_t>(cfg.T));
      for (int t = 0; t < cfg.T; ++t) {
        double v = 0.0;
        for (int j = 0; j < k; ++j) v += lambda(pj, j) * f_at(cfg.start.plus_months(t), j);
        x[static_cast<std::size_t>(t)] = v + cfg.idio_sd * nd(gen);
      }
      std::vector<double> raw(static_cast<std::size_t>(cfg.T));
      switch (tr) {
        case Transform::log_diff: {
          double level = std::log(100.0);
          raw[0] = std::exp(level);
          for (int t = 1; t < cfg.T; ++t) {
            level += 0.02 * x[static_cast<std::size_t>(t)];
            raw[static_cast<std::size_t>(t)] = std::exp(level);
          }
          break;
        }
        case Transform::diff: {
          raw[0] = 10.0;
          for (int t = 1; t < cfg.T; ++t) {
            raw[static_cast<std::size_t>(t)] =
                raw[static_cast<std::size_t>(t - 1)] + 0.5 * x[static_cast<std::size_t>(t)];
          }
          break;
        }
        case Transform::log:
          for (int t = 0; t < cfg.T; ++t) {
            raw[static_cast<std::size_t>(t)] = std::exp(0.3 * x[static_cast<std::size_t>(t)] + 1.0);
          }
          break;
        case Transform::none:
          for (int t = 0; t < cfg.T; ++t) raw[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>(t)];
          break;
      }
      out.data.predictors_raw.emplace_back(cfg.start, std::move(raw), Transform::none, name);
      out.data.predictor_meta[name] = SeriesMeta{klass[c], tr};
    }
  }

  // IP sectors share the first factor's cycle plus sector noise and season
  const int n_sectors = 6;
  auto season = [](int month) { return 0.04 * std::sin(2.0 * M_PI * month / 12.0); };
  for (int s = 0; s < n_sectors; ++s) {
    double cyc = 0.03 + 0.04 * ud(gen);
    std::vector<double> vals(static_cast<std::size_t>(T_full));
    for (int t = 0; t < T_full; ++t) {
      MonthDate d = ip_start.plus_months(t);
      vals[static_cast<std::size_t>(t)] =
          100.0 * std::exp(cyc * f(t, 0) + season(d.month) + 0.01 * nd(gen));
    }
    out.data.ip_sectors.emplace_back(ip_start, std::move(vals), Transform::none,
                                     "ip_sector" + std::to_string(s + 1));
    out.data.ip_weights.push_back(0.5 + ud(gen));
  }

  // latent monthly emissions: declining trend, factor-1 cycle, season
  std::vector<double> em(static_cast<std::size_t>(T_full));
  for (int t = 0; t < T_full; ++t) {
    MonthDate d = ip_start.plus_months(t);
    em[static_cast<std::size_t>(t)] =
        150.0 * std::exp(-0.0025 * t + 0.02 * f(t, 0) + season(d.month) + 0.01 * nd(gen));
  }
  const int n_complete_years = (T_full) / 12;
  AnnualSeries annual;
  annual.start_year = ip_start.year;
  for (int y = 0; y < n_complete_years; ++y) {
    double s = 0.0;
    for (int m = 0; m < 12; ++m) s += em[static_cast<std::size_t>(12 * y + m)];
    annual.values.push_back(s);
  }
  out.data.annual_emissions = annual;
  out.data.validate();

  truth["seed"] = cfg.seed;
  truth["T"] = cfg.T;
  truth["true_factor_count"] = k;
  truth["price_ar"] = cfg.price_ar;
  truth["price_factor_loads"] = std::vector<double>(loads.begin(), loads.begin() + k);
  truth["price_noise_sd"] = cfg.price_noise_sd;
  truth["sv_on"] = cfg.sv_on;
  {
    std::vector<double> fv(f.data(), f.data() + f.size());
    truth["factors_colmajor"] = fv;
    truth["factors_rows"] = T_full;
    std::vector<double> lv(lambda.data(), lambda.data() + lambda.size());
    truth["loadings_colmajor"] = lv;
    truth["emissions_monthly"] = em;
    truth["dlog_price_full"] = dlog_r;
    if (cfg.sv_on) truth["h_path"] = h_path;
    truth["ip_start"] = ip_start.to_string();
  }
  out.truth_json = truth.dump(2);
  return out;
}

void write_bundle(const SynthBundle& bundle, const std::string& dir) {
  bundle.data.save(dir);
  std::ofstream out(dir + "/truth.json");
  if (!out) throw data_error("cannot write file: " + dir + "/truth.json");
  out << bundle.truth_json << "\n";
}

}  // namespace carboncast
