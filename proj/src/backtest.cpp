#include "carboncast/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <sstream>

#include "carboncast/disagg.hpp"
#include "carboncast/errors.hpp"
#include "carboncast/factors.hpp"
#include "carboncast/rng.hpp"

namespace carboncast {

ModelSpecCfg parse_model_spec(const std::string& token) {
  ModelSpecCfg cfg;
  cfg.id = token;
  std::string body = token;
  if (body.size() > 3 && body.substr(body.size() - 3) == "-sv") {
    cfg.sv = true;
    body = body.substr(0, body.size() - 3);
  }
  auto args_of = [&](const std::string& name) -> std::vector<std::string> {
    std::string inner = body.substr(name.size() + 1, body.size() - name.size() - 2);
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      auto comma = inner.find(',', pos);
      if (comma == std::string::npos) {
        out.push_back(inner.substr(pos));
        break;
      }
      out.push_back(inner.substr(pos, comma - pos));
      pos = comma + 1;
    }
    return out;
  };
  auto starts_with_call = [&](const std::string& name) {
    return body.size() > name.size() + 1 && body.rfind(name + "(", 0) == 0 && body.back() == ')';
  };

  if (body == "rw") {
    cfg.family = ModelFamily::rw;
    if (cfg.sv) throw config_error("model '" + token + "': SV not supported for RW");
    return cfg;
  }
  if (body == "rwd") {
    cfg.family = ModelFamily::rwd;
    if (cfg.sv) throw config_error("model '" + token + "': SV not supported for RWD");
    return cfg;
  }
  if (starts_with_call("arima")) {
    auto a = args_of("arima");
    if (a.size() != 3) throw config_error("model '" + token + "': expected arima(p,d,q)");
    int p = std::stoi(a[0]), d = std::stoi(a[1]), q = std::stoi(a[2]);
    if (d != 1 || p < 0 || p > 1 || q < 0 || q > 1) {
      throw config_error("model '" + token + "': unsupported order (need p,q in {0,1}, d=1)");
    }
    if (cfg.sv) throw config_error("model '" + token + "': SV not supported for ARIMA");
    cfg.family = ModelFamily::arima;
    cfg.p = p;
    cfg.ma = q;
    return cfg;
  }
  if (starts_with_call("bar")) {
    auto a = args_of("bar");
    if (a.size() != 1) throw config_error("model '" + token + "': expected bar(p) or bar(aic)");
    cfg.family = ModelFamily::bar;
    if (a[0] == "aic") {
      cfg.aic = true;
    } else {
      cfg.p = std::stoi(a[0]);
      if (cfg.p < 1) throw config_error("model '" + token + "': lag order must be >= 1");
    }
    if (cfg.sv) throw config_error("model '" + token + "': SV not supported for BAR");
    return cfg;
  }
  if (starts_with_call("bvar")) {
    auto a = args_of("bvar");
    if (a.size() != 1) throw config_error("model '" + token + "': expected bvar(p)");
    cfg.family = ModelFamily::bvar;
    cfg.p = std::stoi(a[0]);
    if (cfg.p < 1) throw config_error("model '" + token + "': lag order must be >= 1");
    return cfg;
  }
  if (starts_with_call("bfavar")) {
    auto a = args_of("bfavar");
    if (a.size() != 2) throw config_error("model '" + token + "': expected bfavar(p,k)");
    cfg.family = ModelFamily::bfavar;
    cfg.p = std::stoi(a[0]);
    cfg.n_factors = std::stoi(a[1]);
    if (cfg.p < 1 || cfg.n_factors < 1 || cfg.n_factors > 3) {
      throw config_error("model '" + token + "': need p >= 1 and 1 <= k <= 3");
    }
    return cfg;
  }
  throw config_error("unknown model token '" + token + "'");
}

void BacktestPlan::validate() const {
  if (last_origin < first_estimation_end) {
    throw config_error("BacktestPlan: last_origin precedes first_estimation_end");
  }
  if (horizons < 1) throw config_error("BacktestPlan: horizons must be >= 1");
  if (models.empty()) throw config_error("BacktestPlan: no models requested");
  if (density && predictive_draws < 500) {
    throw config_error("BacktestPlan: need at least 500 predictive draws");
  }
  if (quantile_J < 2) throw config_error("BacktestPlan: quantile grid J must be >= 2");
  minnesota.validate();
}

namespace {

struct WindowData {
  MonthlySeries log_price;   // r_t through the origin
  MonthlySeries dlog_price;  // delta r_t
  MonthlySeries dlog_emissions;
  MonthlySeries emissions_monthly;
  MonthlySeries dlog_ip_aggregate;
  std::vector<MonthlySeries> factors;  // extracted when any bfavar model runs
};

// Common-sample matrix [target | companions...]; throws when the overlap is
// too short.
Eigen::MatrixXd stack_columns(const std::vector<const MonthlySeries*>& cols) {
  MonthDate lo = cols.front()->start;
  MonthDate hi = cols.front()->last_date();
  for (const auto* s : cols) {
    lo = std::max(lo, s->start);
    hi = std::min(hi, s->last_date());
  }
  if (lo > hi) throw data_error("backtest: no common sample across model variables");
  const int T = hi.months_since(lo) + 1;
  Eigen::MatrixXd Y(T, static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (int t = 0; t < T; ++t) Y(t, static_cast<int>(j)) = cols[j]->at(lo.plus_months(t));
  }
  return Y;
}

WindowData prepare_window(const DataBundle& bundle, const BacktestPlan& plan,
                          const std::vector<MonthlySeries>& predictors_transformed,
                          const MonthDate& origin, int max_factors) {
  WindowData w;
  MonthlySeries price_w = bundle.price.up_to(origin);
  if (price_w.last_date() != origin) {
    throw data_error("backtest: price data do not reach origin " + origin.to_string());
  }
  w.log_price = log_series(price_w);
  w.dlog_price = log_diff(price_w);

  // emissions: annual values for calendar years completed by the origin,
  // interpolated with the emission-weighted IP indicator inside the window
  std::vector<MonthlySeries> ip_w;
  MonthDate ip_lo = bundle.ip_sectors.front().start;
  for (const auto& s : bundle.ip_sectors) ip_lo = std::max(ip_lo, s.start);
  if (ip_lo.month != 1) ip_lo = MonthDate(ip_lo.year + 1, 1);
  for (const auto& s : bundle.ip_sectors) ip_w.push_back(s.window(ip_lo, origin));
  MonthlySeries indicator = weighted_indicator(ip_w, bundle.ip_weights);

  int last_complete_year = origin.month == 12 ? origin.year : origin.year - 1;
  AnnualSeries annual_w;
  annual_w.start_year = bundle.annual_emissions.start_year;
  for (int i = 0; i < bundle.annual_emissions.size(); ++i) {
    if (annual_w.start_year + i > last_complete_year) break;
    annual_w.values.push_back(bundle.annual_emissions.values[static_cast<std::size_t>(i)]);
  }
  if (annual_w.size() < 2) {
    throw data_error("backtest: fewer than 2 complete emission years at origin " +
                     origin.to_string());
  }
  w.emissions_monthly = disaggregate_emissions(annual_w, indicator, plan.chow_lin_constant);
  w.dlog_emissions = log_diff(w.emissions_monthly);
  w.dlog_ip_aggregate = log_diff(indicator);

  if (max_factors > 0) {
    std::vector<MonthlySeries> panel_input;
    std::map<std::string, PredictorClass> classes;
    for (const auto& s : predictors_transformed) {
      panel_input.push_back(s.up_to(origin));
      classes[s.name] = bundle.predictor_meta.at(s.name).klass;
    }
    // frozen mode: the series were standardized on the full sample up front
    PredictorPanel panel = plan.per_window_standardization
                               ? align_panel(panel_input, classes)
                               : build_panel_fixed(panel_input, classes);
    FactorModel fm = extract_factors(panel, max_factors);
    for (auto& fac : fm.factors) {
      if (plan.standardize_factors) fac = standardize(fac).series;
      w.factors.push_back(std::move(fac));
    }
  }
  return w;
}

std::vector<ForecastRecord> forecasts_for_model(const DataBundle& bundle,
                                                const BacktestPlan& plan, const WindowData& w,
                                                const ModelSpecCfg& spec, const MonthDate& origin,
                                                const MonthlySeries& realized_emissions) {
  const int H = plan.horizons;
  ModelPosterior post;
  Eigen::MatrixXd history;
  VarSpec vspec;

  switch (spec.family) {
    case ModelFamily::rw:
    case ModelFamily::rwd: {
      post = fit_rw(w.log_price, spec.family == ModelFamily::rwd);
      history.resize(w.dlog_price.size(), 1);
      for (int t = 0; t < w.dlog_price.size(); ++t) history(t, 0) = w.dlog_price.values[static_cast<std::size_t>(t)];
      break;
    }
    case ModelFamily::arima: {
      post = fit_arima(w.dlog_price, spec.p, spec.ma);
      history.resize(w.dlog_price.size(), 1);
      for (int t = 0; t < w.dlog_price.size(); ++t) history(t, 0) = w.dlog_price.values[static_cast<std::size_t>(t)];
      break;
    }
    case ModelFamily::bar: {
      int p = spec.aic ? select_lag_aic(w.dlog_price, plan.aic_pmax) : spec.p;
      post = fit_bar(w.dlog_price, p, plan.minnesota);
      history.resize(w.dlog_price.size(), 1);
      for (int t = 0; t < w.dlog_price.size(); ++t) history(t, 0) = w.dlog_price.values[static_cast<std::size_t>(t)];
      break;
    }
    case ModelFamily::bvar:
    case ModelFamily::bfavar: {
      std::vector<const MonthlySeries*> cols{&w.dlog_price, &w.dlog_emissions};
      std::vector<std::string> names{"dlog_price", "dlog_emissions"};
      if (spec.family == ModelFamily::bvar) {
        cols.push_back(&w.dlog_ip_aggregate);
        names.emplace_back("dlog_ip");
      } else {
        for (int f = 0; f < spec.n_factors; ++f) {
          cols.push_back(&w.factors[static_cast<std::size_t>(f)]);
          names.push_back("factor" + std::to_string(f + 1));
        }
      }
      history = stack_columns(cols);
      vspec.n = static_cast<int>(cols.size());
      vspec.p = spec.p;
      vspec.include_intercept = true;
      vspec.variable_names = names;
      if (spec.sv) {
        post = fit_bvar_sv(history, vspec, plan.minnesota, plan.svcfg, plan.sv_draws,
                           plan.sv_burn,
                           derive_stream(plan.seed, origin.index(), spec.id, 0)());
      } else {
        post = fit_bvar_minnesota(history, vspec, plan.minnesota);
      }
      break;
    }
  }

  Eigen::MatrixXd point_paths = iterate_point_forecast(post, history, H);

  struct Target {
    std::string variable;
    int col;
    double origin_level;
  };
  std::vector<Target> targets{{"price", 0, w.log_price.values.back()}};
  if (spec.multivariate() && plan.emit_emissions_records) {
    targets.push_back({"emissions", 1, std::log(w.emissions_monthly.values.back())});
  }

  std::vector<ForecastRecord> records;
  for (const auto& target : targets) {
    std::vector<double> dlog_path(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) dlog_path[static_cast<std::size_t>(h)] = point_paths(h, target.col);
    std::vector<double> levels = to_levels(target.origin_level, dlog_path);

    Eigen::MatrixXd draws;
    if (plan.density) {
      draws = simulate_predictive(post, history, target.origin_level, H, plan.predictive_draws,
                                  derive_stream(plan.seed, origin.index(), spec.id,
                                                1 + static_cast<std::uint64_t>(target.col))(),
                                  target.col);
    }

    double origin_level = std::exp(target.origin_level);
    for (int h = 1; h <= H; ++h) {
      ForecastRecord rec;
      rec.model_id = spec.id;
      rec.variable = target.variable;
      rec.origin = origin;
      rec.horizon = h;
      rec.point_level = levels[static_cast<std::size_t>(h - 1)];
      rec.origin_level = origin_level;
      rec.sign = sign_forecast(rec.point_level, rec.origin_level);
      if (plan.density) {
        std::vector<double> col(static_cast<std::size_t>(plan.predictive_draws));
        for (int m = 0; m < plan.predictive_draws; ++m) col[static_cast<std::size_t>(m)] = draws(h - 1, m);
        rec.draw_mean_level = mean_of(col);
        rec.quantiles = quantile_grid(col, plan.quantile_J);
        if (plan.store_draws) rec.draws = std::move(col);
      }
      MonthDate tdate = origin.plus_months(h);
      if (target.variable == "price") {
        if (bundle.price.covers(tdate)) rec.realized = bundle.price.at(tdate);
      } else if (realized_emissions.covers(tdate)) {
        rec.realized = realized_emissions.at(tdate);
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace

std::vector<ForecastRecord> run_expanding_window(const DataBundle& bundle,
                                                 const BacktestPlan& plan) {
  plan.validate();
  bundle.validate();
  const MonthDate run_last = plan.run_last_origin();
  if (!bundle.price.covers(run_last)) {
    throw data_error("backtest: price data end before the last origin " + run_last.to_string());
  }

  // transforms are pointwise/backward, so they can be applied once up front
  // without leaking future information into any window
  std::vector<MonthlySeries> predictors_transformed;
  for (const auto& s : bundle.predictors_raw) {
    auto meta = bundle.predictor_meta.at(s.name);
    MonthlySeries tr = apply_transform(s, meta.transform);
    if (!plan.per_window_standardization) tr = standardize(tr).series;
    predictors_transformed.push_back(std::move(tr));
  }

  int max_factors = 0;
  for (const auto& m : plan.models) max_factors = std::max(max_factors, m.n_factors);

  // pseudo-realized emissions from the full-sample interpolation
  std::vector<MonthlySeries> ip_all;
  MonthDate ip_lo = bundle.ip_sectors.front().start;
  for (const auto& s : bundle.ip_sectors) ip_lo = std::max(ip_lo, s.start);
  if (ip_lo.month != 1) ip_lo = MonthDate(ip_lo.year + 1, 1);
  MonthDate ip_hi = bundle.ip_sectors.front().last_date();
  for (const auto& s : bundle.ip_sectors) ip_hi = std::min(ip_hi, s.last_date());
  for (const auto& s : bundle.ip_sectors) ip_all.push_back(s.window(ip_lo, ip_hi));
  MonthlySeries realized_emissions =
      disaggregate_emissions(bundle.annual_emissions, weighted_indicator(ip_all, bundle.ip_weights),
                             plan.chow_lin_constant);

  const int n_origins = run_last.months_since(plan.first_estimation_end) + 1;
  std::vector<std::vector<ForecastRecord>> per_origin(static_cast<std::size_t>(n_origins));

  auto run_origin = [&](int oi) {
    MonthDate origin = plan.first_estimation_end.plus_months(oi);
    WindowData w = prepare_window(bundle, plan, predictors_transformed, origin, max_factors);
    std::vector<ForecastRecord> recs;
    for (const auto& m : plan.models) {
      auto mr = forecasts_for_model(bundle, plan, w, m, origin, realized_emissions);
      recs.insert(recs.end(), std::make_move_iterator(mr.begin()),
                  std::make_move_iterator(mr.end()));
    }
    per_origin[static_cast<std::size_t>(oi)] = std::move(recs);
  };

  if (plan.jobs <= 1) {
    for (int oi = 0; oi < n_origins; ++oi) run_origin(oi);
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<int> next{0};
    for (int j = 0; j < plan.jobs; ++j) {
      futs.push_back(std::async(std::launch::async, [&] {
        for (int oi = next.fetch_add(1); oi < n_origins; oi = next.fetch_add(1)) run_origin(oi);
      }));
    }
    for (auto& f : futs) f.get();
  }

  std::vector<ForecastRecord> out;
  for (auto& recs : per_origin) {
    out.insert(out.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
  }
  // canonical (origin, model, variable, horizon) order for serialization
  std::map<std::string, int> model_pos;
  for (std::size_t m = 0; m < plan.models.size(); ++m) model_pos[plan.models[m].id] = static_cast<int>(m);
  std::stable_sort(out.begin(), out.end(), [&](const ForecastRecord& a, const ForecastRecord& b) {
    return std::make_tuple(a.origin.index(), model_pos[a.model_id], a.variable, a.horizon) <
           std::make_tuple(b.origin.index(), model_pos[b.model_id], b.variable, b.horizon);
  });
  return out;
}

std::vector<ForecastRecord> filter_to_evaluation_sample(const std::vector<ForecastRecord>& records,
                                                        const BacktestPlan& plan) {
  std::vector<ForecastRecord> out;
  MonthDate lo = plan.common_eval_first();
  MonthDate hi = plan.common_eval_last();
  for (const auto& r : records) {
    MonthDate target = r.origin.plus_months(r.horizon);
    if (target >= lo && target <= hi && r.realized.has_value()) out.push_back(r);
  }
  return out;
}

void write_records_csv(const std::string& path, const std::vector<ForecastRecord>& records) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "model,variable,origin,horizon,target,point,sign,origin_level,draw_mean,realized";
  int J = 0;
  for (const auto& r : records) {
    if (r.quantiles.size() > 0) {
      J = r.quantiles.J;
      break;
    }
  }
  for (int j = 1; j < J; ++j) out << ",q" << format_double(static_cast<double>(j) / J);
  out << "\n";
  for (const auto& r : records) {
    out << csv_quote(r.model_id) << "," << r.variable << "," << r.origin.to_string() << ","
        << r.horizon << "," << r.origin.plus_months(r.horizon).to_string() << ","
        << format_double(r.point_level) << "," << r.sign << "," << format_double(r.origin_level)
        << "," << format_double(r.draw_mean_level) << ","
        << (r.realized ? format_double(*r.realized) : "");
    for (int j = 0; j < r.quantiles.size(); ++j) out << "," << format_double(r.quantiles.levels[static_cast<std::size_t>(j)]);
    for (int j = r.quantiles.size(); j < J - 1; ++j) out << ",";
    out << "\n";
  }
}

std::vector<ForecastRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("records CSV '" + path + "' is empty");
  std::vector<std::string> header = csv_split(line);
  int n_quantiles = 0;
  for (const auto& h : header) {
    if (!h.empty() && h[0] == 'q' && h != "quantiles") ++n_quantiles;
  }
  std::vector<ForecastRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = csv_split(line);
    while (cells.size() < header.size()) cells.emplace_back();
    ForecastRecord r;
    r.model_id = cells[0];
    r.variable = cells[1];
    r.origin = MonthDate::parse(cells[2]);
    r.horizon = std::stoi(cells[3]);
    r.point_level = std::stod(cells[5]);
    r.sign = std::stoi(cells[6]);
    r.origin_level = std::stod(cells[7]);
    r.draw_mean_level = cells[8].empty() ? 0.0 : std::stod(cells[8]);
    if (!cells[9].empty()) r.realized = std::stod(cells[9]);
    if (n_quantiles > 0 && cells.size() >= 10 + static_cast<std::size_t>(n_quantiles) &&
        !cells[10].empty()) {
      r.quantiles.J = n_quantiles + 1;
      for (int j = 0; j < n_quantiles; ++j) {
        r.quantiles.levels.push_back(std::stod(cells[static_cast<std::size_t>(10 + j)]));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_records_json(const std::string& path, const std::vector<ForecastRecord>& records,
                        bool include_draws) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["model"] = r.model_id;
    j["variable"] = r.variable;
    j["origin"] = r.origin.to_string();
    j["horizon"] = r.horizon;
    j["point"] = r.point_level;
    j["sign"] = r.sign;
    j["origin_level"] = r.origin_level;
    j["draw_mean"] = r.draw_mean_level;
    if (r.realized) j["realized"] = *r.realized;
    if (r.quantiles.size() > 0) j["quantiles"] = r.quantiles.levels;
    if (include_draws && !r.draws.empty()) j["draws"] = r.draws;
    arr.push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << arr.dump(1) << "\n";
}

}  // namespace carboncast
