#include "carboncast/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "carboncast/errors.hpp"

namespace carboncast {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& known_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"data", {"source"}},
      {"synth",
       {"t", "n_predictors", "true_factor_count", "factor_rho1", "factor_rho2", "idio_sd",
        "price_factor_load1", "price_factor_load2", "price_ar", "price_noise_sd", "sv",
        "sv_mu", "sv_phi", "sv_sigma", "start", "ip_start_year_offset"}},
      {"backtest",
       {"first_estimation_end", "last_origin", "horizons", "models", "density", "draws",
        "quantile_j", "extend_origins", "store_draws", "emissions_records", "sv_draws",
        "sv_burn", "aic_pmax", "per_window_standardization", "standardize_factors"}},
      {"minnesota",
       {"lambda_overall", "lambda_cross", "lambda_lagdecay", "intercept_scale",
        "own_mean_first_lag", "strict_minnesota"}},
      {"sv",
       {"mu_prior_mean", "mu_prior_var", "phi_prior_mean", "phi_prior_sd", "phi_bound",
        "sig2_prior_shape", "sig2_prior_scale", "b0_prior_var", "divergence_bound", "thin"}},
      {"disagg", {"constant"}},
      {"forecast", {"draw_mean_point"}},
      {"score",
       {"benchmark", "fluctuation_window", "fluctuation_horizons", "fluctuation_pairs",
        "window_se"}},
      {"monitor", {"model", "density_pp"}},
      {"run", {"seed", "out", "jobs", "stages"}},
  };
  return schema;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw config_error("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = strip(line.substr(1, line.size() - 2));
      cfg.sections[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
    cfg.sections[section][key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.find(key) != it->second.end();
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto it = sections.find(section);
  if (it == sections.end()) return fallback;
  auto kt = it->second.find(key);
  return kt == it->second.end() ? fallback : kt->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return std::stod(get(section, key, ""));
  } catch (const std::exception&) {
    throw config_error("config [" + section + "] " + key + ": not a number");
  }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  try {
    return std::stoi(get(section, key, ""));
  } catch (const std::exception&) {
    throw config_error("config [" + section + "] " + key + ": not an integer");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw config_error("config [" + section + "] " + key + ": expected a boolean");
}

std::vector<std::string> Config::get_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(section, key, ""));
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& [section, kv] : sections) {
    out += "[" + section + "]\n";
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  }
  return out;
}

void Config::validate_known_keys() const {
  const auto& schema = known_schema();
  for (const auto& [section, kv] : sections) {
    auto st = schema.find(section);
    if (st == schema.end()) throw config_error("config: unknown section [" + section + "]");
    for (const auto& [k, v] : kv) {
      (void)v;
      if (st->second.find(k) == st->second.end()) {
        throw config_error("config: unknown key '" + k + "' in section [" + section + "]");
      }
    }
  }
}

PipelineConfig PipelineConfig::from_config(const Config& cfg) {
  cfg.validate_known_keys();
  PipelineConfig pc;
  pc.data_source = cfg.get("data", "source", "synth");

  pc.synth.T = cfg.get_int("synth", "t", pc.synth.T);
  pc.synth.n_predictors = cfg.get_int("synth", "n_predictors", pc.synth.n_predictors);
  pc.synth.true_factor_count = cfg.get_int("synth", "true_factor_count", pc.synth.true_factor_count);
  pc.synth.factor_rho1 = cfg.get_double("synth", "factor_rho1", pc.synth.factor_rho1);
  pc.synth.factor_rho2 = cfg.get_double("synth", "factor_rho2", pc.synth.factor_rho2);
  pc.synth.idio_sd = cfg.get_double("synth", "idio_sd", pc.synth.idio_sd);
  pc.synth.price_factor_load1 =
      cfg.get_double("synth", "price_factor_load1", pc.synth.price_factor_load1);
  pc.synth.price_factor_load2 =
      cfg.get_double("synth", "price_factor_load2", pc.synth.price_factor_load2);
  pc.synth.price_ar = cfg.get_double("synth", "price_ar", pc.synth.price_ar);
  pc.synth.price_noise_sd = cfg.get_double("synth", "price_noise_sd", pc.synth.price_noise_sd);
  pc.synth.sv_on = cfg.get_bool("synth", "sv", pc.synth.sv_on);
  pc.synth.sv_mu = cfg.get_double("synth", "sv_mu", pc.synth.sv_mu);
  pc.synth.sv_phi = cfg.get_double("synth", "sv_phi", pc.synth.sv_phi);
  pc.synth.sv_sigma = cfg.get_double("synth", "sv_sigma", pc.synth.sv_sigma);
  pc.synth.ip_start_year_offset =
      cfg.get_int("synth", "ip_start_year_offset", pc.synth.ip_start_year_offset);
  if (cfg.has("synth", "start")) pc.synth.start = MonthDate::parse(cfg.get("synth", "start", ""));

  BacktestPlan& plan = pc.plan;
  try {
    plan.first_estimation_end =
        MonthDate::parse(cfg.get("backtest", "first_estimation_end", "2017-12"));
    plan.last_origin = MonthDate::parse(cfg.get("backtest", "last_origin", "2022-09"));
  } catch (const data_error& e) {
    throw config_error(std::string("config [backtest]: ") + e.what());
  }
  plan.horizons = cfg.get_int("backtest", "horizons", 12);
  std::vector<std::string> model_tokens = cfg.get_list("backtest", "models");
  if (model_tokens.empty()) model_tokens = {"rw", "rwd", "bar(1)", "bvar(1)", "bfavar(1,1)"};
  for (const auto& tok : model_tokens) plan.models.push_back(parse_model_spec(tok));
  plan.density = cfg.get_bool("backtest", "density", true);
  plan.predictive_draws = cfg.get_int("backtest", "draws", 5000);
  plan.quantile_J = cfg.get_int("backtest", "quantile_j", 20);
  plan.extend_origins = cfg.get_bool("backtest", "extend_origins", true);
  plan.store_draws = cfg.get_bool("backtest", "store_draws", false);
  plan.emit_emissions_records = cfg.get_bool("backtest", "emissions_records", true);
  plan.sv_draws = cfg.get_int("backtest", "sv_draws", 5000);
  plan.sv_burn = cfg.get_int("backtest", "sv_burn", 2000);
  plan.aic_pmax = cfg.get_int("backtest", "aic_pmax", 12);
  plan.per_window_standardization =
      cfg.get_bool("backtest", "per_window_standardization", true);
  plan.standardize_factors = cfg.get_bool("backtest", "standardize_factors", false);
  plan.chow_lin_constant = cfg.get_bool("disagg", "constant", true);

  plan.minnesota.lambda_overall = cfg.get_double("minnesota", "lambda_overall", 0.2);
  plan.minnesota.lambda_cross = cfg.get_double("minnesota", "lambda_cross", 0.5);
  plan.minnesota.lambda_lagdecay = cfg.get_double("minnesota", "lambda_lagdecay", 2.0);
  plan.minnesota.intercept_scale = cfg.get_double("minnesota", "intercept_scale", 100.0);
  plan.minnesota.own_mean_first_lag = cfg.get_double("minnesota", "own_mean_first_lag", 0.0);
  if (cfg.get_bool("minnesota", "strict_minnesota", false)) {
    throw config_error("config [minnesota] strict_minnesota: reserved, not implemented");
  }

  plan.svcfg.mu_prior_mean = cfg.get_double("sv", "mu_prior_mean", 0.0);
  plan.svcfg.mu_prior_var = cfg.get_double("sv", "mu_prior_var", 100.0);
  plan.svcfg.phi_prior_mean = cfg.get_double("sv", "phi_prior_mean", 0.95);
  plan.svcfg.phi_prior_sd = cfg.get_double("sv", "phi_prior_sd", 0.04);
  plan.svcfg.phi_bound = cfg.get_double("sv", "phi_bound", 0.995);
  plan.svcfg.sig2_prior_shape = cfg.get_double("sv", "sig2_prior_shape", 5.0);
  plan.svcfg.sig2_prior_scale = cfg.get_double("sv", "sig2_prior_scale", 0.16);
  plan.svcfg.b0_prior_var = cfg.get_double("sv", "b0_prior_var", 10.0);
  plan.svcfg.h_divergence_bound = cfg.get_double("sv", "divergence_bound", 50.0);
  plan.svcfg.thin = cfg.get_int("sv", "thin", 1);

  if (cfg.get_bool("score", "window_se", false)) {
    throw config_error("config [score] window_se: reserved, not implemented");
  }
  if (cfg.get_bool("forecast", "draw_mean_point", false)) {
    // the draw-mean is always stored alongside the plug-in point forecast
    throw config_error("config [forecast] draw_mean_point: reserved, not implemented");
  }
  pc.score.benchmark = cfg.get("score", "benchmark", "rw");
  pc.score.fluctuation_window = cfg.get_int("score", "fluctuation_window", 19);
  if (cfg.has("score", "fluctuation_horizons")) {
    pc.score.fluctuation_horizons.clear();
    for (const auto& tok : cfg.get_list("score", "fluctuation_horizons")) {
      pc.score.fluctuation_horizons.push_back(std::stoi(tok));
    }
  }
  for (const auto& tok : cfg.get_list("score", "fluctuation_pairs")) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) {
      throw config_error("config [score] fluctuation_pairs: expected model:benchmark tokens");
    }
    pc.score.fluctuation_pairs.emplace_back(tok.substr(0, colon), tok.substr(colon + 1));
  }

  pc.monitor.model = cfg.get("monitor", "model", "");
  pc.monitor.density_pp = cfg.get_bool("monitor", "density_pp", false);

  pc.seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 42));
  plan.seed = pc.seed;
  pc.out_dir = cfg.get("run", "out", "run_out");
  pc.jobs = cfg.get_int("run", "jobs", 1);
  plan.jobs = pc.jobs;
  if (cfg.has("run", "stages")) pc.stages = cfg.get_list("run", "stages");

  if (pc.data_source == "synth") {
    pc.synth.seed = pc.seed;
  }
  return pc;
}

}  // namespace carboncast
