#include "carboncast/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "carboncast/disagg.hpp"
#include "carboncast/errors.hpp"
#include "carboncast/eval.hpp"
#include "carboncast/factors.hpp"
#include "carboncast/monitor.hpp"
#include "carboncast/rng.hpp"

namespace fs = std::filesystem;

namespace carboncast {

namespace {

constexpr const char* kVersion = "carboncast 0.1.0";

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '(' || c == ')') continue;
    if (c == ',' || c == ':') {
      out += '-';
    } else {
      out += c;
    }
  }
  return out;
}

std::uint64_t hash_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw data_error("cannot hash file: " + p.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ScoredCell {
  ScoreReport report;
  std::optional<TestResult> dm;
  std::optional<TestResult> pt;
};

int realized_sign(const ForecastRecord& r) {
  double d = *r.realized - r.origin_level;
  if (d > 0.0) return 1;
  if (d < 0.0) return -1;
  return 0;
}

// Per (variable, model, horizon) scores over the common evaluation sample,
// with DM/PT against the benchmark.
std::vector<ScoredCell> score_records(const std::vector<ForecastRecord>& eval_records,
                                      const std::string& benchmark) {
  std::map<std::string, std::map<std::string, std::map<int, std::vector<const ForecastRecord*>>>>
      grouped;  // variable -> model -> horizon -> records
  for (const auto& r : eval_records) {
    grouped[r.variable][r.model_id][r.horizon].push_back(&r);
  }
  std::vector<ScoredCell> out;
  for (const auto& [variable, models] : grouped) {
    (void)variable;
    auto bench_it = models.find(benchmark);
    for (const auto& [model, horizons] : models) {
      for (const auto& [h, recs] : horizons) {
        ScoredCell cell;
        cell.report.model_id = model;
        cell.report.horizon = h;
        cell.report.n_obs = static_cast<int>(recs.size());
        std::vector<double> errors;
        std::vector<int> sf, sr;
        double qsum = 0.0, wc = 0.0, wr = 0.0, wl = 0.0;
        int n_q = 0;
        for (const auto* r : recs) {
          errors.push_back(r->point_level - *r->realized);
          sf.push_back(r->sign);
          sr.push_back(realized_sign(*r));
          if (r->quantiles.size() > 0) {
            qsum += qcrps(r->quantiles, *r->realized);
            wc += weighted_qcrps(r->quantiles, *r->realized, QcrpsRegion::center);
            wr += weighted_qcrps(r->quantiles, *r->realized, QcrpsRegion::right);
            wl += weighted_qcrps(r->quantiles, *r->realized, QcrpsRegion::left);
            ++n_q;
          }
        }
        cell.report.rmsfe = rmsfe_of(errors);
        cell.report.success_ratio = success_ratio(sf, sr);
        if (n_q > 0) {
          cell.report.qcrps = qsum / n_q;
          cell.report.wqcrps_center = wc / n_q;
          cell.report.wqcrps_right = wr / n_q;
          cell.report.wqcrps_left = wl / n_q;
        }
        cell.report.relative_rmsfe = 1.0;
        if (bench_it != models.end()) {
          auto bh = bench_it->second.find(h);
          if (bh != bench_it->second.end() && bh->second.size() == recs.size()) {
            std::vector<double> bench_errors;
            std::vector<double> loss_diff;
            for (std::size_t i = 0; i < recs.size(); ++i) {
              double be = bh->second[i]->point_level - *bh->second[i]->realized;
              bench_errors.push_back(be);
              loss_diff.push_back(be * be - errors[i] * errors[i]);
            }
            cell.report.relative_rmsfe = relative_rmsfe(errors, bench_errors);
            if (model != benchmark) {
              try {
                cell.dm = dm_test(loss_diff, h);
              } catch (const data_error&) {
              }
            }
          }
        }
        try {
          cell.pt = pt_test(sf, sr);
        } catch (const data_error&) {
        }
        out.push_back(std::move(cell));
      }
    }
  }
  return out;
}

void write_scores_csv(const std::string& path,
                      const std::vector<ForecastRecord>& eval_records,
                      const std::string& benchmark) {
  // regroup by variable so the CSV carries it explicitly
  std::map<std::string, std::vector<ForecastRecord>> by_var;
  for (const auto& r : eval_records) by_var[r.variable].push_back(r);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "variable,model,horizon,n_obs,rmsfe,relative_rmsfe,success_ratio,qcrps,"
         "wqcrps_center,wqcrps_right,wqcrps_left,dm_stat,dm_p,pt_stat,pt_p\n";
  for (const auto& [variable, recs] : by_var) {
    auto cells = score_records(recs, benchmark);
    for (const auto& c : cells) {
      out << variable << "," << csv_quote(c.report.model_id) << "," << c.report.horizon << ","
          << c.report.n_obs << "," << format_double(c.report.rmsfe) << ","
          << format_double(c.report.relative_rmsfe) << ","
          << format_double(c.report.success_ratio) << "," << format_double(c.report.qcrps)
          << "," << format_double(c.report.wqcrps_center) << ","
          << format_double(c.report.wqcrps_right) << "," << format_double(c.report.wqcrps_left)
          << ",";
      if (c.dm) out << format_double(c.dm->statistic);
      out << ",";
      if (c.dm) out << format_double(c.dm->p_value);
      out << ",";
      if (c.pt) out << format_double(c.pt->statistic);
      out << ",";
      if (c.pt) out << format_double(c.pt->p_value);
      out << "\n";
    }
  }
}

void write_fluctuation_paths(const std::string& dir,
                             const std::vector<ForecastRecord>& eval_records,
                             const ScoreSettings& settings,
                             const std::vector<ModelSpecCfg>& models) {
  std::vector<std::pair<std::string, std::string>> pairs = settings.fluctuation_pairs;
  if (pairs.empty()) {
    for (const auto& m : models) {
      if (m.family == ModelFamily::bfavar && m.id != settings.benchmark) {
        pairs.emplace_back(m.id, settings.benchmark);
      }
    }
  }
  if (pairs.empty()) return;

  // (model, horizon) -> target-sorted price errors
  std::map<std::string, std::map<int, std::map<int, double>>> errs;  // model -> h -> target -> err
  for (const auto& r : eval_records) {
    if (r.variable != "price") continue;
    errs[r.model_id][r.horizon][r.origin.plus_months(r.horizon).index()] =
        r.point_level - *r.realized;
  }
  for (const auto& [model, bench] : pairs) {
    auto mit = errs.find(model);
    auto bit = errs.find(bench);
    if (mit == errs.end() || bit == errs.end()) continue;
    for (int h : settings.fluctuation_horizons) {
      auto mh = mit->second.find(h);
      auto bh = bit->second.find(h);
      if (mh == mit->second.end() || bh == bit->second.end()) continue;
      std::vector<double> d;
      std::vector<int> targets;
      for (const auto& [tgt, me] : mh->second) {
        auto be = bh->second.find(tgt);
        if (be == bh->second.end()) continue;
        d.push_back(be->second * be->second - me * me);
        targets.push_back(tgt);
      }
      if (static_cast<int>(d.size()) < settings.fluctuation_window) continue;
      FluctuationResult fr = fluctuation_test(d, settings.fluctuation_window, h - 1);
      std::string fname = dir + "/fluctuation_" + sanitize(model) + "_vs_" + sanitize(bench) +
                          "_h" + std::to_string(h) + ".csv";
      std::ofstream out(fname);
      if (!out) throw data_error("cannot write file: " + fname);
      out << "center_target,statistic,cv_one_sided_5pct,reject\n";
      for (std::size_t i = 0; i < fr.path.size(); ++i) {
        MonthDate center = MonthDate::from_index(targets[static_cast<std::size_t>(fr.first_center) + i]);
        out << center.to_string() << "," << format_double(fr.path[i]) << ","
            << format_double(fr.cv_one_sided_5pct) << "," << (fr.reject ? 1 : 0) << "\n";
      }
    }
  }
}

std::string pick_monitor_model(const PipelineConfig& pc) {
  if (!pc.monitor.model.empty()) return pc.monitor.model;
  for (const auto& m : pc.plan.models) {
    if (m.multivariate()) return m.id;
  }
  return pc.plan.models.front().id;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& pc, const std::string& config_text) {
  const fs::path run_dir(pc.out_dir);
  fs::create_directories(run_dir);
  std::set<std::string> stages(pc.stages.begin(), pc.stages.end());
  nlohmann::json timings;
  auto timed = [&](const std::string& name, auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings[name] = dt;
  };

  // data acquisition: synthetic generation or ingestion from a directory
  DataBundle bundle;
  timed("data", [&] {
    if (pc.data_source == "synth") {
      SynthBundle sb = generate_bundle(pc.synth);
      if (stages.count("synth")) {
        fs::create_directories(run_dir / "data");
        write_bundle(sb, (run_dir / "data").string());
      }
      bundle = std::move(sb.data);
    } else {
      bundle = DataBundle::load(pc.data_source);
    }
  });

  if (stages.count("interpolate")) {
    timed("interpolate", [&] {
      std::vector<MonthlySeries> ip_all;
      MonthDate lo = bundle.ip_sectors.front().start;
      for (const auto& s : bundle.ip_sectors) lo = std::max(lo, s.start);
      if (lo.month != 1) lo = MonthDate(lo.year + 1, 1);
      MonthDate hi = bundle.ip_sectors.front().last_date();
      for (const auto& s : bundle.ip_sectors) hi = std::min(hi, s.last_date());
      for (const auto& s : bundle.ip_sectors) ip_all.push_back(s.window(lo, hi));
      MonthlySeries indicator = weighted_indicator(ip_all, bundle.ip_weights);
      MonthlySeries monthly =
          disaggregate_emissions(bundle.annual_emissions, indicator, pc.plan.chow_lin_constant);
      write_monthly_csv((run_dir / "emissions_monthly.csv").string(), {monthly});

      const int full_years = indicator.size() / 12;
      AnnualSeries aligned;
      aligned.start_year = lo.year;
      for (int y = 0; y < full_years; ++y) {
        int src = lo.year + y - bundle.annual_emissions.start_year;
        aligned.values.push_back(src < bundle.annual_emissions.size()
                                     ? bundle.annual_emissions.values[static_cast<std::size_t>(src)]
                                     : bundle.annual_emissions.values.back());
      }
      ChowLinResult fit = chow_lin(
          aligned, indicator.window(lo, lo.plus_months(12 * full_years - 1)),
          pc.plan.chow_lin_constant);
      nlohmann::json j;
      j["rho"] = fit.rho;
      j["beta"] = fit.beta;
      j["loglik"] = fit.fit_loglik;
      std::ofstream out(run_dir / "interpolation.json");
      out << j.dump(1) << "\n";
    });
  }

  if (stages.count("factors")) {
    timed("factors", [&] {
      std::vector<MonthlySeries> transformed;
      std::map<std::string, PredictorClass> classes;
      for (const auto& s : bundle.predictors_raw) {
        auto meta = bundle.predictor_meta.at(s.name);
        transformed.push_back(apply_transform(s, meta.transform));
        classes[s.name] = meta.klass;
      }
      PredictorPanel panel = align_panel(transformed, classes);
      int k = 1;
      for (const auto& m : pc.plan.models) k = std::max(k, m.n_factors);
      k = std::max(k, std::min(3, panel.n_predictors()));
      FactorModel fm = extract_factors(panel, k);

      write_monthly_csv((run_dir / "factors.csv").string(), fm.factors);
      {
        std::vector<std::string> header{"predictor"};
        for (int f = 0; f < k; ++f) header.push_back("factor" + std::to_string(f + 1));
        std::vector<std::vector<std::string>> rows;
        for (int j = 0; j < panel.n_predictors(); ++j) {
          std::vector<std::string> row{fm.predictor_names[static_cast<std::size_t>(j)]};
          for (int f = 0; f < k; ++f) row.push_back(format_double(fm.loadings(j, f)));
          rows.push_back(std::move(row));
        }
        write_table_csv((run_dir / "factor_loadings.csv").string(), header, rows);
      }
      {
        // first-window R^2 diagnostics
        std::vector<MonthlySeries> first_window;
        for (const auto& s : transformed) {
          first_window.push_back(s.up_to(pc.plan.first_estimation_end));
        }
        PredictorPanel panel0 = align_panel(first_window, classes);
        FactorModel fm0 = extract_factors(panel0, k);
        std::vector<std::string> header{"predictor"};
        for (int f = 0; f < k; ++f) header.push_back("r2_factor" + std::to_string(f + 1));
        std::vector<std::vector<std::string>> rows;
        for (int j = 0; j < panel0.n_predictors(); ++j) {
          std::vector<std::string> row{fm0.predictor_names[static_cast<std::size_t>(j)]};
          for (int f = 0; f < k; ++f) {
            row.push_back(format_double(
                factor_r2(fm0.factors[static_cast<std::size_t>(f)], panel0.series[static_cast<std::size_t>(j)])));
          }
          rows.push_back(std::move(row));
        }
        write_table_csv((run_dir / "factor_r2_first_window.csv").string(), header, rows);
      }
      {
        auto contrib = factor_contributions(fm, panel, 0);
        std::vector<MonthlySeries> cols;
        for (auto& [klass, series] : contrib) {
          MonthlySeries s = series;
          s.name = "contrib_" + to_string(klass);
          cols.push_back(std::move(s));
        }
        cols.push_back(fm.factors[0]);
        write_monthly_csv((run_dir / "factor1_contributions.csv").string(), cols);
        std::vector<MonthlySeries> smoothed;
        for (const auto& s : cols) {
          if (s.size() >= 3) smoothed.push_back(moving_average(s, 3, MaMode::centered));
        }
        write_monthly_csv((run_dir / "factor1_contributions_ma3.csv").string(), smoothed);
      }
      {
        std::vector<std::string> header{"factor", "eigenvalue", "variance_share"};
        std::vector<std::vector<std::string>> rows;
        for (std::size_t f = 0; f < fm.variance_shares.size(); ++f) {
          rows.push_back({"factor" + std::to_string(f + 1), format_double(fm.eigenvalues[f]),
                          format_double(fm.variance_shares[f])});
        }
        write_table_csv((run_dir / "factor_variance_shares.csv").string(), header, rows);
      }
    });
  }

  std::vector<ForecastRecord> records;
  bool have_records = false;
  if (stages.count("backtest")) {
    timed("backtest", [&] {
      records = run_expanding_window(bundle, pc.plan);
      have_records = true;
      write_records_csv((run_dir / "records.csv").string(), records);
      write_records_json((run_dir / "records.json").string(), records, pc.plan.store_draws);
    });
  }

  auto ensure_records = [&] {
    if (!have_records) {
      records = read_records_csv((run_dir / "records.csv").string());
      have_records = true;
    }
  };

  if (stages.count("score")) {
    timed("score", [&] {
      ensure_records();
      auto eval_records = filter_to_evaluation_sample(records, pc.plan);
      write_scores_csv((run_dir / "scores.csv").string(), eval_records, pc.score.benchmark);
      write_fluctuation_paths(run_dir.string(), eval_records, pc.score, pc.plan.models);
    });
  }

  if (stages.count("monitor")) {
    timed("monitor", [&] {
      ensure_records();
      std::string model = pick_monitor_model(pc);
      std::vector<ForecastRecord> model_records;
      for (const auto& r : records) {
        if (r.model_id == model) model_records.push_back(r);
      }
      PressureIndex dp = demand_pressure(model_records);
      PressureIndex up =
          price_pressure(model_records, bundle.price, PressureKind::price_up, pc.monitor.density_pp);
      PressureIndex down = price_pressure(model_records, bundle.price, PressureKind::price_down,
                                          pc.monitor.density_pp);
      write_pressure_csv((run_dir / "demand_pressure.csv").string(), dp);
      write_pressure_csv((run_dir / "price_pressure_up.csv").string(), up);
      write_pressure_csv((run_dir / "price_pressure_down.csv").string(), down);
      nlohmann::json j;
      j["model"] = model;
      j["density_variant"] = pc.monitor.density_pp;
      auto dump_index = [](const PressureIndex& idx) {
        nlohmann::json o;
        for (std::size_t i = 0; i < idx.values.size(); ++i) {
          o["origins"].push_back(idx.origins[i].to_string());
          o["values"].push_back(idx.values[i]);
        }
        o["warnings"] = idx.warnings;
        return o;
      };
      j["demand_pressure"] = dump_index(dp);
      j["price_pressure_up"] = dump_index(up);
      j["price_pressure_down"] = dump_index(down);
      std::ofstream out(run_dir / "monitor_report.json");
      out << j.dump(1) << "\n";
    });
  }

  if (stages.count("report")) {
    timed("report", [&] { report_stage(run_dir.string(), pc.score.benchmark); });
  }

  // deterministic manifest: config hash, seed, per-file digests
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = pc.seed;
  manifest["config_hash"] = hex64(fnv1a64(config_text));
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(run_dir)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    if (name == "manifest.json" || name == "timings.json") continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t agg = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    std::string rel = fs::relative(f, run_dir).string();
    std::uint64_t h = hash_file(f);
    manifest["files"][rel] = hex64(h);
    agg = fnv1a64(rel + ":" + hex64(h) + "\n", agg);
  }
  manifest["content_hash"] = hex64(agg);
  {
    std::ofstream out(run_dir / "manifest.json");
    out << manifest.dump(1) << "\n";
    std::ofstream tout(run_dir / "timings.json");
    tout << timings.dump(1) << "\n";
  }

  PipelineResult res;
  res.run_dir = run_dir.string();
  res.content_hash = manifest["content_hash"];
  return res;
}

void report_stage(const std::string& run_dir, const std::string& benchmark) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "scores.csv")) {
    throw data_error("report: run directory incomplete (missing scores.csv)");
  }
  std::ifstream in(dir / "scores.csv");
  std::string line;
  std::getline(in, line);
  struct Row {
    std::string variable, model;
    int horizon;
    std::map<std::string, std::string> cells;
  };
  std::vector<std::string> header = csv_split(line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = csv_split(line);
    while (cells.size() < header.size()) cells.emplace_back();
    Row r;
    r.variable = cells[0];
    r.model = cells[1];
    r.horizon = std::stoi(cells[2]);
    for (std::size_t i = 3; i < header.size(); ++i) r.cells[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw data_error("report: scores.csv has no rows");

  const std::vector<std::pair<std::string, bool>> metrics = {
      {"relative_rmsfe", false}, {"success_ratio", true},   {"qcrps", false},
      {"wqcrps_center", false},  {"wqcrps_right", false},   {"wqcrps_left", false},
      {"dm_p", false},           {"pt_p", false},
  };
  std::set<std::string> variables;
  for (const auto& r : rows) variables.insert(r.variable);

  for (const auto& variable : variables) {
    std::set<std::string> models;
    std::set<int> horizons;
    for (const auto& r : rows) {
      if (r.variable != variable) continue;
      models.insert(r.model);
      horizons.insert(r.horizon);
    }
    for (const auto& [metric, maximize] : metrics) {
      std::vector<std::string> head{"horizon"};
      for (const auto& m : models) head.push_back(m);
      head.push_back("best");
      std::vector<std::vector<std::string>> table;
      bool any = false;
      for (int h : horizons) {
        std::vector<std::string> row{std::to_string(h)};
        std::string best_model;
        double best_value = maximize ? -std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::infinity();
        for (const auto& m : models) {
          std::string cell;
          for (const auto& r : rows) {
            if (r.variable == variable && r.model == m && r.horizon == h) {
              auto it = r.cells.find(metric);
              if (it != r.cells.end()) cell = it->second;
              break;
            }
          }
          row.push_back(cell);
          if (!cell.empty()) {
            any = true;
            double v = std::stod(cell);
            bool better = maximize ? v > best_value : v < best_value;
            // exact ties resolve to the lexicographically smallest model id
            if (better || (v == best_value && (best_model.empty() || m < best_model))) {
              best_value = v;
              best_model = m;
            }
          }
        }
        row.push_back(best_model);
        table.push_back(std::move(row));
      }
      if (!any) continue;
      write_table_csv((dir / ("report_" + metric + "_" + variable + ".csv")).string(), head,
                      table);
    }
  }

  nlohmann::json j;
  j["benchmark"] = benchmark;
  j["variables"] = std::vector<std::string>(variables.begin(), variables.end());
  std::ofstream out(dir / "report.json");
  out << j.dump(1) << "\n";
}

}  // namespace carboncast
