#include "carboncast/timeseries.hpp"

#include <algorithm>
#include <cmath>

#include "carboncast/errors.hpp"

namespace carboncast {

std::string to_string(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log: return "log";
    case Transform::diff: return "diff";
    case Transform::log_diff: return "log_diff";
  }
  return "none";
}

Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::none;
  if (s == "log") return Transform::log;
  if (s == "diff") return Transform::diff;
  if (s == "log_diff") return Transform::log_diff;
  throw data_error("unknown transform tag: '" + s + "'");
}

std::string to_string(PredictorClass c) {
  switch (c) {
    case PredictorClass::economic_activity: return "economic_activity";
    case PredictorClass::energy: return "energy";
    case PredictorClass::technical: return "technical";
    case PredictorClass::weather: return "weather";
  }
  return "economic_activity";
}

PredictorClass predictor_class_from_string(const std::string& s) {
  if (s == "economic_activity") return PredictorClass::economic_activity;
  if (s == "energy") return PredictorClass::energy;
  if (s == "technical") return PredictorClass::technical;
  if (s == "weather") return PredictorClass::weather;
  throw data_error("unknown predictor class: '" + s + "'");
}

MonthlySeries::MonthlySeries(MonthDate start_, std::vector<double> values_,
                             Transform tag, std::string name_)
    : start(start_), values(std::move(values_)), transform_tag(tag), name(std::move(name_)) {
  if (values.empty()) {
    throw data_error("MonthlySeries '" + name + "': empty series");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw data_error("MonthlySeries '" + name + "': non-finite value at " +
                       start.plus_months(static_cast<int>(i)).to_string());
    }
  }
}

double MonthlySeries::at(const MonthDate& d) const {
  if (!covers(d)) {
    throw data_error("series '" + name + "' does not cover " + d.to_string());
  }
  return values[static_cast<std::size_t>(d.months_since(start))];
}

MonthlySeries MonthlySeries::window(const MonthDate& from, const MonthDate& to) const {
  if (from > to) throw data_error("window: from > to");
  if (!covers(from) || !covers(to)) {
    throw data_error("window [" + from.to_string() + ", " + to.to_string() +
                     "] outside series '" + name + "'");
  }
  auto b = values.begin() + from.months_since(start);
  auto e = values.begin() + to.months_since(start) + 1;
  return MonthlySeries(from, std::vector<double>(b, e), transform_tag, name);
}

MonthlySeries MonthlySeries::up_to(const MonthDate& cutoff) const {
  if (cutoff < start) {
    throw data_error("up_to: cutoff " + cutoff.to_string() + " precedes series '" + name + "'");
  }
  return window(start, std::min(cutoff, last_date()));
}

void PredictorPanel::validate() const {
  if (series.empty()) throw data_error("PredictorPanel: no series");
  for (const auto& s : series) {
    if (s.start != start || s.size() != length) {
      throw data_error("PredictorPanel: series '" + s.name + "' not aligned to common sample");
    }
    if (window_standardized) {
      double m = mean_of(s.values);
      double v = variance_of(s.values);
      if (std::abs(m) > 1e-10 || std::abs(v - 1.0) > 1e-10) {
        throw data_error("PredictorPanel: series '" + s.name + "' is not standardized");
      }
    }
    if (class_of.find(s.name) == class_of.end()) {
      throw data_error("PredictorPanel: series '" + s.name + "' has no class tag");
    }
  }
}

MonthlySeries log_diff(const MonthlySeries& s) {
  if (s.size() < 2) throw data_error("log_diff: series '" + s.name + "' too short");
  std::vector<double> out(s.values.size() - 1);
  for (int i = 0; i < s.size(); ++i) {
    if (s.values[i] <= 0.0) {
      throw data_error("log_diff: nonpositive value in '" + s.name + "' at " +
                       s.date_at(i).to_string());
    }
  }
  for (std::size_t i = 0; i + 1 < s.values.size(); ++i) {
    out[i] = std::log(s.values[i + 1]) - std::log(s.values[i]);
  }
  return MonthlySeries(s.start.plus_months(1), std::move(out), Transform::log_diff, s.name);
}

MonthlySeries diff(const MonthlySeries& s) {
  if (s.size() < 2) throw data_error("diff: series '" + s.name + "' too short");
  std::vector<double> out(s.values.size() - 1);
  for (std::size_t i = 0; i + 1 < s.values.size(); ++i) {
    out[i] = s.values[i + 1] - s.values[i];
  }
  return MonthlySeries(s.start.plus_months(1), std::move(out), Transform::diff, s.name);
}

MonthlySeries log_series(const MonthlySeries& s) {
  std::vector<double> out(s.values.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s.values[i] <= 0.0) {
      throw data_error("log: nonpositive value in '" + s.name + "' at " +
                       s.date_at(i).to_string());
    }
    out[static_cast<std::size_t>(i)] = std::log(s.values[static_cast<std::size_t>(i)]);
  }
  return MonthlySeries(s.start, std::move(out), Transform::log, s.name);
}

MonthlySeries apply_transform(const MonthlySeries& s, Transform t) {
  switch (t) {
    case Transform::none: return s;
    case Transform::log: return log_series(s);
    case Transform::diff: return diff(s);
    case Transform::log_diff: return log_diff(s);
  }
  return s;
}

StandardizeResult standardize(const MonthlySeries& s) {
  if (s.size() < 2) throw data_error("standardize: series '" + s.name + "' too short");
  double m = mean_of(s.values);
  double v = variance_of(s.values);
  if (v <= 0.0) {
    throw data_error("standardize: series '" + s.name + "' has zero variance");
  }
  double sd = std::sqrt(v);
  std::vector<double> out(s.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (s.values[i] - m) / sd;
  return {MonthlySeries(s.start, std::move(out), s.transform_tag, s.name), m, sd};
}

std::vector<MonthDate> flag_outliers(const MonthlySeries& s) {
  if (s.size() < 4) throw data_error("flag_outliers: need at least 4 observations");
  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  double med = median_of(s.values);
  double q1 = quantile_of(s.values, 0.25);
  double q3 = quantile_of(s.values, 0.75);
  double iqr = q3 - q1;
  std::vector<MonthDate> flagged;
  for (int i = 0; i < s.size(); ++i) {
    if (std::abs(s.values[static_cast<std::size_t>(i)] - med) > 20.0 * iqr) {
      flagged.push_back(s.date_at(i));
    }
  }
  return flagged;
}

MonthlySeries apply_standardization(const MonthlySeries& s, double mean, double sd) {
  if (sd <= 0.0) throw data_error("apply_standardization: sd must be positive");
  std::vector<double> out(s.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (s.values[i] - mean) / sd;
  return MonthlySeries(s.start, std::move(out), s.transform_tag, s.name);
}

namespace {

PredictorPanel align_common_range(const std::vector<MonthlySeries>& series,
                                  const std::map<std::string, PredictorClass>& classes,
                                  bool restandardize) {
  if (series.empty()) throw data_error("align_panel: no series given");
  MonthDate lo = series.front().start;
  MonthDate hi = series.front().last_date();
  for (const auto& s : series) {
    lo = std::max(lo, s.start);
    hi = std::min(hi, s.last_date());
  }
  if (lo > hi) throw data_error("align_panel: no common date range");
  PredictorPanel panel;
  panel.start = lo;
  panel.length = hi.months_since(lo) + 1;
  panel.window_standardized = restandardize;
  for (const auto& s : series) {
    auto it = classes.find(s.name);
    if (it == classes.end()) {
      throw data_error("align_panel: no class tag for series '" + s.name + "'");
    }
    panel.class_of[s.name] = it->second;
    MonthlySeries trunc = s.window(lo, hi);
    panel.series.push_back(restandardize ? standardize(trunc).series : std::move(trunc));
  }
  panel.validate();
  return panel;
}

}  // namespace

PredictorPanel align_panel(const std::vector<MonthlySeries>& series,
                           const std::map<std::string, PredictorClass>& classes) {
  return align_common_range(series, classes, true);
}

PredictorPanel build_panel_fixed(const std::vector<MonthlySeries>& standardized_series,
                                 const std::map<std::string, PredictorClass>& classes) {
  return align_common_range(standardized_series, classes, false);
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
  if (x.size() < 2) throw data_error("variance_of: need at least 2 observations");
  double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double median_of(std::vector<double> x) { return quantile_of(std::move(x), 0.5); }

double quantile_of(std::vector<double> x, double alpha) {
  if (x.empty()) throw data_error("quantile_of: empty sample");
  if (alpha < 0.0 || alpha > 1.0) throw data_error("quantile_of: alpha outside [0,1]");
  std::sort(x.begin(), x.end());
  double pos = alpha * static_cast<double>(x.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= x.size()) return x.back();
  double frac = pos - static_cast<double>(lo);
  return x[lo] * (1.0 - frac) + x[lo + 1] * frac;
}

}  // namespace carboncast
