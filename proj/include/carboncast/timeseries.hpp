#pragma once

#include <map>
#include <string>
#include <vector>

#include "carboncast/month_date.hpp"

namespace carboncast {

enum class Transform { none, log, diff, log_diff };

std::string to_string(Transform t);
Transform transform_from_string(const std::string& s);

// Real-valued series indexed by calendar month. Values are contiguous (no
// interior gaps); construction rejects non-finite entries. Immutable in
// practice: operations return new series.
struct MonthlySeries {
  MonthDate start;
  std::vector<double> values;
  Transform transform_tag = Transform::none;
  std::string name;

  MonthlySeries() = default;
  MonthlySeries(MonthDate start_, std::vector<double> values_,
                Transform tag = Transform::none, std::string name_ = "");

  int size() const { return static_cast<int>(values.size()); }
  MonthDate date_at(int i) const { return start.plus_months(i); }
  MonthDate last_date() const { return start.plus_months(size() - 1); }
  double back() const { return values.back(); }

  bool covers(const MonthDate& d) const {
    return d >= start && d <= last_date();
  }
  double at(const MonthDate& d) const;

  // Sub-series on [from, to], both inclusive; throws if outside the range.
  MonthlySeries window(const MonthDate& from, const MonthDate& to) const;
  // All observations dated <= cutoff.
  MonthlySeries up_to(const MonthDate& cutoff) const;
};

enum class PredictorClass { economic_activity, energy, technical, weather };

std::string to_string(PredictorClass c);
PredictorClass predictor_class_from_string(const std::string& s);

// Standardized predictor series on a common sample, tagged by class.
// window_standardized distinguishes panels standardized on their own sample
// (moment invariants enforced) from panels carrying frozen full-sample
// statistics.
struct PredictorPanel {
  std::vector<MonthlySeries> series;  // all share start and length
  std::map<std::string, PredictorClass> class_of;
  MonthDate start;
  int length = 0;
  bool window_standardized = true;

  int n_predictors() const { return static_cast<int>(series.size()); }
  void validate() const;  // throws data_error when invariants fail
};

// --- transformations -------------------------------------------------------

// First difference of the logarithm; output starts one month later.
MonthlySeries log_diff(const MonthlySeries& s);
// Plain first difference.
MonthlySeries diff(const MonthlySeries& s);
// Elementwise log.
MonthlySeries log_series(const MonthlySeries& s);
// Dispatch on a Transform tag (none returns a copy).
MonthlySeries apply_transform(const MonthlySeries& s, Transform t);

struct StandardizeResult {
  MonthlySeries series;
  double mean = 0.0;
  double sd = 0.0;
};

// Demean/rescale to sample mean 0, variance 1 (n-1 denominator). The mean
// and sd used are returned so the transform can be inverted.
StandardizeResult standardize(const MonthlySeries& s);

// Dates where |value - median| > 20 * IQR. Flags only; values are kept.
std::vector<MonthDate> flag_outliers(const MonthlySeries& s);

// Demean/rescale with externally supplied statistics (inverse of the pair
// returned by standardize).
MonthlySeries apply_standardization(const MonthlySeries& s, double mean, double sd);

// Truncate all series to the maximal common date range and standardize each.
// `classes` supplies the class tag per series name (missing names throw).
PredictorPanel align_panel(const std::vector<MonthlySeries>& series,
                           const std::map<std::string, PredictorClass>& classes);

// Same alignment but the series are taken as already standardized (frozen
// statistics); moment invariants are not enforced.
PredictorPanel build_panel_fixed(const std::vector<MonthlySeries>& standardized_series,
                                 const std::map<std::string, PredictorClass>& classes);

// --- small sample statistics (shared helpers) ------------------------------

double mean_of(const std::vector<double>& x);
double variance_of(const std::vector<double>& x);  // n-1 denominator
double median_of(std::vector<double> x);           // by value: sorts a copy
// Linear interpolation of order statistics, q(alpha) = x_(1+(n-1)alpha).
double quantile_of(std::vector<double> x, double alpha);

}  // namespace carboncast
