#pragma once

#include <optional>
#include <vector>

#include "carboncast/csv.hpp"
#include "carboncast/timeseries.hpp"

namespace carboncast {

struct ChowLinResult {
  MonthlySeries monthly;
  double rho = 0.0;
  std::vector<double> beta;
  double fit_loglik = 0.0;
};

// GLS temporal disaggregation of an annual total onto months using a monthly
// indicator. The indicator must span exactly 12 months per annual
// observation, starting in January of the first year. Residuals follow an
// AR(1) at the monthly frequency; rho maximizes the concentrated GLS
// log-likelihood over a grid on (-0.99, 0.99) refined by golden-section
// search, unless `fixed_rho` pins it. Sum aggregation: the 12 months of each
// year add up to the annual value.
ChowLinResult chow_lin(const AnnualSeries& annual, const MonthlySeries& indicator,
                       bool constant = true,
                       std::optional<double> fixed_rho = std::nullopt);

// Pointwise weighted average of equally-long series, weights normalized to
// sum one.
MonthlySeries weighted_indicator(const std::vector<MonthlySeries>& ip_series,
                                 const std::vector<double>& weights);

// Pipeline wrapper: handles annual series shorter than the indicator by
// carrying the last annual value forward, and extrapolates a trailing
// partial year from the fitted regression plus AR(1)-decayed residual.
MonthlySeries disaggregate_emissions(const AnnualSeries& annual,
                                     const MonthlySeries& indicator, bool constant = true);

}  // namespace carboncast
