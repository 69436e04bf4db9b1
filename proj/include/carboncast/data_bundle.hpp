#pragma once

#include <map>
#include <string>
#include <vector>

#include "carboncast/csv.hpp"
#include "carboncast/timeseries.hpp"

namespace carboncast {

// Everything a backtest needs, as loaded from a data directory:
//   price.csv             date,price (real EUR levels)
//   predictors.csv        date + one column per predictor
//   predictors_meta.csv   name,class,transform
//   ip_sectors.csv        date + one column per covered sector (levels)
//   ip_weights.csv        name,weight (emission weights for the indicator)
//   emissions_annual.csv  year,value (MtCO2e totals)
struct DataBundle {
  MonthlySeries price;  // levels
  std::vector<MonthlySeries> predictors_raw;
  std::map<std::string, SeriesMeta> predictor_meta;
  std::vector<MonthlySeries> ip_sectors;
  std::vector<double> ip_weights;  // aligned with ip_sectors order
  AnnualSeries annual_emissions;

  static DataBundle load(const std::string& dir);
  void save(const std::string& dir) const;
  void validate() const;
};

}  // namespace carboncast
