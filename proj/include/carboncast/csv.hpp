#pragma once

#include <map>
#include <string>
#include <vector>

#include "carboncast/timeseries.hpp"

namespace carboncast {

// Monthly CSV layout: header "date,<name>,...", first column YYYY-MM.
// Leading/trailing blanks per column give ragged edges; interior blanks are
// rejected (no imputation).
std::vector<MonthlySeries> read_monthly_csv(const std::string& path);
void write_monthly_csv(const std::string& path, const std::vector<MonthlySeries>& series);

// Sidecar metadata: "name,class,transform" per row.
struct SeriesMeta {
  PredictorClass klass = PredictorClass::economic_activity;
  Transform transform = Transform::none;
};
std::map<std::string, SeriesMeta> read_metadata_csv(const std::string& path);
void write_metadata_csv(const std::string& path,
                        const std::map<std::string, SeriesMeta>& meta);

// Annual CSV: "year,value" per row, consecutive years.
struct AnnualSeries {
  int start_year = 0;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
};
AnnualSeries read_annual_csv(const std::string& path);
void write_annual_csv(const std::string& path, const AnnualSeries& annual);

// Generic cell table writer used for score/report outputs.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);

// Minimal CSV quoting for cells that may carry commas (e.g. model ids).
std::string csv_quote(const std::string& cell);
std::vector<std::string> csv_split(const std::string& line);

}  // namespace carboncast
