#include "carboncast/data_bundle.hpp"

#include <fstream>
#include <sstream>

#include "carboncast/errors.hpp"

namespace carboncast {

namespace {

std::string join(const std::string& dir, const std::string& file) {
  if (dir.empty()) return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

}  // namespace

DataBundle DataBundle::load(const std::string& dir) {
  DataBundle b;
  auto price_cols = read_monthly_csv(join(dir, "price.csv"));
  if (price_cols.size() != 1) throw data_error("price.csv must contain exactly one series");
  b.price = price_cols.front();
  b.predictors_raw = read_monthly_csv(join(dir, "predictors.csv"));
  b.predictor_meta = read_metadata_csv(join(dir, "predictors_meta.csv"));
  b.ip_sectors = read_monthly_csv(join(dir, "ip_sectors.csv"));
  b.annual_emissions = read_annual_csv(join(dir, "emissions_annual.csv"));

  std::ifstream in(join(dir, "ip_weights.csv"));
  if (!in) throw data_error("cannot open file: " + join(dir, "ip_weights.csv"));
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, double> weights;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw data_error("ip_weights.csv: expected name,weight rows");
    weights[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  for (const auto& s : b.ip_sectors) {
    auto it = weights.find(s.name);
    if (it == weights.end()) throw data_error("ip_weights.csv: no weight for sector '" + s.name + "'");
    b.ip_weights.push_back(it->second);
  }
  b.validate();
  return b;
}

void DataBundle::save(const std::string& dir) const {
  write_monthly_csv(join(dir, "price.csv"), {price});
  write_monthly_csv(join(dir, "predictors.csv"), predictors_raw);
  write_metadata_csv(join(dir, "predictors_meta.csv"), predictor_meta);
  write_monthly_csv(join(dir, "ip_sectors.csv"), ip_sectors);
  write_annual_csv(join(dir, "emissions_annual.csv"), annual_emissions);
  std::ofstream out(join(dir, "ip_weights.csv"));
  if (!out) throw data_error("cannot write file: " + join(dir, "ip_weights.csv"));
  out << "name,weight\n";
  for (std::size_t i = 0; i < ip_sectors.size(); ++i) {
    out << ip_sectors[i].name << "," << format_double(ip_weights[i]) << "\n";
  }
}

void DataBundle::validate() const {
  if (price.size() < 24) throw data_error("DataBundle: price series too short");
  for (const auto& s : predictors_raw) {
    if (predictor_meta.find(s.name) == predictor_meta.end()) {
      throw data_error("DataBundle: predictor '" + s.name + "' missing from metadata");
    }
  }
  if (ip_sectors.empty()) throw data_error("DataBundle: no IP sector series");
  if (ip_sectors.size() != ip_weights.size()) {
    throw data_error("DataBundle: sector/weight count mismatch");
  }
  if (annual_emissions.size() < 2) throw data_error("DataBundle: need at least 2 annual values");
}

}  // namespace carboncast
