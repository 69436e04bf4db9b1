#include "carboncast/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "carboncast/errors.hpp"

namespace carboncast {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::vector<MonthlySeries> read_monthly_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty CSV: " + path);
  auto header = split_line(line);
  if (header.size() < 2 || strip(header[0]) != "date") {
    throw data_error("monthly CSV '" + path + "': header must start with 'date'");
  }
  const std::size_t ncols = header.size() - 1;
  std::vector<std::string> names(ncols);
  for (std::size_t j = 0; j < ncols; ++j) names[j] = strip(header[j + 1]);

  std::vector<MonthDate> dates;
  std::vector<std::vector<std::pair<int, double>>> cols(ncols);  // (row, value)
  int row = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw data_error("monthly CSV '" + path + "': row " + std::to_string(row + 2) +
                       " has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    MonthDate d = MonthDate::parse(strip(cells[0]));
    if (!dates.empty() && d.index() != dates.back().index() + 1) {
      throw data_error("monthly CSV '" + path + "': dates not consecutive at " + d.to_string());
    }
    dates.push_back(d);
    for (std::size_t j = 0; j < ncols; ++j) {
      std::string cell = strip(cells[j + 1]);
      if (cell.empty()) continue;
      cols[j].emplace_back(row, std::stod(cell));
    }
    ++row;
  }
  if (dates.empty()) throw data_error("monthly CSV '" + path + "': no data rows");

  std::vector<MonthlySeries> out;
  for (std::size_t j = 0; j < ncols; ++j) {
    if (cols[j].empty()) {
      throw data_error("monthly CSV '" + path + "': column '" + names[j] + "' is empty");
    }
    int first = cols[j].front().first;
    int last = cols[j].back().first;
    if (static_cast<int>(cols[j].size()) != last - first + 1) {
      throw data_error("monthly CSV '" + path + "': column '" + names[j] +
                       "' has missing interior values");
    }
    std::vector<double> vals(cols[j].size());
    for (std::size_t k = 0; k < cols[j].size(); ++k) {
      if (cols[j][k].first != first + static_cast<int>(k)) {
        throw data_error("monthly CSV '" + path + "': column '" + names[j] +
                         "' has missing interior values");
      }
      vals[k] = cols[j][k].second;
    }
    out.emplace_back(dates[static_cast<std::size_t>(first)], std::move(vals), Transform::none,
                     names[j]);
  }
  return out;
}

void write_monthly_csv(const std::string& path, const std::vector<MonthlySeries>& series) {
  if (series.empty()) throw data_error("write_monthly_csv: nothing to write");
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  MonthDate lo = series.front().start;
  MonthDate hi = series.front().last_date();
  for (const auto& s : series) {
    lo = std::min(lo, s.start);
    hi = std::max(hi, s.last_date());
  }
  out << "date";
  for (const auto& s : series) out << "," << s.name;
  out << "\n";
  for (int i = 0; i <= hi.months_since(lo); ++i) {
    MonthDate d = lo.plus_months(i);
    out << d.to_string();
    for (const auto& s : series) {
      out << ",";
      if (s.covers(d)) out << format_double(s.at(d));
    }
    out << "\n";
  }
}

std::map<std::string, SeriesMeta> read_metadata_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty metadata CSV: " + path);
  std::map<std::string, SeriesMeta> meta;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != 3) {
      throw data_error("metadata CSV '" + path + "': expected name,class,transform rows");
    }
    SeriesMeta m;
    m.klass = predictor_class_from_string(strip(cells[1]));
    m.transform = transform_from_string(strip(cells[2]));
    meta[strip(cells[0])] = m;
  }
  return meta;
}

void write_metadata_csv(const std::string& path,
                        const std::map<std::string, SeriesMeta>& meta) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "name,class,transform\n";
  for (const auto& [name, m] : meta) {
    out << name << "," << to_string(m.klass) << "," << to_string(m.transform) << "\n";
  }
}

AnnualSeries read_annual_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty annual CSV: " + path);
  AnnualSeries a;
  bool first = true;
  int prev_year = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != 2) throw data_error("annual CSV '" + path + "': expected year,value rows");
    int year = std::stoi(strip(cells[0]));
    double v = std::stod(strip(cells[1]));
    if (!std::isfinite(v)) throw data_error("annual CSV '" + path + "': non-finite value");
    if (first) {
      a.start_year = year;
      first = false;
    } else if (year != prev_year + 1) {
      throw data_error("annual CSV '" + path + "': years not consecutive at " +
                       std::to_string(year));
    }
    prev_year = year;
    a.values.push_back(v);
  }
  if (a.values.empty()) throw data_error("annual CSV '" + path + "': no data rows");
  return a;
}

void write_annual_csv(const std::string& path, const AnnualSeries& annual) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "year,value\n";
  for (int i = 0; i < annual.size(); ++i) {
    out << (annual.start_year + i) << "," << format_double(annual.values[static_cast<std::size_t>(i)])
        << "\n";
  }
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ",";
    out << csv_quote(header[j]);
  }
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ",";
      out << csv_quote(r[j]);
    }
    out << "\n";
  }
}

}  // namespace carboncast
