#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "carboncast/backtest.hpp"
#include "carboncast/synth.hpp"

namespace carboncast {

// Flat key-value configuration with [section] headers and '#' comments.
class Config {
public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

  // Sorted, normalized dump used for hashing.
  std::string canonical_text() const;
  // Rejects keys outside the known schema.
  void validate_known_keys() const;

  std::map<std::string, std::map<std::string, std::string>> sections;
};

struct ScoreSettings {
  std::string benchmark = "rw";
  int fluctuation_window = 19;
  int fluctuation_hac_lags = 0;  // extra HAC lags beyond h-1 are not used; see eval
  std::vector<int> fluctuation_horizons = {1, 3, 12};
  std::vector<std::pair<std::string, std::string>> fluctuation_pairs;  // model, benchmark
};

struct MonitorSettings {
  std::string model;  // defaults to the first multivariate model
  bool density_pp = false;
};

struct PipelineConfig {
  std::string data_source = "synth";  // "synth" or a directory path
  SynthConfig synth;
  BacktestPlan plan;
  ScoreSettings score;
  MonitorSettings monitor;
  std::vector<std::string> stages = {"synth", "interpolate", "factors",
                                     "backtest", "score", "monitor", "report"};
  std::uint64_t seed = 42;
  std::string out_dir = "run_out";
  int jobs = 1;

  static PipelineConfig from_config(const Config& cfg);
};

}  // namespace carboncast
