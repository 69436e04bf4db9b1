#pragma once

#include <cstdint>
#include <string>

#include "carboncast/data_bundle.hpp"

namespace carboncast {

// Configuration of the synthetic market generator. Defaults mirror the
// production data shape: 136 months from 2012-06, 21 predictors in classes
// 8/7/3/2, six IP sectors from 2006 driving annual emissions.
struct SynthConfig {
  int T = 136;
  MonthDate start{2012, 6};
  int n_predictors = 21;
  int true_factor_count = 2;
  double factor_rho1 = 0.95;
  double factor_rho2 = 0.85;
  double idio_sd = 0.7;           // predictor idiosyncratic noise
  double price_factor_load1 = 0.03;
  double price_factor_load2 = 0.015;
  double price_ar = 0.2;
  double price_noise_sd = 0.05;
  bool sv_on = false;
  double sv_mu = -6.0;            // log-variance level when sv_on
  double sv_phi = 0.95;
  double sv_sigma = 0.2;
  int ip_start_year_offset = 6;   // IP/emissions start this many years early
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthBundle {
  DataBundle data;
  std::string truth_json;  // ground-truth ledger (latent objects, parameters)
};

SynthBundle generate_bundle(const SynthConfig& cfg);

// Write the bundle in the same CSV formats the ingestion layer reads.
void write_bundle(const SynthBundle& bundle, const std::string& dir);

}  // namespace carboncast
