#pragma once

#include <string>
#include <vector>

#include "carboncast/config.hpp"

namespace carboncast {

struct PipelineResult {
  std::string run_dir;
  std::string content_hash;  // deterministic digest of the run outputs
};

// Executes the requested stages into the run directory and writes
// manifest.json (deterministic) plus timings.json. `config_text` is the
// canonical config dump recorded in the manifest.
PipelineResult run_pipeline(const PipelineConfig& pc, const std::string& config_text);

// Re-derives summary tables (per-metric pivots with best-model flags, test
// p-values) from a completed run directory.
void report_stage(const std::string& run_dir, const std::string& benchmark = "rw");

}  // namespace carboncast
