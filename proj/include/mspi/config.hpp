#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mspi/backtest.hpp"
#include "mspi/bootstrap.hpp"
#include "mspi/features.hpp"
#include "mspi/labeling.hpp"
#include "mspi/panel.hpp"
#include "mspi/synthetic.hpp"

namespace mspi {

/// Everything a pipeline run needs. Serialized as one flat JSON object;
/// simulator keys carry a sim_ prefix.
struct PipelineConfig {
  std::string out_dir = "out";
  std::string panel_path;   // default <out_dir>/panel.csv
  std::string market_path;  // default <out_dir>/market.csv
  std::uint64_t seed = 7;
  unsigned threads = 1;

  EligibilityFilter filter;
  TailThreshold tail;
  StressConfig stress;
  BacktestConfig backtest;
  SimConfig sim;

  std::size_t ece_bins = 10;
  std::vector<double> bin_edges{0.0, 0.05, 0.10, 0.20, 0.40, 1.0};
  std::size_t bootstrap_block = 12;
  std::size_t bootstrap_reps = 2000;
  std::string mspi_model = "l1_logit";
  std::string benchmark_model = "l2_logit";

  std::size_t hac_lag = 3;
  double crash_cutoff = -0.05;
  std::size_t lp_horizon = 12;
  /// realized_vol, crash, or a feature name.
  std::string lp_outcome = "realized_vol";
  std::size_t lp_hac_offset = 1;

  void validate() const;
  /// Copies the master seed into the simulator and backtest.
  void propagate_seed();
  std::string resolved_panel_path() const;
  std::string resolved_market_path() const;
  std::string artifact(const std::string& name) const;
  BootstrapOptions bootstrap_options() const;
};

nlohmann::json config_to_json(const PipelineConfig& c);
/// Starts from the defaults; unknown keys and type mismatches throw
/// ConfigError naming the key.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical JSON without out_dir and threads, as 16 hex digits.
std::string config_hash(const PipelineConfig& c);

}  // namespace mspi
