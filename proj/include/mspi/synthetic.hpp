#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mspi/date.hpp"
#include "mspi/panel.hpp"

namespace mspi {

/// Daily generating parameters for one regime.
struct RegimeParams {
  double market_drift = 0.0;     // mean daily market return
  double market_vol = 0.01;      // std of daily market return
  double dispersion = 0.015;     // std of idiosyncratic daily return
  double tail_prob = 0.002;      // probability of a -8% jump per stock-day
  double volume_scale = 1.0;     // multiplier on baseline share volume
};

/// Two-regime market. The regime is a monthly Markov chain; stock returns are
///   r_{i,d} = beta_i * m_d + sigma_regime * e_{i,d} + J_{i,d},
/// with m_d ~ N(drift, vol) the market return and J a -8% jump.
struct SimConfig {
  std::size_t n_stocks = 500;
  std::size_t n_years = 40;
  std::size_t trading_days_per_year = 252;  // must be a multiple of 12, <= 336
  int start_year = 1985;
  RegimeParams calm{0.0005, 0.008, 0.015, 0.002, 1.0};
  RegimeParams stress{-0.0015, 0.022, 0.035, 0.02, 1.8};
  double p_calm_to_stress = 0.05;
  double p_stress_to_calm = 0.25;
  bool start_in_stress = false;
  double jump_size = -0.08;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SimOutput {
  DailyPanel panel;
  MarketSeries market;
  std::vector<YearMonth> months;
  std::vector<bool> true_regime;  // true = stress, one entry per month
};

/// Deterministic given config.seed. Month m has trading_days_per_year / 12
/// trading days, placed on calendar days 1, 2, ... of that month.
SimOutput simulate(const SimConfig& config);

void write_true_regime_csv(const std::string& path, const SimOutput& sim,
                           const std::string& header_comment = {});

}  // namespace mspi
