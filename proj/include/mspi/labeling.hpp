#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mspi/date.hpp"
#include "mspi/panel.hpp"

namespace mspi {

struct StressConfig {
  double return_cutoff = -0.05;  // c_R
  double vol_quantile = 0.90;    // alpha
  std::size_t min_history_months = 36;
  double annualization_factor = std::sqrt(252.0);

  void validate() const;
};

struct MarketMonthly {
  YearMonth month;
  double ret = 0.0;  // compounded monthly market return
  double vol = 0.0;  // annualized within-month sample std of daily returns
};

/// Prod(1 + r_d) - 1 over each partition month's trading days.
std::vector<double> monthly_market_return(const MarketSeries& market,
                                          const MonthPartition& partition);

/// Sample (n-1) standard deviation of each month's daily market returns,
/// times the annualization factor. A single-day month throws DataError.
std::vector<double> realized_monthly_vol(const MarketSeries& market,
                                         const MonthPartition& partition,
                                         double annualization_factor = std::sqrt(252.0));

std::vector<MarketMonthly> market_monthly(const MarketSeries& market,
                                          const MonthPartition& partition,
                                          const StressConfig& config = {});

/// Linear-interpolation quantile at position (n-1)*alpha of the sorted
/// history. Returns nullopt when history.size() < min_history.
std::optional<double> expanding_quantile(std::span<const double> history, double alpha,
                                         std::size_t min_history = 1);

struct LabelRow {
  YearMonth month;
  double mkt_ret = 0.0;
  double mkt_vol = 0.0;
  std::optional<double> q_prev;  // alpha-quantile of vol over months before this one
  std::optional<int> stress;     // S_t, present once q_prev exists
  std::optional<int> y_next;     // S_{t+1}, present when both months are labeled
  bool return_branch = false;
  bool vol_branch = false;
};

struct LabelSeries {
  std::vector<LabelRow> rows;

  std::size_t size() const { return rows.size(); }
  std::optional<std::size_t> find(const YearMonth& m) const;
  /// Index of the first row carrying a stress label, if any.
  std::optional<std::size_t> first_labeled() const;
};

/// S_t = 1{R_t <= c_R} or 1{sigma_t >= q_{t-1}(alpha)}. Months with fewer than
/// min_history_months of prior volatility history stay unlabeled.
LabelSeries label_stress(std::span<const MarketMonthly> monthly, const StressConfig& config);

}  // namespace mspi
