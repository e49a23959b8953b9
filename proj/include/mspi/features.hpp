#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mspi/date.hpp"
#include "mspi/matrix.hpp"
#include "mspi/panel.hpp"

namespace mspi {

struct TailThreshold {
  double tau = 0.05;
  void validate() const;
};

/// Cross-sectional statistics of one trading day. Moments use the population
/// convention (divide by N_d). When every return on the day is identical the
/// day is `degenerate`: skew and kurt are reported as 0 and excluded from
/// monthly averages. Intensity means are NaN when no row carries the needed
/// volume fields.
struct DailyCrossSectionStats {
  Date date;
  std::size_t n_stocks = 0;
  double xs_mean = 0.0;
  double xs_std = 0.0;
  double xs_skew = 0.0;
  double xs_kurt = 0.0;
  double mean_abs_ret = 0.0;
  double frac_dn = 0.0;
  double frac_up = 0.0;
  double mean_log_vol = 0.0;
  double mean_dollar_vol = 0.0;
  double mean_turnover = 0.0;
  bool degenerate = false;
};

inline constexpr std::size_t kNumFeatures = 10;

enum class Feature : std::size_t {
  n_stocks,
  xs_std,
  xs_skew,
  xs_kurt,
  mean_abs_ret,
  frac_dn,
  frac_up,
  mean_log_vol,
  mean_dollar_vol,
  mean_turnover,
};

const std::array<std::string_view, kNumFeatures>& feature_names();

/// Monthly predictors, one row per month in increasing order.
struct FeatureMatrix {
  std::vector<YearMonth> months;
  Matrix values;  // months.size() x kNumFeatures

  std::size_t size() const { return months.size(); }
  std::optional<std::size_t> find(const YearMonth& m) const;
  double at(std::size_t row, Feature f) const { return values(row, static_cast<std::size_t>(f)); }
};

/// Statistics for one day. Observations are accumulated in security order
/// (ties broken by field values), so any permutation of the input gives
/// bit-identical results. Throws DataError on an empty day.
DailyCrossSectionStats cross_section_stats(std::span<const DailyObservation> day_obs,
                                           const TailThreshold& tau, Date date = {});

/// cross_section_stats for every panel date. Days are independent; the
/// result does not depend on `threads`.
std::vector<DailyCrossSectionStats> compute_daily_stats(const DailyPanel& panel,
                                                        const TailThreshold& tau,
                                                        unsigned threads = 1);

/// Unweighted within-month means of the daily statistics. Degenerate days
/// are skipped for skew/kurt and NaN intensity days for the intensity
/// features; a month with no usable day for some feature throws DataError
/// naming the feature and month.
FeatureMatrix aggregate_monthly(std::span<const DailyCrossSectionStats> daily_stats,
                                const MonthPartition& partition);

}  // namespace mspi
