#include "mspi/labeling.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mspi/error.hpp"

namespace mspi {

void StressConfig::validate() const {
  if (!(return_cutoff < 0.0)) throw ConfigError("return_cutoff must be < 0");
  if (!(vol_quantile > 0.0 && vol_quantile < 1.0))
    throw ConfigError("vol_quantile must lie in (0, 1)");
  if (min_history_months < 2) throw ConfigError("min_history_months must be >= 2");
  if (!(annualization_factor > 0.0)) throw ConfigError("annualization_factor must be > 0");
}

namespace {

std::vector<double> month_returns(const MarketSeries& market, const MonthBucket& bucket) {
  std::vector<double> r;
  r.reserve(bucket.days.size());
  for (const Date& d : bucket.days) {
    auto v = market.find(d);
    if (!v) throw DataError("market series lacks trading day " + format_date(d));
    r.push_back(*v);
  }
  if (r.empty())
    throw DataError("month " + format_year_month(bucket.month) + " has no market returns");
  return r;
}

}  // namespace

std::vector<double> monthly_market_return(const MarketSeries& market,
                                          const MonthPartition& partition) {
  std::vector<double> out;
  out.reserve(partition.size());
  for (const auto& bucket : partition.months) {
    double growth = 1.0;
    for (double r : month_returns(market, bucket)) growth *= 1.0 + r;
    out.push_back(growth - 1.0);
  }
  return out;
}

std::vector<double> realized_monthly_vol(const MarketSeries& market,
                                         const MonthPartition& partition,
                                         double annualization_factor) {
  std::vector<double> out;
  out.reserve(partition.size());
  for (const auto& bucket : partition.months) {
    const auto r = month_returns(market, bucket);
    if (r.size() < 2)
      throw DataError(fmt::format("realized volatility undefined for month {}: {} trading day",
                                  format_year_month(bucket.month), r.size()));
    // Shifted by the first return so a constant month gives exactly zero.
    const double pivot = r.front();
    double mean = 0.0;
    for (double x : r) mean += x - pivot;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double x : r) ss += (x - pivot - mean) * (x - pivot - mean);
    out.push_back(std::sqrt(ss / static_cast<double>(r.size() - 1)) * annualization_factor);
  }
  return out;
}

std::vector<MarketMonthly> market_monthly(const MarketSeries& market,
                                          const MonthPartition& partition,
                                          const StressConfig& config) {
  const auto ret = monthly_market_return(market, partition);
  const auto vol = realized_monthly_vol(market, partition, config.annualization_factor);
  std::vector<MarketMonthly> out(partition.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {partition.months[i].month, ret[i], vol[i]};
  return out;
}

std::optional<double> expanding_quantile(std::span<const double> history, double alpha,
                                         std::size_t min_history) {
  if (history.empty() || history.size() < min_history) return std::nullopt;
  std::vector<double> x(history.begin(), history.end());
  std::sort(x.begin(), x.end());
  const double h = static_cast<double>(x.size() - 1) * alpha;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

std::optional<std::size_t> LabelSeries::find(const YearMonth& m) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), m,
                             [](const LabelRow& r, const YearMonth& x) { return r.month < x; });
  if (it == rows.end() || it->month != m) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

std::optional<std::size_t> LabelSeries::first_labeled() const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].stress) return i;
  return std::nullopt;
}

LabelSeries label_stress(std::span<const MarketMonthly> monthly, const StressConfig& config) {
  config.validate();
  LabelSeries out;
  out.rows.reserve(monthly.size());
  for (std::size_t t = 0; t < monthly.size(); ++t) {
    if (t > 0 && !(monthly[t - 1].month < monthly[t].month))
      throw DataError("label_stress: months must be strictly increasing");
    if (!(monthly[t].vol >= 0.0))
      throw DataError("label_stress: negative or missing volatility in " +
                      format_year_month(monthly[t].month));
    LabelRow row;
    row.month = monthly[t].month;
    row.mkt_ret = monthly[t].ret;
    row.mkt_vol = monthly[t].vol;
    std::vector<double> history;
    history.reserve(t);
    for (std::size_t k = 0; k < t; ++k) history.push_back(monthly[k].vol);
    row.q_prev = expanding_quantile(history, config.vol_quantile, config.min_history_months);
    if (row.q_prev) {
      row.return_branch = row.mkt_ret <= config.return_cutoff;
      row.vol_branch = row.mkt_vol >= *row.q_prev;
      row.stress = (row.return_branch || row.vol_branch) ? 1 : 0;
    }
    out.rows.push_back(row);
  }
  for (std::size_t t = 0; t + 1 < out.rows.size(); ++t)
    if (out.rows[t].stress && out.rows[t + 1].stress) out.rows[t].y_next = out.rows[t + 1].stress;
  return out;
}

}  // namespace mspi
