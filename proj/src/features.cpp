#include "mspi/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "mspi/error.hpp"
#include "mspi/parallel.hpp"

namespace mspi {

void TailThreshold::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tail_threshold must be > 0");
}

const std::array<std::string_view, kNumFeatures>& feature_names() {
  static const std::array<std::string_view, kNumFeatures> names = {
      "n_stocks", "xs_std",  "xs_skew",      "xs_kurt",         "mean_abs_ret",
      "frac_dn",  "frac_up", "mean_log_vol", "mean_dollar_vol", "mean_turnover"};
  return names;
}

std::optional<std::size_t> FeatureMatrix::find(const YearMonth& m) const {
  auto it = std::lower_bound(months.begin(), months.end(), m);
  if (it == months.end() || *it != m) return std::nullopt;
  return static_cast<std::size_t>(it - months.begin());
}

namespace {

bool obs_less(const DailyObservation& a, const DailyObservation& b) {
  return std::tie(a.security, a.ret, a.prc, a.vol, a.shrout) <
         std::tie(b.security, b.ret, b.prc, b.vol, b.shrout);
}

}  // namespace

DailyCrossSectionStats cross_section_stats(std::span<const DailyObservation> day_obs,
                                           const TailThreshold& tau, Date date) {
  if (day_obs.empty()) throw DataError("cross_section_stats: empty day " + format_date(date));

  std::vector<DailyObservation> sorted;
  std::span<const DailyObservation> obs = day_obs;
  if (!std::is_sorted(day_obs.begin(), day_obs.end(), obs_less)) {
    sorted.assign(day_obs.begin(), day_obs.end());
    std::sort(sorted.begin(), sorted.end(), obs_less);
    obs = sorted;
  }

  DailyCrossSectionStats s;
  s.date = date;
  s.n_stocks = obs.size();
  const double n = static_cast<double>(obs.size());

  // Moments are accumulated on returns shifted by the first observation's
  // return, which makes them exactly invariant to adding a constant to every
  // return whenever those differences are representable.
  const double pivot = obs.front().ret;
  double sum_d = 0.0;
  double sum_abs = 0.0;
  std::size_t n_dn = 0;
  std::size_t n_up = 0;
  bool all_equal = true;
  for (const auto& o : obs) {
    sum_d += o.ret - pivot;
    sum_abs += std::fabs(o.ret);
    if (o.ret <= -tau.tau) ++n_dn;
    if (o.ret >= tau.tau) ++n_up;
    if (o.ret != pivot) all_equal = false;
  }
  const double mean_d = sum_d / n;
  s.xs_mean = pivot + mean_d;
  s.mean_abs_ret = sum_abs / n;
  s.frac_dn = static_cast<double>(n_dn) / n;
  s.frac_up = static_cast<double>(n_up) / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  if (!all_equal) {
    for (const auto& o : obs) {
      const double e = (o.ret - pivot) - mean_d;
      const double e2 = e * e;
      m2 += e2;
      m3 += e2 * e;
      m4 += e2 * e2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
  }
  if (all_equal || m2 == 0.0) {
    s.degenerate = true;
  } else {
    s.xs_std = std::sqrt(m2);
    s.xs_skew = m3 / (s.xs_std * s.xs_std * s.xs_std);
    s.xs_kurt = m4 / (m2 * m2);
  }

  double sum_log_vol = 0.0, sum_dollar = 0.0, sum_turn = 0.0;
  std::size_t n_vol = 0, n_turn = 0;
  for (const auto& o : obs) {
    if (!std::isfinite(o.vol) || o.vol < 0.0) continue;
    sum_log_vol += std::log1p(o.vol);
    sum_dollar += std::fabs(o.prc) * o.vol;
    ++n_vol;
    if (std::isfinite(o.shrout) && o.shrout > 0.0) {
      sum_turn += o.vol / o.shrout;
      ++n_turn;
    }
  }
  const double nan = std::nan("");
  s.mean_log_vol = n_vol ? sum_log_vol / static_cast<double>(n_vol) : nan;
  s.mean_dollar_vol = n_vol ? sum_dollar / static_cast<double>(n_vol) : nan;
  s.mean_turnover = n_turn ? sum_turn / static_cast<double>(n_turn) : nan;
  return s;
}

std::vector<DailyCrossSectionStats> compute_daily_stats(const DailyPanel& panel,
                                                        const TailThreshold& tau,
                                                        unsigned threads) {
  tau.validate();
  std::vector<DailyCrossSectionStats> out(panel.num_days());
  parallel_for(panel.num_days(), threads, [&](std::size_t i) {
    out[i] = cross_section_stats(panel.day(i), tau, panel.dates()[i]);
  });
  return out;
}

FeatureMatrix aggregate_monthly(std::span<const DailyCrossSectionStats> daily_stats,
                                const MonthPartition& partition) {
  FeatureMatrix fm;
  fm.values = Matrix(partition.size(), kNumFeatures);
  fm.months.reserve(partition.size());

  auto lookup = [&](const Date& d) -> const DailyCrossSectionStats& {
    auto it = std::lower_bound(
        daily_stats.begin(), daily_stats.end(), d,
        [](const DailyCrossSectionStats& s, const Date& x) { return s.date < x; });
    if (it == daily_stats.end() || it->date != d)
      throw DataError("aggregate_monthly: no daily statistics for " + format_date(d));
    return *it;
  };

  for (std::size_t m = 0; m < partition.size(); ++m) {
    const MonthBucket& bucket = partition.months[m];
    std::array<double, kNumFeatures> sum{};
    std::array<std::size_t, kNumFeatures> count{};
    auto add = [&](Feature f, double v) {
      const auto k = static_cast<std::size_t>(f);
      sum[k] += v;
      ++count[k];
    };
    for (const Date& d : bucket.days) {
      const DailyCrossSectionStats& s = lookup(d);
      add(Feature::n_stocks, static_cast<double>(s.n_stocks));
      add(Feature::xs_std, s.xs_std);
      if (!s.degenerate) {
        add(Feature::xs_skew, s.xs_skew);
        add(Feature::xs_kurt, s.xs_kurt);
      }
      add(Feature::mean_abs_ret, s.mean_abs_ret);
      add(Feature::frac_dn, s.frac_dn);
      add(Feature::frac_up, s.frac_up);
      if (std::isfinite(s.mean_log_vol)) add(Feature::mean_log_vol, s.mean_log_vol);
      if (std::isfinite(s.mean_dollar_vol)) add(Feature::mean_dollar_vol, s.mean_dollar_vol);
      if (std::isfinite(s.mean_turnover)) add(Feature::mean_turnover, s.mean_turnover);
    }
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      if (count[k] == 0)
        throw DataError(fmt::format("feature '{}' undefined for month {}: no usable trading day",
                                    feature_names()[k], format_year_month(bucket.month)));
      fm.values(m, k) = sum[k] / static_cast<double>(count[k]);
    }
    fm.months.push_back(bucket.month);
  }
  return fm;
}

}  // namespace mspi
