#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mspi/error.hpp"
#include "mspi/features.hpp"
#include "mspi/rng.hpp"
#include "mspi/synthetic.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace mspi;
using testing_support::make_day;

namespace {

Date ymd(int y, unsigned m, unsigned d) {
  return std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
}

DailyCrossSectionStats stats(const std::vector<double>& r, double tau = 0.05) {
  return cross_section_stats(make_day(r), TailThreshold{tau});
}

// Returns on a 2^-16 grid so sums and differences are exact.
std::vector<double> dyadic_returns(Rng& rng, std::size_t n) {
  std::vector<double> r(n);
  for (auto& v : r) v = std::ldexp(static_cast<double>(static_cast<long>(rng.index(8001)) - 4000), -16);
  return r;
}

}  // namespace

TEST(CrossSection, TwoPointSymmetric) {
  const auto s = stats({0.01, -0.01});
  EXPECT_EQ(s.xs_mean, 0.0);
  EXPECT_NEAR(s.xs_std, 0.01, 1e-15);
  EXPECT_NEAR(s.xs_skew, 0.0, 1e-12);
  EXPECT_NEAR(s.xs_kurt, 1.0, 1e-12);
  EXPECT_FALSE(s.degenerate);
}

TEST(CrossSection, WeakTailInequalities) {
  const auto s = stats({-0.06, 0.0, 0.07});
  EXPECT_DOUBLE_EQ(s.frac_dn, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.frac_up, 1.0 / 3.0);
  const auto edge = stats({-0.05, 0.05, 0.0, 0.01});
  EXPECT_EQ(edge.frac_dn, 0.25);
  EXPECT_EQ(edge.frac_up, 0.25);
}

TEST(CrossSection, NormalSampleMoments) {
  Rng rng(11);
  std::vector<double> r(100000);
  for (auto& v : r) v = rng.normal();
  const auto s = stats(r, 10.0);
  EXPECT_NEAR(s.xs_skew, 0.0, 0.05);
  EXPECT_NEAR(s.xs_kurt, 3.0, 0.1);
}

TEST(CrossSection, MatchesTwoPassOracle) {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> r(2 + rng.index(300));
    for (auto& v : r) v = 0.02 * rng.normal() + (rng.bernoulli(0.05) ? -0.08 : 0.0);
    const auto s = stats(r);
    const auto o = oracle::population_moments(r);
    EXPECT_NEAR(s.xs_mean, o.mean, 1e-15);
    EXPECT_NEAR(s.xs_std, o.sd, 1e-14);
    EXPECT_NEAR(s.xs_skew, o.skew, 1e-10);
    EXPECT_NEAR(s.xs_kurt, o.kurt, 1e-10);
  }
}

TEST(CrossSection, DegenerateDayFlagged) {
  const auto s = stats({0.02, 0.02, 0.02});
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.xs_std, 0.0);
  EXPECT_EQ(s.xs_skew, 0.0);
  EXPECT_EQ(s.xs_kurt, 0.0);
  EXPECT_TRUE(stats({0.3}).degenerate);
}

TEST(CrossSection, EmptyDayIsError) {
  EXPECT_THROW(cross_section_stats({}, TailThreshold{}), DataError);
}

TEST(CrossSection, IntensityMeans) {
  std::vector<DailyObservation> day{{0, 0.01, -10.0, 99.0, 1000.0, true, true},
                                    {1, 0.02, 20.0, NAN, 1000.0, true, true},
                                    {2, 0.03, 5.0, 9.0, 0.0, true, true}};
  const auto s = cross_section_stats(day, TailThreshold{});
  EXPECT_NEAR(s.mean_log_vol, (std::log(100.0) + std::log(10.0)) / 2.0, 1e-15);
  EXPECT_EQ(s.mean_dollar_vol, (990.0 + 45.0) / 2.0);
  EXPECT_EQ(s.mean_turnover, 99.0 / 1000.0);
  EXPECT_EQ(s.n_stocks, 3u);
}

TEST(CrossSection, KurtosisAtLeastOne) {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> r(2 + rng.index(20));
    for (auto& v : r) v = rng.normal();
    const auto s = stats(r);
    EXPECT_GE(s.xs_kurt, 1.0 - 1e-12);
    EXPECT_LE(s.frac_dn + s.frac_up, 1.0);
  }
}

TEST(CrossSectionProperty, ExactInvariancesOnDyadicDays) {
  Rng rng(2024);
  for (int rep = 0; rep < 300; ++rep) {
    const auto r = dyadic_returns(rng, 2 + rng.index(200));
    const auto base = stats(r);
    if (base.degenerate) continue;

    const double c = std::ldexp(1.0, static_cast<int>(rng.index(7)) - 3);
    std::vector<double> scaled(r);
    for (auto& v : scaled) v *= c;
    const auto s = stats(scaled);
    EXPECT_EQ(s.xs_std, c * base.xs_std);
    EXPECT_EQ(s.mean_abs_ret, c * base.mean_abs_ret);
    EXPECT_EQ(s.xs_skew, base.xs_skew);
    EXPECT_EQ(s.xs_kurt, base.xs_kurt);

    const double a = std::ldexp(static_cast<double>(static_cast<long>(rng.index(2001)) - 1000), -16);
    std::vector<double> shifted(r);
    for (auto& v : shifted) v += a;
    const auto t = stats(shifted);
    EXPECT_EQ(t.xs_std, base.xs_std);
    EXPECT_EQ(t.xs_skew, base.xs_skew);
    EXPECT_EQ(t.xs_kurt, base.xs_kurt);
  }
}

TEST(CrossSectionProperty, PermutationGivesIdenticalStats) {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> r(1 + rng.index(100));
    for (auto& v : r) v = 0.03 * rng.normal();
    auto day = make_day(r);
    const auto base = cross_section_stats(day, TailThreshold{});
    for (std::size_t i = day.size(); i > 1; --i) std::swap(day[i - 1], day[rng.index(i)]);
    const auto p = cross_section_stats(day, TailThreshold{});
    EXPECT_EQ(p.xs_mean, base.xs_mean);
    EXPECT_EQ(p.xs_std, base.xs_std);
    EXPECT_EQ(p.xs_skew, base.xs_skew);
    EXPECT_EQ(p.xs_kurt, base.xs_kurt);
    EXPECT_EQ(p.mean_abs_ret, base.mean_abs_ret);
    EXPECT_EQ(p.mean_log_vol, base.mean_log_vol);
  }
}

TEST(CrossSectionProperty, ArbitraryScaleAndShiftWithinTolerance) {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> r(3 + rng.index(100));
    for (auto& v : r) v = 0.02 * rng.normal();
    const auto base = stats(r);
    const double c = 0.1 + 3.0 * rng.uniform(), a = 0.01 * rng.normal();
    std::vector<double> t(r);
    for (auto& v : t) v = c * v + a;
    const auto s = stats(t);
    EXPECT_NEAR(s.xs_std, c * base.xs_std, 1e-14);
    EXPECT_NEAR(s.xs_skew, base.xs_skew, 1e-10);
    EXPECT_NEAR(s.xs_kurt, base.xs_kurt, 1e-10);
  }
}

TEST(Aggregate, MonthlyMeanSkipsDegenerateDays) {
  std::vector<DailyCrossSectionStats> d(3);
  d[0].date = ymd(2020, 1, 2);
  d[0].xs_std = 0.01;
  d[0].xs_skew = 0.5;
  d[0].xs_kurt = 4.0;
  d[1].date = ymd(2020, 1, 3);
  d[1].xs_std = 0.03;
  d[1].xs_skew = 1.5;
  d[1].xs_kurt = 6.0;
  d[2].date = ymd(2020, 1, 6);
  d[2].degenerate = true;
  d[2].xs_std = 0.02;
  MonthPartition p;
  p.months.push_back({ymd(2020, 1, 2).year() / ymd(2020, 1, 2).month(), {d[0].date, d[1].date, d[2].date}});
  const FeatureMatrix f = aggregate_monthly(d, p);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_DOUBLE_EQ(f.at(0, Feature::xs_std), 0.02);
  EXPECT_DOUBLE_EQ(f.at(0, Feature::xs_skew), 1.0);
  EXPECT_DOUBLE_EQ(f.at(0, Feature::xs_kurt), 5.0);
}

TEST(Aggregate, SingleDayMonthEqualsDay) {
  const auto s = cross_section_stats(make_day({0.01, -0.03, 0.07}), TailThreshold{}, ymd(2021, 3, 1));
  MonthPartition p;
  p.months.push_back({std::chrono::year{2021} / std::chrono::month{3}, {ymd(2021, 3, 1)}});
  const FeatureMatrix f = aggregate_monthly(std::vector{s}, p);
  EXPECT_EQ(f.at(0, Feature::xs_std), s.xs_std);
  EXPECT_EQ(f.at(0, Feature::frac_up), s.frac_up);
  EXPECT_EQ(f.at(0, Feature::n_stocks), 3.0);
}

TEST(Aggregate, AllDegenerateMonthNamesFeatureAndMonth) {
  auto s = cross_section_stats(make_day({0.01, 0.01}), TailThreshold{}, ymd(2021, 3, 1));
  MonthPartition p;
  p.months.push_back({std::chrono::year{2021} / std::chrono::month{3}, {ymd(2021, 3, 1)}});
  try {
    aggregate_monthly(std::vector{s}, p);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("xs_skew"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2021-03"), std::string::npos) << msg;
  }
}

TEST(Aggregate, TwelveMonthSimulationShape) {
  SimConfig cfg;
  cfg.n_stocks = 40;
  cfg.n_years = 1;
  const SimOutput sim = simulate(cfg);
  const auto daily = compute_daily_stats(sim.panel, TailThreshold{});
  const FeatureMatrix f = aggregate_monthly(daily, partition_months(sim.panel, sim.market));
  ASSERT_EQ(f.size(), 12u);
  ASSERT_EQ(f.values.cols(), kNumFeatures);
  for (double v : f.values.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Aggregate, ThreadCountDoesNotChangeOutput) {
  SimConfig cfg;
  cfg.n_stocks = 60;
  cfg.n_years = 1;
  const SimOutput sim = simulate(cfg);
  const auto a = compute_daily_stats(sim.panel, TailThreshold{}, 1);
  const auto b = compute_daily_stats(sim.panel, TailThreshold{}, 4);
  const auto part = partition_months(sim.panel, sim.market);
  EXPECT_EQ(aggregate_monthly(a, part).values.data(), aggregate_monthly(b, part).values.data());
}
