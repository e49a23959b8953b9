#include <gtest/gtest.h>

#include <cmath>

#include "mspi/error.hpp"
#include "mspi/features.hpp"
#include "mspi/synthetic.hpp"

using namespace mspi;

namespace {

SimConfig small(std::size_t years = 2, std::size_t stocks = 30) {
  SimConfig c;
  c.n_stocks = stocks;
  c.n_years = years;
  return c;
}

}  // namespace

TEST(Simulate, DeterministicUnderSeed) {
  const SimOutput a = simulate(small()), b = simulate(small());
  EXPECT_EQ(a.true_regime, b.true_regime);
  EXPECT_EQ(a.market.returns(), b.market.returns());
  ASSERT_EQ(a.panel.num_days(), b.panel.num_days());
  for (std::size_t d = 0; d < a.panel.num_days(); ++d)
    for (std::size_t i = 0; i < a.panel.count(d); ++i) {
      EXPECT_EQ(a.panel.day(d)[i].ret, b.panel.day(d)[i].ret);
      EXPECT_EQ(a.panel.day(d)[i].vol, b.panel.day(d)[i].vol);
    }
  SimConfig other = small();
  other.seed = 8;
  EXPECT_NE(simulate(other).market.returns(), a.market.returns());
}

TEST(Simulate, ShapesAndCalendar) {
  const SimOutput s = simulate(small(3, 25));
  EXPECT_EQ(s.months.size(), 36u);
  EXPECT_EQ(s.true_regime.size(), 36u);
  EXPECT_EQ(s.panel.num_days(), 36u * 21u);
  EXPECT_EQ(s.market.size(), s.panel.num_days());
  EXPECT_EQ(s.panel.security_ids().front(), "S01");
  for (std::size_t d = 0; d < s.panel.num_days(); ++d) {
    EXPECT_EQ(s.panel.dates()[d], s.market.dates()[d]);
    for (const auto& o : s.panel.day(d)) {
      EXPECT_TRUE(std::isfinite(o.ret));
      EXPECT_GE(o.vol, 0.0);
    }
  }
}

TEST(Simulate, DegenerateChainStaysCalm) {
  SimConfig c = small(5);
  c.p_calm_to_stress = 0.0;
  c.p_stress_to_calm = 1.0;
  for (bool s : simulate(c).true_regime) EXPECT_FALSE(s);
}

TEST(Simulate, StressDispersionShowsInFeature) {
  SimConfig c = small(10, 80);
  c.stress.dispersion = 3.0 * c.calm.dispersion;
  const SimOutput s = simulate(c);
  const auto daily = compute_daily_stats(s.panel, TailThreshold{});
  double calm = 0, stress = 0;
  std::size_t nc = 0, ns = 0;
  for (std::size_t d = 0; d < daily.size(); ++d) {
    const bool st = s.true_regime[d / 21];
    (st ? stress : calm) += daily[d].xs_std;
    (st ? ns : nc) += 1;
  }
  ASSERT_GT(ns, 0u);
  EXPECT_GT(stress / static_cast<double>(ns), calm / static_cast<double>(nc));
}

TEST(Simulate, RegimeFrequencyNearStationary) {
  SimConfig c = small(200, 2);
  const SimOutput s = simulate(c);
  const double pi = c.p_calm_to_stress / (c.p_calm_to_stress + c.p_stress_to_calm);
  double k = 0;
  for (bool b : s.true_regime) k += b;
  const double n = static_cast<double>(s.true_regime.size());
  const double freq = k / n;
  // Markov-chain standard error with lag-one autocorrelation rho.
  const double rho = 1.0 - c.p_calm_to_stress - c.p_stress_to_calm;
  const double se = std::sqrt(pi * (1 - pi) / n * (1 + rho) / (1 - rho));
  EXPECT_LT(std::fabs(freq - pi), 3.0 * se);
}

TEST(Simulate, InvalidConfigNamesField) {
  SimConfig c = small();
  c.p_calm_to_stress = 1.5;
  try {
    simulate(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("p_calm_to_stress"), std::string::npos) << e.what();
  }
  c = small();
  c.n_stocks = 1;
  EXPECT_THROW(simulate(c), ConfigError);
  c = small();
  c.calm.dispersion = 0.0;
  EXPECT_THROW(simulate(c), ConfigError);
}
