#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mspi/bootstrap.hpp"
#include "mspi/error.hpp"
#include "mspi/evaluation.hpp"
#include "mspi/rng.hpp"
#include "oracles/oracles.hpp"

using namespace mspi;

namespace {

struct Fixture {
  std::vector<double> s;
  std::vector<int> y;
};

Fixture random_fixture(Rng& rng, std::size_t n, double rate, int levels = 0) {
  Fixture f;
  while (true) {
    f.s.clear();
    f.y.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const int yi = rng.uniform() < rate;
      double s = rng.normal() + 0.8 * yi;
      if (levels > 0) s = std::round(s * levels) / levels;  // force ties
      f.s.push_back(s);
      f.y.push_back(yi);
    }
    const int k = std::accumulate(f.y.begin(), f.y.end(), 0);
    if (k > 0 && k < static_cast<int>(n)) return f;
  }
}

// ECE fixture: probs = rank / 20, y = 1 iff prob > 0.5.
Fixture ece_fixture() {
  Fixture f;
  for (int r = 1; r <= 20; ++r) {
    f.s.push_back(r / 20.0);
    f.y.push_back(r > 10);
  }
  return f;
}

}  // namespace

TEST(Auc, Examples) {
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 1}), 0.5);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.8, 0.7}, std::vector<int>{1, 0, 1}), 0.5);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetric);
}

TEST(Auc, PairCountingAgreesWithTrapezoid) {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = random_fixture(rng, 5 + rng.index(300), 0.3, rep % 2 ? 4 : 0);
    const double a = auc(f.s, f.y);
    EXPECT_NEAR(a, oracle::auc_pairs(f.s, f.y), 1e-12);
    EXPECT_NEAR(a, trapezoid_area(roc_points(f.s, f.y)), 1e-12);
  }
}

TEST(Auc, RocCurveShape) {
  Rng rng(2);
  const auto f = random_fixture(rng, 1000, 0.2, 10);
  const auto roc = roc_points(f.s, f.y);
  EXPECT_EQ(roc.front().x, 0.0);
  EXPECT_EQ(roc.front().y, 0.0);
  EXPECT_EQ(roc.back().x, 1.0);
  EXPECT_EQ(roc.back().y, 1.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    EXPECT_GE(roc[i].x, roc[i - 1].x);
    EXPECT_GE(roc[i].y, roc[i - 1].y);
  }
  const auto ties = roc_points(std::vector<double>(5, 0.4), std::vector<int>{1, 0, 0, 1, 0});
  ASSERT_EQ(ties.size(), 2u);
  EXPECT_EQ(trapezoid_area(ties), 0.5);
  const auto perfect = roc_points(std::vector<double>{0.9, 0.8, 0.2}, std::vector<int>{1, 1, 0});
  bool corner = false;
  for (const auto& p : perfect) corner |= p.x == 0.0 && p.y == 1.0;
  EXPECT_TRUE(corner);
}

TEST(PrAuc, Examples) {
  EXPECT_EQ(pr_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(pr_auc(std::vector<double>{0.9, 0.8}, std::vector<int>{0, 1}), 0.5);
  EXPECT_THROW(pr_auc(std::vector<double>{0.9}, std::vector<int>{0}), UndefinedMetric);
}

TEST(PrAuc, RandomScoresApproachEventRate) {
  Rng rng(3);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  double k = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = rng.uniform() < 0.15;
    k += y[i];
  }
  EXPECT_NEAR(pr_auc(s, y), k / 10000.0, 0.02);
  const auto pr = pr_points(s, y);
  EXPECT_EQ(pr.front().x, 0.0);
  EXPECT_EQ(pr.front().y, 1.0);
  EXPECT_EQ(pr.back().x, 1.0);
}

TEST(ProperScores, Examples) {
  const std::vector<int> y{1, 0, 0, 1};
  const std::vector<double> exact{1.0, 0.0, 0.0, 1.0};
  EXPECT_EQ(brier(exact, y), 0.0);
  EXPECT_NEAR(log_loss(exact, y), 1e-12, 1e-15);
  const std::vector<double> half(4, 0.5);
  EXPECT_EQ(brier(half, y), 0.25);
  EXPECT_NEAR(log_loss(half, y), 0.693147180559945, 1e-14);
  const std::vector<int> y5{1, 0, 0, 0, 0};
  EXPECT_NEAR(brier(std::vector<double>(5, 0.2), y5), 0.2 * 0.8, 1e-15);
  EXPECT_THROW(brier(half, std::vector<int>{1}), DataError);
}

TEST(Ece, Examples) {
  // Constant p equal to the event rate, one event in each bin of five.
  std::vector<int> y5(50, 0);
  for (std::size_t i = 0; i < 50; i += 5) y5[i] = 1;
  EXPECT_NEAR(ece(std::vector<double>(50, 0.2), y5, 10).value, 0.0, 1e-15);
  EXPECT_EQ(ece(std::vector<double>(10, 1.0), std::vector<int>(10, 0), 10).value, 1.0);
  const auto f = ece_fixture();
  const auto r = ece(f.s, f.y, 10);
  // Bin gaps are (3, 7, 11, 15, 19, 17, 13, 9, 5, 1) / 40, equal weights.
  EXPECT_DOUBLE_EQ(r.value, 0.25);
  ASSERT_EQ(r.points.size(), 10u);
  for (const auto& p : r.points) EXPECT_EQ(p.count, 2u);
  EXPECT_DOUBLE_EQ(r.points[0].mean_prob, 0.075);
  EXPECT_EQ(ece_from_points(r.points), r.value);
  EXPECT_THROW(ece(f.s, f.y, 21), DataError);
}

TEST(Ece, RemainderGoesToLowestBins) {
  std::vector<double> p(23);
  std::vector<int> y(23, 0);
  for (std::size_t i = 0; i < 23; ++i) p[i] = static_cast<double>(i) / 23.0;
  const auto r = ece(p, y, 10);
  std::size_t total = 0;
  for (std::size_t b = 0; b < 10; ++b) {
    EXPECT_EQ(r.points[b].count, b < 3 ? 3u : 2u);
    total += r.points[b].count;
  }
  EXPECT_EQ(total, 23u);
}

TEST(Metrics, RangesAndModelMetrics) {
  Rng rng(5);
  const auto f = random_fixture(rng, 200, 0.25);
  std::vector<double> prob(f.s.size());
  for (std::size_t i = 0; i < prob.size(); ++i) prob[i] = 1.0 / (1.0 + std::exp(-f.s[i]));
  const auto m = model_metrics("x", f.s, prob, f.y, 10);
  EXPECT_EQ(m.auc, auc(f.s, f.y));
  EXPECT_EQ(m.brier, brier(prob, f.y));
  for (double v : {m.auc, m.pr_auc, m.brier, m.ece, m.mean_prob}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_GE(m.log_loss, 0.0);
}

TEST(Bins, BoundaryConventions) {
  const auto edges = default_bin_edges();
  EXPECT_EQ(edges, (std::vector<double>{0.0, 0.05, 0.10, 0.20, 0.40, 1.0}));
  const std::vector<double> p{0.0, 0.05, 0.0999, 0.2, 0.4, 1.0};
  const std::vector<int> y{0, 1, 0, 1, 1, 1};
  const std::vector<double> vol{0.1, 0.2, 0.3, NAN, 0.5, 0.6}, ret(6, 0.01);
  const auto b = binned_outcomes(p, y, vol, ret, edges);
  ASSERT_EQ(b.size(), 5u);
  EXPECT_EQ(b[0].n, 1u);
  EXPECT_EQ(b[1].n, 2u);  // 0.05 and 0.0999
  EXPECT_EQ(b[2].n, 0u);
  EXPECT_TRUE(std::isnan(b[2].stress_rate));
  EXPECT_EQ(b[3].n, 1u);
  EXPECT_TRUE(std::isnan(b[3].mean_next_vol));  // its only row has no next-month volatility
  EXPECT_EQ(b[3].stress_rate, 1.0);
  EXPECT_EQ(b[4].n, 2u);  // 0.4 and the closed upper edge
  EXPECT_DOUBLE_EQ(b[1].stress_rate, 0.5);
  EXPECT_DOUBLE_EQ(b[1].mean_next_vol, 0.25);
  EXPECT_DOUBLE_EQ(b[4].mean_next_vol, 0.55);
}

TEST(Bins, EdgeValidation) {
  EXPECT_THROW(validate_bin_edges(std::vector<double>{0.0, 0.5, 0.5, 1.0}), ConfigError);
  EXPECT_THROW(validate_bin_edges(std::vector<double>{0.1, 1.0}), ConfigError);
  EXPECT_THROW(validate_bin_edges(std::vector<double>{0.0, 0.9}), ConfigError);
  EXPECT_NO_THROW(validate_bin_edges(std::vector<double>{0.0, 1.0}));
}

// ---- block bootstrap

TEST(Bootstrap, ResampleShape) {
  const auto idx = block_resample(50, 12, 7, 3, 0);
  ASSERT_EQ(idx.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_LT(idx[i], 50u);
    if (i % 12 != 0) EXPECT_EQ(idx[i], idx[i - 1] + 1);
  }
  EXPECT_EQ(idx, block_resample(50, 12, 7, 3, 0));
  EXPECT_NE(idx, block_resample(50, 12, 7, 3, 1));
  EXPECT_NE(idx, block_resample(50, 12, 7, 4, 0));
}

TEST(Bootstrap, Percentile) {
  EXPECT_EQ(percentile({1, 2, 3, 4, 5}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 0.025), 1.1);
  EXPECT_EQ(percentile({5, 1, 3}, 1.0), 5.0);
}

TEST(Bootstrap, SelfComparisonIsDegenerate) {
  Rng rng(9);
  const auto f = random_fixture(rng, 120, 0.25);
  ScoredSeries s{f.s, {}};
  for (double v : f.s) s.prob.push_back(1.0 / (1.0 + std::exp(-v)));
  BootstrapOptions o;
  o.reps = 300;
  for (Metric m : all_metrics()) {
    const auto r = block_bootstrap_diff(s, s, f.y, m, o);
    EXPECT_EQ(r.delta, 0.0) << metric_name(m);
    EXPECT_EQ(r.ci_lo, 0.0);
    EXPECT_EQ(r.ci_hi, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
  }
}

TEST(Bootstrap, DeterministicAndThreadIndependent) {
  Rng rng(10);
  const auto f = random_fixture(rng, 150, 0.2);
  ScoredSeries a{f.s, {}}, b{{}, {}};
  for (double v : f.s) {
    a.prob.push_back(1.0 / (1.0 + std::exp(-v)));
    const double w = v + rng.normal();
    b.raw.push_back(w);
    b.prob.push_back(1.0 / (1.0 + std::exp(-w)));
  }
  BootstrapOptions o;
  o.reps = 400;
  const auto r1 = block_bootstrap_diff(a, b, f.y, Metric::auc, o);
  o.threads = 3;
  const auto r2 = block_bootstrap_diff(a, b, f.y, Metric::auc, o);
  EXPECT_EQ(r1.delta, r2.delta);
  EXPECT_EQ(r1.ci_lo, r2.ci_lo);
  EXPECT_EQ(r1.ci_hi, r2.ci_hi);
  EXPECT_EQ(r1.p_value, r2.p_value);
  EXPECT_LE(r1.ci_lo, r1.delta);
  EXPECT_GE(r1.ci_hi, r1.delta);
  EXPECT_GT(r1.delta, 0.0);
  EXPECT_GE(r1.p_value, 0.0);
  EXPECT_LE(r1.p_value, 1.0);
}

TEST(Bootstrap, RareOutcomeRedrawsThenFails) {
  std::vector<int> y(60, 0);
  y[5] = 1;
  std::vector<double> s(60);
  for (std::size_t i = 0; i < 60; ++i) s[i] = static_cast<double>(i);
  ScoredSeries a{s, std::vector<double>(60, 0.3)};
  BootstrapOptions o;
  o.reps = 200;
  // Most resamples of one positive month in 60 miss it.
  o.block_len = 12;
  EXPECT_THROW(block_bootstrap_diff(a, a, y, Metric::auc, o), DataError);
  y[40] = 1;
  y[20] = 1;
  const auto r = block_bootstrap_diff(a, a, y, Metric::auc, o);
  EXPECT_GT(r.redraws, 0u);
  EXPECT_LE(r.redraws, o.reps);
}

TEST(Bootstrap, OptionValidation) {
  BootstrapOptions o;
  o.block_len = 0;
  EXPECT_THROW(o.validate(), ConfigError);
  o = {};
  o.reps = 0;
  EXPECT_THROW(o.validate(), ConfigError);
  Rng rng(1);
  const auto f = random_fixture(rng, 10, 0.5);
  ScoredSeries a{f.s, std::vector<double>(10, 0.5)};
  EXPECT_THROW(block_bootstrap_diff(a, a, f.y, Metric::auc, BootstrapOptions{}), DataError);
}
