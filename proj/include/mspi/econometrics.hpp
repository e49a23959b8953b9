#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mspi/learners/logit.hpp"
#include "mspi/matrix.hpp"

namespace mspi {

struct RegressionResult {
  std::vector<std::string> names;  // one per column of the design
  std::vector<double> coef;
  std::vector<double> se;          // Newey-West standard errors
  Matrix cov;                      // HAC covariance of coef
  std::vector<double> fitted;
  std::vector<double> residuals;
  double r2 = 0.0;
  std::size_t n = 0;
  std::size_t hac_lag = 0;
  /// Columns removed as collinear (only with OlsOptions::drop_collinear);
  /// their coefficient and standard error are reported as 0.
  std::vector<std::string> dropped;

  double t_stat(std::size_t j) const;
  std::optional<std::size_t> index_of(const std::string& name) const;
};

struct OlsOptions {
  std::size_t hac_lag = 0;
  std::string dependent = "y";
  std::vector<std::string> names;  // default x0, x1, ...
  bool drop_collinear = false;
};

/// OLS by column-pivoted QR with a Newey-West (Bartlett, weights
/// 1 - l/(L+1)) covariance and no small-sample correction. The design must
/// already contain the intercept column. A rank-deficient design throws
/// NumericError naming the dependent variable unless drop_collinear is set.
RegressionResult ols_hac(std::span<const double> y, const Matrix& X, const OlsOptions& options);

/// (1/n) sum e_t^2 x_t x_t' plus Bartlett-weighted autocovariances, sandwiched
/// by (X'X/n)^{-1}, divided by n.
Matrix hac_covariance(const Matrix& X, std::span<const double> residuals, std::size_t lag);

/// Design with a leading intercept column and the given columns. `rows`
/// sizes the intercept-only design when there are no columns.
Matrix design_with_intercept(const std::vector<std::span<const double>>& columns,
                             std::size_t rows = 0);

struct PredictiveRegression {
  RegressionResult full;                       // next_vol on [1, mspi, controls]
  std::optional<RegressionResult> controls_only;
  double delta_r2 = 0.0;
};

/// sigma_{t+1} = a + g * MSPI_t + phi' Z_t. `controls` has one row per month
/// and may have zero columns.
PredictiveRegression predictive_vol_regression(std::span<const double> mspi,
                                               std::span<const double> next_vol,
                                               const Matrix& controls,
                                               const std::vector<std::string>& control_names,
                                               std::size_t hac_lag);

struct CrashRegression {
  RegressionResult linear_probability;
  std::optional<LogitModel> logistic;  // skipped for a single-class indicator
  std::vector<std::string> names;
  std::size_t crashes = 0;
  std::string warning;
};

/// Crash_{t+1} = 1{R_{t+1} <= cutoff} on [1, MSPI_t, Z_t].
CrashRegression crash_regression(std::span<const double> mspi, std::span<const double> next_ret,
                                 const Matrix& controls,
                                 const std::vector<std::string>& control_names, double cutoff,
                                 std::size_t hac_lag);

struct InnovationSeries {
  /// Indices t = 1 .. n-1 of the input months that carry u_t.
  std::vector<std::size_t> index;
  std::vector<double> fitted;
  std::vector<double> residual;
  RegressionResult regression;
};

/// MSPI_t = d0 + d1 MSPI_{t-1} + D' Z_{t-1} + u_t, for t >= 1. Collinear
/// regressors (e.g. a constant MSPI) are dropped so u is still defined.
InnovationSeries mspi_innovations(std::span<const double> mspi, const Matrix& controls,
                                  const std::vector<std::string>& control_names,
                                  std::size_t hac_lag);

struct ProjectionHorizon {
  std::size_t h = 0;
  double b = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::size_t hac_lag = 0;
};

struct LocalProjectionResult {
  std::vector<ProjectionHorizon> horizons;
  std::vector<std::string> warnings;
};

/// y_{t+h} = a_h + b_h u_t + G_h' W_{t-1} for t = 0 .. N0-1-h. `y` is aligned
/// with `u` (y[t] is the outcome in u's month t) and may run past u's end;
/// only t + h <= N0 - 1 is used, so N_h = N0 - h. Row t of `lagged_controls`
/// holds W_{t-1}. HAC lag is h + hac_offset. A horizon that leaves no more
/// rows than regressors is omitted with a warning.
LocalProjectionResult local_projections(std::span<const double> u, std::span<const double> y,
                                        const Matrix& lagged_controls, std::size_t max_horizon,
                                        std::size_t hac_offset = 1);

}  // namespace mspi
