#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mspi/matrix.hpp"

namespace mspi {

inline constexpr double kProbClamp = 1e-12;

/// Lambda(z) = 1 / (1 + exp(-z)), evaluated without overflow.
double sigmoid(double z);
double logit(double p);
double clamp_probability(double p);

enum class Penalty { l1, l2 };

struct LogitModel {
  double intercept = 0.0;
  std::vector<double> coef;
  Penalty penalty = Penalty::l1;
  double lambda = 0.0;
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  /// Single-class training targets: intercept is the Laplace-smoothed base
  /// rate logit((k + 1) / (n + 2)) and every coefficient is zero.
  bool base_rate_fallback = false;

  std::size_t num_nonzero() const;
};

struct LogitOptions {
  std::size_t max_iter = 10000;
  /// Stop when the sup-norm of the (proximal) gradient falls below this.
  double tol = 1e-10;
  /// Starting point; defaults to intercept = logit(mean y), coef = 0.
  std::optional<double> init_intercept;
  std::optional<std::vector<double>> init_coef;
};

/// Mean negative Bernoulli log-likelihood plus penalty; the intercept is
/// never penalized. Penalty::l1 adds lambda * sum|b|, l2 adds lambda * sum b^2.
double logit_objective(const Matrix& X, std::span<const int> y, double intercept,
                       std::span<const double> coef, Penalty penalty, double lambda);

/// Lasso-logit by accelerated proximal gradient (FISTA) with backtracking
/// and adaptive restart; soft-thresholding on the slopes only.
LogitModel fit_logit_l1(const Matrix& X, std::span<const int> y, double lambda,
                        const LogitOptions& options = {});

/// Ridge-logit by damped Newton-Raphson. lambda = 0 gives the unpenalized MLE.
LogitModel fit_logit_l2(const Matrix& X, std::span<const int> y, double lambda,
                        const LogitOptions& options = {});

/// Lambda(intercept + x . coef), clamped to [1e-12, 1 - 1e-12].
double predict_proba(const LogitModel& model, std::span<const double> x);
double linear_predictor(const LogitModel& model, std::span<const double> x);

/// Base-rate model used when y has a single class.
LogitModel base_rate_model(std::span<const int> y, std::size_t n_features, Penalty penalty,
                           double lambda);

}  // namespace mspi
