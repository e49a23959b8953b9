#include "mspi/learners/logit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mspi/error.hpp"

namespace mspi {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double clamp_probability(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

std::size_t LogitModel::num_nonzero() const {
  return static_cast<std::size_t>(std::count_if(coef.begin(), coef.end(),
                                                [](double b) { return b != 0.0; }));
}

namespace {

// log(1 + e^z)
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

void check_inputs(const Matrix& X, std::span<const int> y, double lambda, const char* who) {
  if (X.rows() != y.size())
    throw DataError(fmt::format("{}: {} rows but {} targets", who, X.rows(), y.size()));
  if (X.rows() == 0) throw DataError(fmt::format("{}: empty training set", who));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError(fmt::format("{}: lambda must be finite and >= 0", who));
  for (int v : y)
    if (v != 0 && v != 1) throw DataError(fmt::format("{}: targets must be 0/1", who));
  for (double v : X.data())
    if (!std::isfinite(v)) throw DataError(fmt::format("{}: non-finite feature value", who));
}

bool single_class(std::span<const int> y) {
  return std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; });
}

double mean_of(std::span<const int> y) {
  double s = 0.0;
  for (int v : y) s += v;
  return s / static_cast<double>(y.size());
}

// Mean loss and its gradient w.r.t. (intercept, coef) at w = [b0, b...].
double smooth_loss(const Matrix& X, std::span<const int> y, const std::vector<double>& w,
                   std::vector<double>* grad) {
  const std::size_t n = X.rows(), p = X.cols();
  double loss = 0.0;
  if (grad) grad->assign(p + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = X.row(i);
    double z = w[0];
    for (std::size_t j = 0; j < p; ++j) z += x[j] * w[j + 1];
    loss += softplus(z) - y[i] * z;
    if (grad) {
      const double r = sigmoid(z) - y[i];
      (*grad)[0] += r;
      for (std::size_t j = 0; j < p; ++j) (*grad)[j + 1] += r * x[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad)
    for (auto& g : *grad) g *= inv_n;
  return loss * inv_n;
}

double penalty_value(const std::vector<double>& w, Penalty penalty, double lambda) {
  double s = 0.0;
  for (std::size_t j = 1; j < w.size(); ++j) s += penalty == Penalty::l1 ? std::fabs(w[j]) : w[j] * w[j];
  return lambda * s;
}

std::vector<double> starting_point(std::span<const int> y, std::size_t p,
                                   const LogitOptions& options) {
  std::vector<double> w(p + 1, 0.0);
  w[0] = options.init_intercept ? *options.init_intercept : logit(mean_of(y));
  if (options.init_coef) {
    if (options.init_coef->size() != p)
      throw DataError("logit: init_coef has the wrong dimension");
    std::copy(options.init_coef->begin(), options.init_coef->end(), w.begin() + 1);
  }
  return w;
}

LogitModel finish(const std::vector<double>& w, Penalty penalty, double lambda,
                  std::size_t iterations, double objective, bool converged) {
  LogitModel m;
  m.intercept = w[0];
  m.coef.assign(w.begin() + 1, w.end());
  m.penalty = penalty;
  m.lambda = lambda;
  m.iterations = iterations;
  m.objective = objective;
  m.converged = converged;
  for (double v : w)
    if (!std::isfinite(v)) throw NumericError("logit: non-finite coefficient");
  return m;
}

}  // namespace

double logit_objective(const Matrix& X, std::span<const int> y, double intercept,
                       std::span<const double> coef, Penalty penalty, double lambda) {
  std::vector<double> w(coef.size() + 1);
  w[0] = intercept;
  std::copy(coef.begin(), coef.end(), w.begin() + 1);
  return smooth_loss(X, y, w, nullptr) + penalty_value(w, penalty, lambda);
}

LogitModel base_rate_model(std::span<const int> y, std::size_t n_features, Penalty penalty,
                           double lambda) {
  double k = 0.0;
  for (int v : y) k += v;
  const double p = (k + 1.0) / (static_cast<double>(y.size()) + 2.0);
  LogitModel m;
  m.intercept = logit(p);
  m.coef.assign(n_features, 0.0);
  m.penalty = penalty;
  m.lambda = lambda;
  m.converged = true;
  m.base_rate_fallback = true;
  return m;
}

LogitModel fit_logit_l1(const Matrix& X, std::span<const int> y, double lambda,
                        const LogitOptions& options) {
  check_inputs(X, y, lambda, "fit_logit_l1");
  const std::size_t p = X.cols();
  if (single_class(y)) return base_rate_model(y, p, Penalty::l1, lambda);

  auto prox = [&](std::vector<double>& v, double step) {
    const double t = lambda * step;
    for (std::size_t j = 1; j < v.size(); ++j) {
      const double a = std::fabs(v[j]) - t;
      v[j] = a > 0.0 ? std::copysign(a, v[j]) : 0.0;
    }
  };

  std::vector<double> x = starting_point(y, p, options);
  std::vector<double> yv = x, x_new(p + 1), grad, grad_new;
  double objective = smooth_loss(X, y, x, nullptr) + penalty_value(x, Penalty::l1, lambda);
  double lipschitz = 0.05;
  double theta = 1.0;
  bool converged = false;
  std::size_t iter = 0;

  for (; iter < options.max_iter; ++iter) {
    const double f_y = smooth_loss(X, y, yv, &grad);
    double f_new = 0.0;
    double residual = 0.0;
    for (;;) {
      for (std::size_t j = 0; j <= p; ++j) x_new[j] = yv[j] - grad[j] / lipschitz;
      prox(x_new, 1.0 / lipschitz);
      f_new = smooth_loss(X, y, x_new, nullptr);
      double lin = 0.0, sq = 0.0;
      residual = 0.0;
      for (std::size_t j = 0; j <= p; ++j) {
        const double d = x_new[j] - yv[j];
        lin += grad[j] * d;
        sq += d * d;
        residual = std::max(residual, std::fabs(d));
      }
      const double excess = f_new - (f_y + lin + 0.5 * lipschitz * sq);
      if (excess <= 0.0) break;
      // Function values are noise at this step size; test the gradient bound instead.
      if (excess <= 1e-12 * std::fabs(f_y)) {
        smooth_loss(X, y, x_new, &grad_new);
        double curv = 0.0;
        for (std::size_t j = 0; j <= p; ++j) curv += (grad_new[j] - grad[j]) * (x_new[j] - yv[j]);
        if (curv <= lipschitz * sq) break;
      }
      lipschitz *= 2.0;
      if (!std::isfinite(lipschitz)) throw NumericError("fit_logit_l1: line search failed");
    }
    residual *= lipschitz;
    const double obj_new = f_new + penalty_value(x_new, Penalty::l1, lambda);
    if (!std::isfinite(obj_new))
      throw NumericError(fmt::format("fit_logit_l1: non-finite objective at iteration {}", iter));

    // Momentum with restart whenever the objective rises.
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const bool plain_step = theta == 1.0 && yv == x;
    if (obj_new > objective && !plain_step) {
      theta = 1.0;
      yv = x;  // retry from the last accepted point without momentum
      continue;
    }
    // A plain proximal step is a descent step; any rise is rounding near the optimum.
    const double beta = (theta - 1.0) / theta_next;
    for (std::size_t j = 0; j <= p; ++j) yv[j] = x_new[j] + beta * (x_new[j] - x[j]);
    theta = theta_next;
    x = x_new;
    objective = obj_new;
    if (residual <= options.tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  return finish(x, Penalty::l1, lambda, iter, objective, converged);
}

LogitModel fit_logit_l2(const Matrix& X, std::span<const int> y, double lambda,
                        const LogitOptions& options) {
  check_inputs(X, y, lambda, "fit_logit_l2");
  const std::size_t n = X.rows(), p = X.cols();
  if (single_class(y)) return base_rate_model(y, p, Penalty::l2, lambda);

  std::vector<double> w = starting_point(y, p, options);
  auto total = [&](const std::vector<double>& v, std::vector<double>* g) {
    double f = smooth_loss(X, y, v, g) + penalty_value(v, Penalty::l2, lambda);
    if (g)
      for (std::size_t j = 1; j <= p; ++j) (*g)[j] += 2.0 * lambda * v[j];
    return f;
  };

  std::vector<double> grad;
  double objective = total(w, &grad);
  bool converged = false;
  std::size_t iter = 0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (; iter < options.max_iter; ++iter) {
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax <= options.tol) {
      converged = true;
      break;
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p + 1),
                                              static_cast<Eigen::Index>(p + 1));
    Eigen::VectorXd xt(static_cast<Eigen::Index>(p + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = X.row(i);
      double z = w[0];
      for (std::size_t j = 0; j < p; ++j) z += x[j] * w[j + 1];
      const double pr = sigmoid(z);
      xt(0) = 1.0;
      for (std::size_t j = 0; j < p; ++j) xt(static_cast<Eigen::Index>(j + 1)) = x[j];
      H.selfadjointView<Eigen::Lower>().rankUpdate(xt, pr * (1.0 - pr) * inv_n);
    }
    H = H.selfadjointView<Eigen::Lower>();
    for (std::size_t j = 1; j <= p; ++j)
      H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += 2.0 * lambda;
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(),
                                                          static_cast<Eigen::Index>(p + 1));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) break;

    // Step halving until the objective does not increase.
    double t = 1.0;
    std::vector<double> trial(p + 1);
    double f_trial = objective;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      for (std::size_t j = 0; j <= p; ++j)
        trial[j] = w[j] - t * step(static_cast<Eigen::Index>(j));
      f_trial = total(trial, nullptr);
      if (std::isfinite(f_trial) && f_trial <= objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      converged = true;  // no descent left at working precision
      break;
    }
    const bool stalled = f_trial == objective;
    w = trial;
    objective = total(w, &grad);
    if (stalled) {
      converged = true;
      ++iter;
      break;
    }
  }
  return finish(w, Penalty::l2, lambda, iter, objective, converged);
}

double linear_predictor(const LogitModel& model, std::span<const double> x) {
  if (x.size() != model.coef.size())
    throw DataError(fmt::format("predict_proba: row has {} features, model expects {}", x.size(),
                                model.coef.size()));
  double z = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) z += x[j] * model.coef[j];
  return z;
}

double predict_proba(const LogitModel& model, std::span<const double> x) {
  return clamp_probability(sigmoid(linear_predictor(model, x)));
}

}  // namespace mspi
