#include "mspi/econometrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mspi/error.hpp"

namespace mspi {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& X) {
  MatrixXd m(static_cast<Index>(X.rows()), static_cast<Index>(X.cols()));
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t c = 0; c < X.cols(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = X(r, c);
  return m;
}

Matrix from_eigen(const MatrixXd& m) {
  Matrix X(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) X(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
  return X;
}

Matrix select_columns(const Matrix& X, const std::vector<std::size_t>& cols) {
  Matrix out(X.rows(), cols.size());
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t k = 0; k < cols.size(); ++k) out(r, k) = X(r, cols[k]);
  return out;
}

std::vector<double> column(const Matrix& X, std::size_t c) {
  std::vector<double> v(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) v[r] = X(r, c);
  return v;
}

void check_finite(std::span<const double> v, const std::string& what) {
  for (double x : v)
    if (!std::isfinite(x)) throw DataError(fmt::format("regression: non-finite value in {}", what));
}

}  // namespace

double RegressionResult::t_stat(std::size_t j) const { return se[j] > 0.0 ? coef[j] / se[j] : 0.0; }

std::optional<std::size_t> RegressionResult::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return j;
  return std::nullopt;
}

Matrix hac_covariance(const Matrix& X, std::span<const double> residuals, std::size_t lag) {
  const std::size_t n = X.rows(), k = X.cols();
  const MatrixXd x = to_eigen(X);
  const VectorXd e = Eigen::Map<const VectorXd>(residuals.data(), static_cast<Index>(n));
  const MatrixXd xe = x.array().colwise() * e.array();  // rows are score contributions
  MatrixXd S = xe.transpose() * xe;
  for (std::size_t l = 1; l <= lag && l < n; ++l) {
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
    const Index m = static_cast<Index>(n - l);
    const MatrixXd G = xe.bottomRows(m).transpose() * xe.topRows(m);
    S += w * (G + G.transpose());
  }
  const MatrixXd XtX = x.transpose() * x;
  const MatrixXd inv = XtX.ldlt().solve(MatrixXd::Identity(static_cast<Index>(k), static_cast<Index>(k)));
  const MatrixXd V = inv * S * inv;
  const MatrixXd sym = 0.5 * (V + V.transpose());
  return from_eigen(sym);
}

RegressionResult ols_hac(std::span<const double> y, const Matrix& X, const OlsOptions& options) {
  const std::size_t n = X.rows(), k = X.cols();
  if (y.size() != n)
    throw DataError(fmt::format("regression of {}: {} outcomes but {} design rows",
                                options.dependent, y.size(), n));
  if (k == 0) throw DataError(fmt::format("regression of {}: empty design", options.dependent));
  check_finite(y, options.dependent);
  check_finite(X.data(), "the design of " + options.dependent);

  std::vector<std::string> names = options.names;
  if (names.empty())
    for (std::size_t j = 0; j < k; ++j) names.push_back(fmt::format("x{}", j));
  if (names.size() != k) throw DataError("regression: wrong number of column names");

  Eigen::ColPivHouseholderQR<MatrixXd> qr(to_eigen(X));
  // Relative threshold on |R_jj| so that columns equal up to rounding count
  // as collinear.
  qr.setThreshold(1e-10);
  const std::size_t rank = static_cast<std::size_t>(qr.rank());
  std::vector<std::size_t> keep(k);
  for (std::size_t j = 0; j < k; ++j) keep[j] = j;
  RegressionResult out;
  if (rank < k) {
    if (!options.drop_collinear)
      throw NumericError(fmt::format("regression of {}: design is rank deficient ({} of {} columns)",
                                     options.dependent, rank, k));
    keep.clear();
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t j = 0; j < rank; ++j) keep.push_back(static_cast<std::size_t>(perm(static_cast<Index>(j))));
    std::sort(keep.begin(), keep.end());
    for (std::size_t j = 0; j < k; ++j)
      if (!std::binary_search(keep.begin(), keep.end(), j)) out.dropped.push_back(names[j]);
  }
  if (n <= keep.size())
    throw DataError(fmt::format("regression of {}: {} rows for {} regressors", options.dependent, n,
                                keep.size()));

  const Matrix Xk = keep.size() == k ? X : select_columns(X, keep);
  const MatrixXd xk = to_eigen(Xk);
  const VectorXd yv = Eigen::Map<const VectorXd>(y.data(), static_cast<Index>(n));
  const VectorXd b = xk.colPivHouseholderQr().solve(yv);
  const VectorXd fit = xk * b;
  const VectorXd res = yv - fit;

  const Matrix V = hac_covariance(Xk, std::vector<double>(res.data(), res.data() + n), options.hac_lag);
  out.names = names;
  out.coef.assign(k, 0.0);
  out.se.assign(k, 0.0);
  out.cov = Matrix(k, k, 0.0);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    out.coef[keep[a]] = b(static_cast<Index>(a));
    out.se[keep[a]] = std::sqrt(std::max(0.0, V(a, a)));
    for (std::size_t c = 0; c < keep.size(); ++c) out.cov(keep[a], keep[c]) = V(a, c);
  }
  out.fitted.assign(fit.data(), fit.data() + n);
  out.residuals.assign(res.data(), res.data() + n);
  const double mean = yv.mean();
  const double tss = (yv.array() - mean).square().sum();
  const double rss = res.squaredNorm();
  out.r2 = tss > 0.0 ? 1.0 - rss / tss : (rss == 0.0 ? 1.0 : 0.0);
  out.n = n;
  out.hac_lag = options.hac_lag;
  return out;
}

Matrix design_with_intercept(const std::vector<std::span<const double>>& columns,
                             std::size_t rows) {
  const std::size_t n = columns.empty() ? rows : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw DataError("design: columns have different lengths");
  Matrix X(n, columns.size() + 1);
  for (std::size_t r = 0; r < n; ++r) {
    X(r, 0) = 1.0;
    for (std::size_t j = 0; j < columns.size(); ++j) X(r, j + 1) = columns[j][r];
  }
  return X;
}

namespace {

std::vector<std::span<const double>> with_controls(std::span<const double> first,
                                                   const std::vector<std::vector<double>>& cols) {
  std::vector<std::span<const double>> out{first};
  for (const auto& c : cols) out.emplace_back(c);
  return out;
}

std::vector<std::vector<double>> control_columns(const Matrix& controls, std::size_t n,
                                                 const std::vector<std::string>& names) {
  if (controls.cols() != 0 && controls.rows() != n)
    throw DataError(fmt::format("regression: {} control rows for {} months", controls.rows(), n));
  if (names.size() != controls.cols()) throw DataError("regression: wrong number of control names");
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < controls.cols(); ++j) cols.push_back(column(controls, j));
  return cols;
}

}  // namespace

PredictiveRegression predictive_vol_regression(std::span<const double> mspi,
                                               std::span<const double> next_vol,
                                               const Matrix& controls,
                                               const std::vector<std::string>& control_names,
                                               std::size_t hac_lag) {
  const std::size_t n = mspi.size();
  const auto cols = control_columns(controls, n, control_names);
  OlsOptions opt;
  opt.hac_lag = hac_lag;
  opt.dependent = "next_vol";
  opt.names = {"const", "mspi"};
  opt.names.insert(opt.names.end(), control_names.begin(), control_names.end());
  PredictiveRegression out;
  out.full = ols_hac(next_vol, design_with_intercept(with_controls(mspi, cols)), opt);
  OlsOptions base = opt;
  base.names.erase(base.names.begin() + 1);
  std::vector<std::span<const double>> only;
  for (const auto& c : cols) only.emplace_back(c);
  out.controls_only = ols_hac(next_vol, design_with_intercept(only, n), base);
  out.delta_r2 = out.full.r2 - out.controls_only->r2;
  return out;
}

CrashRegression crash_regression(std::span<const double> mspi, std::span<const double> next_ret,
                                 const Matrix& controls,
                                 const std::vector<std::string>& control_names, double cutoff,
                                 std::size_t hac_lag) {
  const std::size_t n = mspi.size();
  if (next_ret.size() != n) throw DataError("crash regression: series lengths differ");
  const auto cols = control_columns(controls, n, control_names);
  std::vector<double> crash(n);
  std::vector<int> crash_i(n);
  CrashRegression out;
  for (std::size_t t = 0; t < n; ++t) {
    crash_i[t] = next_ret[t] <= cutoff ? 1 : 0;
    crash[t] = crash_i[t];
    out.crashes += static_cast<std::size_t>(crash_i[t]);
  }
  out.names = {"const", "mspi"};
  out.names.insert(out.names.end(), control_names.begin(), control_names.end());
  const Matrix X = design_with_intercept(with_controls(mspi, cols));
  OlsOptions opt;
  opt.hac_lag = hac_lag;
  opt.dependent = "crash";
  opt.names = out.names;
  out.linear_probability = ols_hac(crash, X, opt);
  if (out.crashes == 0 || out.crashes == n) {
    out.warning = fmt::format("crash indicator at cutoff {} is single-class; logistic skipped", cutoff);
    return out;
  }
  // Logistic variant on the same regressors; the intercept is the model's own.
  Matrix Z(n, X.cols() - 1);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 1; j < X.cols(); ++j) Z(r, j - 1) = X(r, j);
  try {
    out.logistic = fit_logit_l2(Z, crash_i, 0.0);
    if (!out.logistic->converged) out.warning = "logistic crash regression did not converge";
  } catch (const NumericError& e) {
    out.warning = fmt::format("logistic crash regression failed: {}", e.what());
  }
  return out;
}

InnovationSeries mspi_innovations(std::span<const double> mspi, const Matrix& controls,
                                  const std::vector<std::string>& control_names,
                                  std::size_t hac_lag) {
  const std::size_t n = mspi.size();
  if (n < 2) throw DataError("innovations: need at least two months");
  const auto cols = control_columns(controls, n, control_names);
  const std::size_t m = n - 1;
  std::vector<double> y(mspi.begin() + 1, mspi.end());
  std::vector<double> lag(mspi.begin(), mspi.end() - 1);
  std::vector<std::vector<double>> lagged;
  for (const auto& c : cols) lagged.emplace_back(c.begin(), c.end() - 1);
  OlsOptions opt;
  opt.hac_lag = hac_lag;
  opt.dependent = "mspi";
  opt.names = {"const", "mspi_lag"};
  for (const auto& nm : control_names) opt.names.push_back(nm + "_lag");
  opt.drop_collinear = true;
  InnovationSeries out;
  out.regression = ols_hac(y, design_with_intercept(with_controls(lag, lagged)), opt);
  out.index.resize(m);
  for (std::size_t t = 0; t < m; ++t) out.index[t] = t + 1;
  out.fitted = out.regression.fitted;
  out.residual = out.regression.residuals;
  return out;
}

LocalProjectionResult local_projections(std::span<const double> u, std::span<const double> y,
                                        const Matrix& lagged_controls, std::size_t max_horizon,
                                        std::size_t hac_offset) {
  const std::size_t n0 = u.size();
  if (y.size() < n0) throw DataError("local projections: outcome shorter than the innovations");
  if (lagged_controls.cols() != 0 && lagged_controls.rows() != n0)
    throw DataError("local projections: control rows do not match the innovations");
  LocalProjectionResult out;
  const std::size_t k = 2 + lagged_controls.cols();
  for (std::size_t h = 0; h <= max_horizon; ++h) {
    if (h >= n0 || n0 - h <= k) {
      out.warnings.push_back(fmt::format("horizon {} omitted: {} usable months for {} regressors", h,
                                         h >= n0 ? 0 : n0 - h, k));
      continue;
    }
    const std::size_t nh = n0 - h;
    Matrix X(nh, k);
    std::vector<double> yy(nh);
    for (std::size_t t = 0; t < nh; ++t) {
      X(t, 0) = 1.0;
      X(t, 1) = u[t];
      for (std::size_t j = 0; j < lagged_controls.cols(); ++j) X(t, 2 + j) = lagged_controls(t, j);
      yy[t] = y[t + h];
    }
    OlsOptions opt;
    opt.hac_lag = h + hac_offset;
    opt.dependent = fmt::format("outcome at horizon {}", h);
    const RegressionResult r = ols_hac(yy, X, opt);
    out.horizons.push_back({h, r.coef[1], r.se[1], nh, opt.hac_lag});
  }
  return out;
}

}  // namespace mspi
