#include "mspi/learners/standardize.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mspi/error.hpp"

namespace mspi {

StandardizationParams standardize_fit(const Matrix& X) {
  if (X.rows() < 2) throw DataError("standardize_fit: need at least 2 training rows");
  StandardizationParams p;
  const double n = static_cast<double>(X.rows());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    double mean = 0.0;
    bool constant = true;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      if (!std::isfinite(X(r, c)))
        throw DataError(fmt::format("standardize_fit: non-finite value in column {}", c));
      mean += X(r, c);
      if (X(r, c) != X(0, c)) constant = false;
    }
    mean /= n;
    double ss = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) ss += (X(r, c) - mean) * (X(r, c) - mean);
    const double sd = std::sqrt(ss / n);
    if (constant || !(sd > 0.0)) {
      p.dropped.push_back(c);
      continue;
    }
    p.retained.push_back(c);
    p.mean.push_back(mean);
    p.sd.push_back(sd);
  }
  if (p.retained.empty()) throw DataError("standardize_fit: every feature has zero variance");
  return p;
}

std::vector<double> standardize_apply(const StandardizationParams& params,
                                      std::span<const double> x) {
  if (x.size() != params.input_dim())
    throw DataError(fmt::format("standardize_apply: row has {} values, expected {}", x.size(),
                                params.input_dim()));
  std::vector<double> z(params.retained.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    z[k] = (x[params.retained[k]] - params.mean[k]) / params.sd[k];
  return z;
}

Matrix standardize_apply(const StandardizationParams& params, const Matrix& X) {
  Matrix out(X.rows(), params.output_dim());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto z = standardize_apply(params, X.row(r));
    for (std::size_t k = 0; k < z.size(); ++k) out(r, k) = z[k];
  }
  return out;
}

}  // namespace mspi
