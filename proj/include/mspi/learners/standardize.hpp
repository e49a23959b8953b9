#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mspi/matrix.hpp"

namespace mspi {

/// Per-feature z-score parameters estimated on one training window.
/// Population (divide-by-n) standard deviation. Zero-variance columns are
/// dropped; `retained` lists the surviving input columns in order.
struct StandardizationParams {
  std::vector<std::size_t> retained;
  std::vector<std::size_t> dropped;
  std::vector<double> mean;  // one per retained column
  std::vector<double> sd;    // one per retained column, > 0

  std::size_t input_dim() const { return retained.size() + dropped.size(); }
  std::size_t output_dim() const { return retained.size(); }
};

/// Needs >= 2 rows; throws DataError when every column is constant.
StandardizationParams standardize_fit(const Matrix& X);
std::vector<double> standardize_apply(const StandardizationParams& params,
                                      std::span<const double> x);
Matrix standardize_apply(const StandardizationParams& params, const Matrix& X);

}  // namespace mspi
