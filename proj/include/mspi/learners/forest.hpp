#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mspi/learners/tree.hpp"
#include "mspi/matrix.hpp"

namespace mspi {

struct ForestParams {
  std::size_t n_trees = 500;
  std::size_t max_depth = 8;  // 0 = unlimited
  std::size_t min_leaf = 5;
  /// Features tried per split; 0 means ceil(sqrt(p)).
  std::size_t features_per_split = 0;
  /// Test hook: grow every tree on the full training set.
  bool bootstrap = true;
};

/// Random forest of Gini classification trees. Leaves hold the stress
/// frequency of their (bootstrap-weighted) training rows.
struct ForestModel {
  std::vector<Tree> trees;
  ForestParams params;
  std::size_t features_per_split = 0;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
};

/// Tree b draws from Rng::stream(seed, b), so the fitted forest is
/// bit-identical for any thread count. Both classes must be present.
ForestModel fit_random_forest(const Matrix& X, std::span<const int> y,
                              const ForestParams& params, std::uint64_t seed,
                              unsigned threads = 1);

/// Mean of the trees' leaf frequencies, in [0, 1].
double rf_score(const ForestModel& model, std::span<const double> x);

}  // namespace mspi
