#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mspi/learners/tree.hpp"
#include "mspi/matrix.hpp"

namespace mspi {

struct BoostParams {
  std::size_t n_stages = 100;  // M
  double shrinkage = 0.1;      // nu; 0 is accepted as a test hook
  std::size_t max_depth = 2;
  std::size_t min_leaf = 5;
};

/// F_M(x) = F_0 + nu * sum_m h_m(x) for the Bernoulli log-likelihood.
struct BoostModel {
  double f0 = 0.0;
  std::vector<Tree> trees;
  BoostParams params;
  std::size_t n_features = 0;
  /// Mean training log loss after each stage; entry 0 is for F_0.
  std::vector<double> train_loss;
};

/// Gradient boosting with least-squares trees on the residual y - p and
/// one Newton step per leaf. A leaf step that would raise that leaf's loss
/// is halved until it does not, so train_loss never increases.
BoostModel fit_gradient_boosting(const Matrix& X, std::span<const int> y,
                                 const BoostParams& params);

/// Raw boosted score F_M(x) on the log-odds scale.
double gb_score(const BoostModel& model, std::span<const double> x);

}  // namespace mspi
