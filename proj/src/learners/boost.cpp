#include "mspi/learners/boost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mspi/error.hpp"
#include "mspi/learners/logit.hpp"

namespace mspi {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double mean_log_loss(std::span<const double> F, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) s += softplus(F[i]) - y[i] * F[i];
  return s / static_cast<double>(F.size());
}

}  // namespace

BoostModel fit_gradient_boosting(const Matrix& X, std::span<const int> y,
                                 const BoostParams& params) {
  if (X.rows() != y.size() || X.rows() == 0)
    throw DataError("fit_gradient_boosting: feature rows and targets must match and be non-empty");
  if (!(params.shrinkage >= 0.0 && params.shrinkage <= 1.0))
    throw ConfigError("gradient boosting: shrinkage must lie in [0, 1]");
  if (params.max_depth == 0) throw ConfigError("gradient boosting: max_depth must be >= 1");
  if (params.min_leaf == 0) throw ConfigError("gradient boosting: min_leaf must be >= 1");
  double positives = 0.0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("fit_gradient_boosting: targets must be 0/1");
    positives += v;
  }
  const std::size_t n = X.rows();
  if (positives == 0.0 || positives == static_cast<double>(n))
    throw DataError("fit_gradient_boosting: training targets contain a single class");

  BoostModel model;
  model.params = params;
  model.n_features = X.cols();
  model.f0 = logit(positives / static_cast<double>(n));

  std::vector<double> F(n, model.f0), residual(n);
  model.train_loss.push_back(mean_log_loss(F, y));

  TreeGrowth growth;
  growth.max_depth = params.max_depth;
  growth.min_leaf = params.min_leaf;
  growth.criterion = SplitCriterion::squared_error;
  const double nu = params.shrinkage;

  const LeafValueFn newton_leaf = [&](std::span<const std::size_t> rows) {
    double num = 0.0, den = 0.0;
    for (std::size_t r : rows) {
      const double p = sigmoid(F[r]);
      num += y[r] - p;
      den += p * (1.0 - p);
    }
    double step = num / std::max(den, 1e-12);
    auto leaf_loss = [&](double c) {
      double s = 0.0;
      for (std::size_t r : rows) {
        const double z = F[r] + nu * c;
        s += softplus(z) - y[r] * z;
      }
      return s;
    };
    const double base = leaf_loss(0.0);
    for (int k = 0; k < 60; ++k, step *= 0.5)
      if (leaf_loss(step) <= base) return step;
    return 0.0;
  };

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  model.trees.reserve(params.n_stages);
  for (std::size_t m = 0; m < params.n_stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - sigmoid(F[i]);
    Tree tree = grow_tree(X, residual, all, growth, newton_leaf);
    for (std::size_t i = 0; i < n; ++i) F[i] += nu * tree.predict(X.row(i));
    const double loss = mean_log_loss(F, y);
    if (!std::isfinite(loss))
      throw NumericError(fmt::format("gradient boosting: non-finite loss at stage {}", m + 1));
    model.train_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double gb_score(const BoostModel& model, std::span<const double> x) {
  if (x.size() != model.n_features)
    throw DataError(fmt::format("gb_score: row has {} features, model expects {}", x.size(),
                                model.n_features));
  double f = model.f0;
  for (const Tree& t : model.trees) f += model.params.shrinkage * t.predict(x);
  return f;
}

}  // namespace mspi
