#include "mspi/learners/forest.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mspi/error.hpp"
#include "mspi/parallel.hpp"
#include "mspi/rng.hpp"

namespace mspi {

ForestModel fit_random_forest(const Matrix& X, std::span<const int> y,
                              const ForestParams& params, std::uint64_t seed, unsigned threads) {
  if (X.rows() != y.size() || X.rows() == 0)
    throw DataError("fit_random_forest: feature rows and targets must match and be non-empty");
  if (params.n_trees == 0) throw ConfigError("random forest: n_trees must be >= 1");
  if (params.min_leaf == 0) throw ConfigError("random forest: min_leaf must be >= 1");
  std::size_t positives = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("fit_random_forest: targets must be 0/1");
    positives += static_cast<std::size_t>(v);
  }
  if (positives == 0 || positives == y.size())
    throw DataError("fit_random_forest: training targets contain a single class");

  ForestModel model;
  model.params = params;
  model.seed = seed;
  model.n_features = X.cols();
  model.features_per_split =
      params.features_per_split != 0
          ? std::min(params.features_per_split, X.cols())
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));

  std::vector<double> target(y.begin(), y.end());
  TreeGrowth growth;
  growth.max_depth = params.max_depth;
  growth.min_leaf = params.min_leaf;
  growth.features_per_split = model.features_per_split;
  growth.criterion = SplitCriterion::gini;
  const LeafValueFn leaf_frequency = [&](std::span<const std::size_t> rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += target[r];
    return s / static_cast<double>(rows.size());
  };

  model.trees.resize(params.n_trees);
  const std::size_t n = X.rows();
  parallel_for(params.n_trees, threads, [&](std::size_t b) {
    Rng rng = Rng::stream(seed, b);
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = params.bootstrap ? rng.index(n) : i;
    model.trees[b] = grow_tree(X, target, std::move(sample), growth, leaf_frequency, &rng);
  });
  return model;
}

double rf_score(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features)
    throw DataError(fmt::format("rf_score: row has {} features, model expects {}", x.size(),
                                model.n_features));
  double s = 0.0;
  for (const Tree& t : model.trees) s += t.predict(x);
  return s / static_cast<double>(model.trees.size());
}

}  // namespace mspi
