#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mspi/matrix.hpp"
#include "mspi/rng.hpp"

namespace mspi {

/// Node of a binary axis-aligned tree. Leaves have feature == -1.
/// Rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t num_leaves() const;
};

enum class SplitCriterion { gini, squared_error };

struct TreeGrowth {
  std::size_t max_depth = 8;  // 0 = unlimited
  std::size_t min_leaf = 1;
  /// Features tried per node; 0 or >= p means all of them.
  std::size_t features_per_split = 0;
  SplitCriterion criterion = SplitCriterion::gini;
};

/// Value stored in a leaf given the row indices (with repetition) it holds.
using LeafValueFn = std::function<double(std::span<const std::size_t>)>;

/// Grows a CART tree on the rows listed in `sample` (repetition = bootstrap
/// weight). `target` is 0/1 for gini and a real response for squared error.
/// A node becomes a leaf at max depth, when it is pure, when it cannot give
/// both children min_leaf rows, or when no split lowers its impurity.
/// `rng` is required only when features_per_split subsamples features.
Tree grow_tree(const Matrix& X, std::span<const double> target,
               std::vector<std::size_t> sample, const TreeGrowth& growth,
               const LeafValueFn& leaf_value, Rng* rng = nullptr);

}  // namespace mspi
