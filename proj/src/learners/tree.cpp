#include "mspi/learners/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mspi/error.hpp"

namespace mspi {

double Tree::predict(std::span<const double> x) const {
  int k = 0;
  while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(k)];
    k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(k)].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    best = std::max(best, d[k]);
    if (!nodes[k].is_leaf()) {
      d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
      d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
    }
  }
  return best;
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // higher is better
};

class Grower {
 public:
  Grower(const Matrix& X, std::span<const double> target, const TreeGrowth& growth,
         const LeafValueFn& leaf_value, Rng* rng)
      : X_(X), y_(target), g_(growth), leaf_value_(leaf_value), rng_(rng) {
    features_.resize(X.cols());
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree run(std::vector<std::size_t> sample) {
    Tree t;
    grow(t, std::move(sample), 0);
    return t;
  }

 private:
  // Score to maximize: sum over children of (sum y)^2 / n for squared error,
  // and sum_c n_c^2 / n for gini (same ordering as weighted impurity).
  double node_score(double n, double s) const {
    if (g_.criterion == SplitCriterion::squared_error) return s * s / n;
    return (s * s + (n - s) * (n - s)) / n;
  }

  bool is_pure(std::span<const std::size_t> rows) const {
    for (std::size_t r : rows)
      if (y_[r] != y_[rows[0]]) return false;
    return true;
  }

  std::span<const std::size_t> candidate_features() {
    const std::size_t p = features_.size();
    const std::size_t k = g_.features_per_split;
    if (k == 0 || k >= p) {
      std::iota(features_.begin(), features_.end(), std::size_t{0});
      return features_;
    }
    if (!rng_) throw DataError("grow_tree: feature subsampling needs a random stream");
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(features_[i], features_[i + rng_->index(p - i)]);
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(k));
    return {features_.data(), k};
  }

  Split best_split(std::vector<std::size_t>& rows) {
    const double n = static_cast<double>(rows.size());
    double total = 0.0;
    for (std::size_t r : rows) total += y_[r];
    const double parent = node_score(n, total);
    Split best;
    const auto feats = candidate_features();
    for (std::size_t f : feats) {
      std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        const double xa = X_(a, f), xb = X_(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        left_sum += y_[rows[i]];
        const double lo = X_(rows[i], f), hi = X_(rows[i + 1], f);
        if (lo == hi) continue;
        const std::size_t nl = i + 1, nr = rows.size() - nl;
        if (nl < g_.min_leaf || nr < g_.min_leaf) continue;
        const double score = node_score(static_cast<double>(nl), left_sum) +
                             node_score(static_cast<double>(nr), total - left_sum);
        const double gain = score - parent;
        if (gain > best.gain * (1.0 + 1e-12) + 1e-12 * std::fabs(parent)) {
          double thr = 0.5 * (lo + hi);
          if (!(thr >= lo && thr < hi)) thr = lo;
          best = {static_cast<int>(f), thr, gain};
        }
      }
    }
    return best;
  }

  int grow(Tree& t, std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes.back().samples = rows.size();
    const bool at_limit = g_.max_depth != 0 && depth >= g_.max_depth;
    Split s;
    if (!at_limit && rows.size() >= 2 * std::max<std::size_t>(g_.min_leaf, 1) && !is_pure(rows))
      s = best_split(rows);
    if (s.feature < 0) {
      t.nodes[static_cast<std::size_t>(id)].value = leaf_value_(rows);
      return id;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (X_(r, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(t, std::move(left), depth + 1);
    const int r = grow(t, std::move(right), depth + 1);
    TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& X_;
  std::span<const double> y_;
  TreeGrowth g_;
  const LeafValueFn& leaf_value_;
  Rng* rng_;
  std::vector<std::size_t> features_;
};

}  // namespace

Tree grow_tree(const Matrix& X, std::span<const double> target,
               std::vector<std::size_t> sample, const TreeGrowth& growth,
               const LeafValueFn& leaf_value, Rng* rng) {
  if (target.size() != X.rows()) throw DataError("grow_tree: target length mismatch");
  if (sample.empty()) throw DataError("grow_tree: empty sample");
  return Grower(X, target, growth, leaf_value, rng).run(std::move(sample));
}

}  // namespace mspi
