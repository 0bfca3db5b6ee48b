#pragma once

// Random forest of Gini decision trees grown to purity.
//
// Split thresholds are stored as the largest left-side training value and
// tested with `x <= threshold`, so predictions depend only on feature ranks:
// any strictly increasing per-feature transform of train and probe data
// leaves every tree's output unchanged.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexiscreen/error.hpp"
#include "lexiscreen/random.hpp"

namespace lexiscreen {

using FeatureRow = std::vector<double>;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;  // majority class (ties -> lower index)
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;

  int predict(std::span<const double> x) const {
    int n = 0;
    while (nodes[n].feature >= 0) {
      n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
    }
    return nodes[n].label;
  }
};

struct ForestOptions {
  int n_trees = 50;
  int min_leaf = 1;
  int max_features = 0;  // 0 -> ceil(sqrt(d))
};

class RandomForest {
 public:
  int n_features = 0;
  int n_classes = 0;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;
  std::vector<double> importance;  // mean impurity decrease, sums to 1

  /// Per-class vote counts.
  std::vector<int> votes(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_features) {
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n_features) +
                                                    " features, got " + std::to_string(x.size()));
    }
    std::vector<int> v(n_classes, 0);
    for (const auto& t : trees) ++v[t.predict(x)];
    return v;
  }

  /// Majority vote; ties go to the lower class index.
  int predict(std::span<const double> x) const {
    const auto v = votes(x);
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  }
};

namespace detail {

inline double gini(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 1.0;
  for (double c : counts) s -= (c / total) * (c / total);
  return s;
}

inline int majority(std::span<const double> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureRow> X, std::span<const int> y, int n_classes,
              const ForestOptions& opt, Rng& rng, std::vector<double>& importance)
      : X_(X), y_(y), n_classes_(n_classes), opt_(opt), rng_(rng), importance_(importance) {
    n_features_ = static_cast<int>(X.front().size());
    max_features_ = opt.max_features > 0
                        ? std::min(opt.max_features, n_features_)
                        : static_cast<int>(std::ceil(std::sqrt(double(n_features_))));
  }

  DecisionTree build(std::vector<int> sample) {
    DecisionTree tree;
    root_size_ = double(sample.size());
    grow(tree, std::move(sample));
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // weighted child impurity, lower is better
  };

  std::vector<double> counts_of(const std::vector<int>& sample) const {
    std::vector<double> c(n_classes_, 0.0);
    for (int i : sample) c[y_[i]] += 1.0;
    return c;
  }

  int grow(DecisionTree& tree, std::vector<int> sample) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto counts = counts_of(sample);
    const double n = double(sample.size());
    const double node_gini = gini(counts, n);
    tree.nodes[id].label = majority(counts);
    if (node_gini <= 0.0 || sample.size() < 2 * static_cast<std::size_t>(opt_.min_leaf)) return id;

    const auto split = best_split(sample);
    if (split.feature < 0) {
      tree.nodes[id].label = duplicate_majority(X_[sample.front()]);
      return id;
    }

    std::vector<int> left, right;
    for (int i : sample) (X_[i][split.feature] <= split.threshold ? left : right).push_back(i);
    importance_[split.feature] += (n * node_gini - split.score) / root_size_;

    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int l = grow(tree, std::move(left));
    const int r = grow(tree, std::move(right));
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  /// An impure node whose rows are all identical is labeled from every
  /// training row with that exact vector, so bootstrap multiplicity does not
  /// pick between indistinguishable samples.
  int duplicate_majority(const FeatureRow& x) const {
    std::vector<double> c(n_classes_, 0.0);
    for (std::size_t i = 0; i < X_.size(); ++i) {
      if (X_[i] == x) c[y_[i]] += 1.0;
    }
    return majority(c);
  }

  /// Visits features in random order until max_features non-constant ones
  /// have been scored.
  Split best_split(const std::vector<int>& sample) {
    std::vector<int> order(n_features_);
    std::iota(order.begin(), order.end(), 0);
    rng_.shuffle(order);

    Split best;
    best.score = std::numeric_limits<double>::infinity();
    int scored = 0;
    std::vector<int> sorted = sample;
    std::vector<double> left(n_classes_), right(n_classes_);
    for (int f : order) {
      if (scored >= max_features_) break;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](int a, int b) { return X_[a][f] < X_[b][f]; });
      if (X_[sorted.front()][f] == X_[sorted.back()][f]) continue;
      ++scored;
      std::fill(left.begin(), left.end(), 0.0);
      right = counts_of(sorted);
      const double n = double(sorted.size());
      for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
        const int cls = y_[sorted[j]];
        left[cls] += 1.0;
        right[cls] -= 1.0;
        const double v = X_[sorted[j]][f];
        if (v == X_[sorted[j + 1]][f]) continue;
        const double nl = double(j + 1), nr = n - nl;
        if (nl < opt_.min_leaf || nr < opt_.min_leaf) continue;
        const double score = nl * gini(left, nl) + nr * gini(right, nr);
        if (score < best.score) best = {f, v, score};
      }
    }
    return best;
  }

  std::span<const FeatureRow> X_;
  std::span<const int> y_;
  int n_classes_;
  const ForestOptions& opt_;
  Rng& rng_;
  std::vector<double>& importance_;
  int n_features_ = 0;
  int max_features_ = 0;
  double root_size_ = 1.0;
};

}  // namespace detail

/// Tree t draws its bootstrap sample and feature orders from
/// Rng(derive_seed(seed, t)).
inline RandomForest train_forest(std::span<const FeatureRow> X, std::span<const int> y,
                                 int n_classes, std::uint64_t seed,
                                 const ForestOptions& opt = {}) {
  if (X.empty() || X.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "empty training set or label count mismatch");
  }
  const std::size_t d = X.front().size();
  for (const auto& row : X) {
    if (row.size() != d) throw Error(ErrorCode::DimensionMismatch, "ragged feature rows");
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorCode::OutOfRange, "non-finite feature value");
    }
  }
  std::vector<int> present(n_classes, 0);
  for (int label : y) {
    if (label < 0 || label >= n_classes) throw Error(ErrorCode::OutOfRange, "label out of range");
    present[label] = 1;
  }
  if (std::accumulate(present.begin(), present.end(), 0) < 2) {
    throw Error(ErrorCode::SingleClassTraining, "training labels contain a single class");
  }

  RandomForest forest;
  forest.n_features = static_cast<int>(d);
  forest.n_classes = n_classes;
  forest.seed = seed;
  std::vector<double> total(d, 0.0);
  for (int t = 0; t < opt.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> sample(X.size());
    for (auto& s : sample) s = static_cast<int>(rng.index(X.size()));
    std::vector<double> imp(d, 0.0);
    detail::TreeBuilder builder(X, y, n_classes, opt, rng, imp);
    forest.trees.push_back(builder.build(std::move(sample)));
    const double s = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (s > 0.0) {
      for (std::size_t k = 0; k < d; ++k) total[k] += imp[k] / s;
    }
  }
  const double s = std::accumulate(total.begin(), total.end(), 0.0);
  forest.importance.assign(d, 1.0 / double(d));
  if (s > 0.0) {
    for (std::size_t k = 0; k < d; ++k) forest.importance[k] = total[k] / s;
  }
  return forest;
}

inline const std::vector<double>& feature_importance(const RandomForest& forest) {
  return forest.importance;
}

// ---------------------------------------------------------------------------
// JSON tree dump: nodes are [feature, threshold, left, right, label].

inline nlohmann::json forest_to_json(const RandomForest& f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : f.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    trees.push_back(std::move(nodes));
  }
  return {{"n_features", f.n_features}, {"n_classes", f.n_classes}, {"seed", f.seed},
          {"importance", f.importance}, {"trees", std::move(trees)}};
}

inline RandomForest forest_from_json(const nlohmann::json& j) {
  RandomForest f;
  try {
    f.n_features = j.at("n_features").get<int>();
    f.n_classes = j.at("n_classes").get<int>();
    f.seed = j.at("seed").get<std::uint64_t>();
    f.importance = j.at("importance").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) {
      DecisionTree t;
      for (const auto& nj : tj) {
        t.nodes.push_back({nj.at(0).get<int>(), nj.at(1).get<double>(), nj.at(2).get<int>(),
                           nj.at(3).get<int>(), nj.at(4).get<int>()});
      }
      const int count = static_cast<int>(t.nodes.size());
      for (const auto& n : t.nodes) {
        const bool leaf = n.feature < 0;
        if (count == 0 || n.feature >= f.n_features || n.label < 0 || n.label >= f.n_classes ||
            (!leaf && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count))) {
          throw Error(ErrorCode::SchemaMismatch, "malformed tree node");
        }
      }
      f.trees.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  return f;
}

}  // namespace lexiscreen
