#pragma once

// Worked-example models shared by the unit tests and the acceptance binary.

#include <cmath>
#include <filesystem>
#include <string>

#include "cfx/models.hpp"
#include "cfx/polynomial.hpp"

namespace cfx::fixtures {

inline std::filesystem::path fixture_dir() { return CFX_FIXTURE_DIR; }

struct TreeBuilder {
  DecisionTree tree;

  std::size_t leaf(int label) {
    tree.nodes.push_back(TreeNode{true, label, {}, 0, 0});
    return tree.nodes.size() - 1;
  }
  // Children must be built first; the root is moved to index 0 by finish().
  std::size_t split(Predicate p, std::size_t t, std::size_t f) {
    tree.nodes.push_back(TreeNode{false, 0, p, t, f});
    return tree.nodes.size() - 1;
  }
  DecisionTree finish(std::size_t root) {
    // Re-number so the root comes first, children in depth-first order.
    DecisionTree out;
    auto copy = [&](auto&& self, std::size_t id) -> std::size_t {
      const std::size_t at = out.nodes.size();
      out.nodes.push_back(tree.nodes[id]);
      if (!tree.nodes[id].is_leaf) {
        const std::size_t t = self(self, tree.nodes[id].true_child);
        const std::size_t f = self(self, tree.nodes[id].false_child);
        out.nodes[at].true_child = t;
        out.nodes[at].false_child = f;
      }
      return at;
    };
    copy(copy, root);
    return out;
  }
};

inline FeatureList xs(std::size_t n) {
  FeatureList out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back({"X" + std::to_string(i), FeatureKind::Continuous, {}});
  return out;
}

inline Instance point(std::initializer_list<double> values) {
  Instance x;
  for (double v : values) x.values.push_back(Value::of(v));
  return x;
}

// X1<=10 ? (X2<=50 ? 1 : 0) : (X2<=20 ? 1 : 0)
inline DecisionTreeModel fig1_tree() {
  TreeBuilder b;
  const auto left = b.split(Predicate::at_most(1, 50), b.leaf(1), b.leaf(0));
  const auto right = b.split(Predicate::at_most(1, 20), b.leaf(1), b.leaf(0));
  const auto root = b.split(Predicate::at_most(0, 10), left, right);
  return {xs(2), b.finish(root)};
}

inline Instance fig1_factual() { return point({5, 30}); }

// The three trees of the forest example.
inline RandomForestModel forest3() {
  RandomForestModel rf{xs(3), {}};
  {
    TreeBuilder b;
    const auto t = b.split(Predicate::at_most(2, 2), b.leaf(1), b.leaf(0));
    const auto f = b.split(Predicate::at_most(2, 10), b.leaf(1), b.leaf(0));
    rf.trees.push_back(b.finish(b.split(Predicate::at_most(1, 1), t, f)));
  }
  {
    TreeBuilder b;
    const auto t = b.split(Predicate::at_most(1, 2), b.leaf(1), b.leaf(0));
    rf.trees.push_back(b.finish(b.split(Predicate::at_most(0, 5), t, b.leaf(0))));
  }
  {
    TreeBuilder b;
    const auto t = b.split(Predicate::at_most(2, 5), b.leaf(1), b.leaf(0));
    const auto f = b.split(Predicate::at_most(1, 6), b.leaf(0), b.leaf(1));
    rf.trees.push_back(b.finish(b.split(Predicate::at_most(0, 3), t, f)));
  }
  return rf;
}

inline Instance forest3_factual() { return point({3, 1, 2}); }

inline Feature binary(std::string name) { return {std::move(name), FeatureKind::Categorical, {"n", "y"}}; }

// Naive Bayes whose class is exactly the first feature; the others carry no information.
inline NaiveBayesModel class_is_first(std::size_t n) {
  NaiveBayesModel nb;
  nb.prior = {0.5, 0.5};
  for (std::size_t i = 1; i <= n; ++i) {
    nb.features.push_back(binary("V" + std::to_string(i)));
    if (i == 1) {
      nb.cpt.push_back({{1.0, 0.0}, {0.0, 1.0}});
    } else {
      nb.cpt.push_back({{0.5, 0.5}, {0.5, 0.5}});
    }
  }
  return nb;
}

// A small voting-record style classifier: six yes/no votes, informative to different degrees.
inline NaiveBayesModel voting() {
  NaiveBayesModel nb;
  nb.prior = {0.6, 0.4};
  const double p_yes[6][2] = {{0.2, 0.9}, {0.7, 0.3}, {0.4, 0.6}, {0.9, 0.05}, {0.5, 0.55}, {0.3, 0.8}};
  for (std::size_t i = 0; i < 6; ++i) {
    nb.features.push_back(binary("vote" + std::to_string(i + 1)));
    nb.cpt.push_back({{1.0 - p_yes[i][0], 1.0 - p_yes[i][1]}, {p_yes[i][0], p_yes[i][1]}});
  }
  return nb;
}

inline Instance categories(std::initializer_list<std::size_t> values) {
  Instance x;
  for (auto v : values) x.values.push_back(Value::of_category(v));
  return x;
}

// class = V1 xor V2 over binary features, padded with irrelevant ones.
inline TruthTable xor_table(std::size_t n) {
  TruthTable t;
  for (std::size_t i = 1; i <= n; ++i) t.features.push_back(binary("V" + std::to_string(i)));
  const std::size_t rows = std::size_t{1} << n;
  for (std::size_t r = 0; r < rows; ++r) {
    const int a = static_cast<int>((r >> (n - 1)) & 1);
    const int b = static_cast<int>((r >> (n - 2)) & 1);
    t.labels.push_back(a ^ b);
  }
  return t;
}

// Decision tree computing V1 xor V2 on continuous features (threshold 0.5), plus unused features.
inline DecisionTreeModel xor_tree(std::size_t n) {
  TreeBuilder b;
  const auto l = b.split(Predicate::at_most(1, 0.5), b.leaf(0), b.leaf(1));
  const auto r = b.split(Predicate::at_most(1, 0.5), b.leaf(1), b.leaf(0));
  return {xs(n), b.finish(b.split(Predicate::at_most(0, 0.5), l, r))};
}

}  // namespace cfx::fixtures
