#pragma once

// Seeded random models and instances for property checks, benchmarks and `cfx oracle-check`.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cfx/models.hpp"

namespace cfx::gen {

inline FeatureList continuous_features(std::size_t n) {
  FeatureList out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"X" + std::to_string(i + 1), FeatureKind::Continuous, {}});
  return out;
}

inline FeatureList mixed_features(std::size_t continuous, std::size_t categorical, std::size_t max_categories,
                                  std::mt19937_64& rng) {
  FeatureList out = continuous_features(continuous);
  std::uniform_int_distribution<std::size_t> ncat(2, std::max<std::size_t>(2, max_categories));
  for (std::size_t i = 0; i < categorical; ++i) {
    Feature f{"C" + std::to_string(i + 1), FeatureKind::Categorical, {}};
    const std::size_t k = ncat(rng);
    for (std::size_t c = 0; c < k; ++c) f.categories.push_back("c" + std::to_string(c));
    out.push_back(std::move(f));
  }
  return out;
}

// Candidate split points per continuous feature, drawn from [0, 100] and rounded to 0.5 so that
// different trees reuse some of them.
inline std::vector<std::vector<double>> threshold_pool(const FeatureList& features, std::size_t per_feature,
                                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<std::vector<double>> pool(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind != FeatureKind::Continuous) continue;
    while (pool[f].size() < per_feature) {
      double t = std::round(u(rng) * 2.0) / 2.0;
      if (std::find(pool[f].begin(), pool[f].end(), t) == pool[f].end()) pool[f].push_back(t);
    }
  }
  return pool;
}

struct TreeShape {
  std::size_t max_depth = 3;
  double split_probability = 0.8;  // below the root, chance that a node above max depth splits
};

// Random tree over the pool. The root always splits, so the tree is never a bare leaf.
inline DecisionTree random_tree(const FeatureList& features, const std::vector<std::vector<double>>& pool,
                                const TreeShape& shape, std::mt19937_64& rng) {
  std::vector<std::size_t> usable;
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind == FeatureKind::Categorical || !pool[f].empty()) usable.push_back(f);
  }
  DecisionTree tree;
  std::bernoulli_distribution split(shape.split_probability), coin(0.5);
  auto grow = [&](auto&& self, std::size_t depth) -> std::size_t {
    const std::size_t id = tree.nodes.size();
    tree.nodes.emplace_back();
    if (depth >= shape.max_depth || (depth > 0 && !split(rng))) {
      tree.nodes[id].label = coin(rng) ? 1 : 0;
      return id;
    }
    const std::size_t f = usable[std::uniform_int_distribution<std::size_t>(0, usable.size() - 1)(rng)];
    Predicate p;
    if (features[f].kind == FeatureKind::Categorical) {
      p = Predicate::equals(f, std::uniform_int_distribution<std::size_t>(0, features[f].categories.size() - 1)(rng));
    } else {
      p = Predicate::at_most(f, pool[f][std::uniform_int_distribution<std::size_t>(0, pool[f].size() - 1)(rng)]);
    }
    const std::size_t t = self(self, depth + 1);
    const std::size_t e = self(self, depth + 1);
    TreeNode& node = tree.nodes[id];
    node.is_leaf = false;
    node.predicate = p;
    node.true_child = t;
    node.false_child = e;
    return id;
  };
  grow(grow, 0);
  return tree;
}

inline NaiveBayesModel random_naive_bayes(std::size_t n_features, std::size_t max_categories, std::mt19937_64& rng) {
  NaiveBayesModel nb;
  std::uniform_int_distribution<std::size_t> ncat(2, std::max<std::size_t>(2, max_categories));
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (std::size_t i = 0; i < n_features; ++i) {
    Feature f{"V" + std::to_string(i + 1), FeatureKind::Categorical, {}};
    const std::size_t k = ncat(rng);
    for (std::size_t c = 0; c < k; ++c) f.categories.push_back(k == 2 ? (c == 0 ? "n" : "y") : "c" + std::to_string(c));
    nb.features.push_back(std::move(f));
  }
  const double p1 = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
  nb.prior = {1.0 - p1, p1};
  nb.cpt.resize(n_features);
  for (std::size_t i = 0; i < n_features; ++i) {
    const std::size_t k = nb.features[i].categories.size();
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<double> w(k);
      double s = 0.0;
      for (auto& x : w) s += (x = u(rng));
      nb.cpt[i].resize(k);
      for (std::size_t c = 0; c < k; ++c) nb.cpt[i][c][static_cast<std::size_t>(cls)] = w[c] / s;
    }
  }
  return nb;
}

// A point whose continuous coordinates cover the pool range with margin.
inline Instance random_instance(const FeatureList& features, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 110.0);
  Instance x;
  for (const auto& f : features) {
    if (f.kind == FeatureKind::Categorical) {
      x.values.push_back(Value::of_category(std::uniform_int_distribution<std::size_t>(0, f.categories.size() - 1)(rng)));
    } else {
      x.values.push_back(Value::of(std::round(u(rng) * 4.0) / 4.0));
    }
  }
  return x;
}

}  // namespace cfx::gen
