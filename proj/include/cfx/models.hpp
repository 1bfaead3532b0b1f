#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cfx {

enum class FeatureKind { Continuous, Categorical };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  std::vector<std::string> categories;  // categorical only

  bool operator==(const Feature&) const = default;
};

using FeatureList = std::vector<Feature>;

std::optional<std::size_t> find_feature(const FeatureList& features, std::string_view name);
std::optional<std::size_t> find_category(const Feature& feature, std::string_view category);

// A binary atom: X <= threshold for continuous features, X == category for categorical ones.
struct Predicate {
  enum class Test { Threshold, Equals };

  std::size_t feature = 0;
  Test test = Test::Threshold;
  double threshold = 0.0;
  std::size_t category = 0;

  static Predicate at_most(std::size_t feature, double threshold) {
    return {feature, Test::Threshold, threshold, 0};
  }
  static Predicate equals(std::size_t feature, std::size_t category) {
    return {feature, Test::Equals, 0.0, category};
  }

  bool operator==(const Predicate&) const = default;
};

// One coordinate of an instance. Continuous features use `number`, categorical ones `category`.
struct Value {
  double number = 0.0;
  std::size_t category = 0;

  static Value of(double number) { return {number, 0}; }
  static Value of_category(std::size_t category) { return {0.0, category}; }

  bool operator==(const Value&) const = default;
};

struct Instance {
  std::vector<Value> values;

  bool operator==(const Instance&) const = default;
};

bool holds(const Predicate& predicate, const Value& value);

// Trees are stored as a node arena; node 0 is the root.
struct TreeNode {
  bool is_leaf = true;
  int label = 0;  // leaf only
  Predicate predicate;
  std::size_t true_child = 0;
  std::size_t false_child = 0;

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  static constexpr std::size_t root = 0;

  bool operator==(const DecisionTree&) const = default;
};

struct DecisionTreeModel {
  FeatureList features;
  DecisionTree tree;

  bool operator==(const DecisionTreeModel&) const = default;
};

// Majority vote over the trees; an even split goes to class 0.
struct RandomForestModel {
  FeatureList features;
  std::vector<DecisionTree> trees;

  bool operator==(const RandomForestModel&) const = default;
};

struct NaiveBayesModel {
  FeatureList features;  // all categorical
  std::array<double, 2> prior{0.5, 0.5};
  // cpt[feature][category] = {P(category | class 0), P(category | class 1)}
  std::vector<std::vector<std::array<double, 2>>> cpt;

  bool operator==(const NaiveBayesModel&) const = default;
};

using Model = std::variant<DecisionTreeModel, RandomForestModel, NaiveBayesModel>;

const FeatureList& features_of(const Model& model);
std::string_view model_type_name(const Model& model);

struct ValidationOptions {
  std::size_t naive_bayes_feature_cap = 20;
};

// Returns the model unchanged iff every structural invariant holds; throws cfx::Error otherwise.
Model validate_model(Model model, const ValidationOptions& options = {});

void validate_instance(const FeatureList& features, const Instance& instance);

int evaluate(const DecisionTree& tree, const Instance& instance);
int evaluate(const Model& model, const Instance& instance);

// Votes for class 1 among the trees.
std::size_t count_positive_votes(const RandomForestModel& forest, const Instance& instance);

// Log-space joint scores {class 0, class 1}; zero probabilities give -inf.
std::array<double, 2> naive_bayes_log_scores(const NaiveBayesModel& model, const Instance& instance);

// Argmax with ties (including two -inf scores) resolved to class 0.
int decide_scores(double score0, double score1);

struct PathLiteral {
  Predicate predicate;
  bool positive = true;

  bool operator==(const PathLiteral&) const = default;
};

struct TreePath {
  std::vector<PathLiteral> literals;
  int label = 0;

  bool operator==(const TreePath&) const = default;
};

// One entry per leaf in depth-first order, true branch first.
std::vector<TreePath> enumerate_paths(const DecisionTree& tree);

}  // namespace cfx
