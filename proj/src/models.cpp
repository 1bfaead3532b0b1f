#include "cfx/models.hpp"

#include <cmath>
#include <set>

#include "cfx/error.hpp"

namespace cfx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ConstantClassifier: return "ConstantClassifier";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::BadDistribution: return "BadDistribution";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::InvalidInstance: return "InvalidInstance";
    case ErrorCode::InconsistentAssignment: return "InconsistentAssignment";
    case ErrorCode::EmptyPolynomialUnsatisfiable: return "EmptyPolynomialUnsatisfiable";
    case ErrorCode::MissingWeight: return "MissingWeight";
    case ErrorCode::InvalidCondition: return "InvalidCondition";
    case ErrorCode::InfeasibleCondition: return "InfeasibleCondition";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::VerificationCapExceeded: return "VerificationCapExceeded";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::TargetIsPrediction: return "TargetIsPrediction";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::optional<std::size_t> find_feature(const FeatureList& features, std::string_view name) {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> find_category(const Feature& feature, std::string_view category) {
  for (std::size_t i = 0; i < feature.categories.size(); ++i) {
    if (feature.categories[i] == category) return i;
  }
  return std::nullopt;
}

bool holds(const Predicate& predicate, const Value& value) {
  if (predicate.test == Predicate::Test::Threshold) return value.number <= predicate.threshold;
  return value.category == predicate.category;
}

const FeatureList& features_of(const Model& model) {
  return std::visit([](const auto& m) -> const FeatureList& { return m.features; }, model);
}

std::string_view model_type_name(const Model& model) {
  switch (model.index()) {
    case 0: return "decision_tree";
    case 1: return "random_forest";
    default: return "naive_bayes";
  }
}

namespace {

void validate_features(const FeatureList& features) {
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw Error(ErrorCode::InvalidModel, "feature with empty name");
    if (!names.insert(f.name).second) {
      throw Error(ErrorCode::InvalidModel, "duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::Categorical) {
      if (f.categories.size() < 2) {
        throw Error(ErrorCode::InvalidModel,
                    "categorical feature '" + f.name + "' needs at least two categories");
      }
      std::set<std::string> cats(f.categories.begin(), f.categories.end());
      if (cats.size() != f.categories.size()) {
        throw Error(ErrorCode::InvalidModel, "duplicate category in feature '" + f.name + "'");
      }
    } else if (!f.categories.empty()) {
      throw Error(ErrorCode::InvalidModel,
                  "continuous feature '" + f.name + "' must not list categories");
    }
  }
}

void validate_predicate(const FeatureList& features, const Predicate& p) {
  if (p.feature >= features.size()) {
    throw Error(ErrorCode::UnknownFeature, "predicate references an undeclared feature");
  }
  const Feature& f = features[p.feature];
  if (p.test == Predicate::Test::Threshold) {
    if (f.kind != FeatureKind::Continuous) {
      throw Error(ErrorCode::InvalidModel, "threshold test on categorical feature '" + f.name + "'");
    }
    if (!std::isfinite(p.threshold)) {
      throw Error(ErrorCode::InvalidModel, "non-finite threshold on feature '" + f.name + "'");
    }
  } else {
    if (f.kind != FeatureKind::Categorical) {
      throw Error(ErrorCode::InvalidModel, "equality test on continuous feature '" + f.name + "'");
    }
    if (p.category >= f.categories.size()) {
      throw Error(ErrorCode::InvalidModel, "unknown category on feature '" + f.name + "'");
    }
  }
}

void validate_tree(const FeatureList& features, const DecisionTree& tree) {
  if (tree.nodes.empty()) throw Error(ErrorCode::InvalidModel, "tree without nodes");
  if (tree.nodes[DecisionTree::root].is_leaf) {
    throw Error(ErrorCode::ConstantClassifier,
                "tree is a single leaf; a constant classifier has no decision polynomial");
  }
  // Every node reachable exactly once from the root: a finite tree, not a DAG or cycle.
  std::vector<bool> seen(tree.nodes.size(), false);
  std::vector<std::size_t> stack{DecisionTree::root};
  while (!stack.empty()) {
    std::size_t id = stack.back();
    stack.pop_back();
    if (id >= tree.nodes.size()) throw Error(ErrorCode::InvalidModel, "child index out of range");
    if (seen[id]) throw Error(ErrorCode::InvalidModel, "tree node reachable twice");
    seen[id] = true;
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf) {
      if (node.label != 0 && node.label != 1) {
        throw Error(ErrorCode::InvalidModel, "leaf class must be 0 or 1");
      }
      continue;
    }
    validate_predicate(features, node.predicate);
    stack.push_back(node.false_child);
    stack.push_back(node.true_child);
  }
}

bool is_distribution(double a, double b) {
  return std::isfinite(a) && std::isfinite(b) && a >= 0.0 && b >= 0.0 && std::abs(a + b - 1.0) <= 1e-9;
}

void validate_naive_bayes(const NaiveBayesModel& nb, const ValidationOptions& options) {
  if (nb.features.empty()) throw Error(ErrorCode::InvalidModel, "naive Bayes model without features");
  if (nb.features.size() > options.naive_bayes_feature_cap) {
    throw Error(ErrorCode::EnumerationCapExceeded,
                "naive Bayes model has " + std::to_string(nb.features.size()) +
                    " features; enumeration cap is " + std::to_string(options.naive_bayes_feature_cap));
  }
  for (const auto& f : nb.features) {
    if (f.kind != FeatureKind::Categorical) {
      throw Error(ErrorCode::InvalidModel, "naive Bayes feature '" + f.name + "' must be categorical");
    }
  }
  if (!is_distribution(nb.prior[0], nb.prior[1])) {
    throw Error(ErrorCode::BadDistribution, "class prior must be a probability distribution");
  }
  if (nb.cpt.size() != nb.features.size()) {
    throw Error(ErrorCode::BadDistribution, "conditional table count does not match feature count");
  }
  for (std::size_t i = 0; i < nb.features.size(); ++i) {
    const auto& table = nb.cpt[i];
    if (table.size() != nb.features[i].categories.size()) {
      throw Error(ErrorCode::BadDistribution,
                  "conditional table of '" + nb.features[i].name + "' does not cover its categories");
    }
    for (int c = 0; c < 2; ++c) {
      double sum = 0.0;
      for (const auto& row : table) {
        if (!std::isfinite(row[c]) || row[c] < 0.0) {
          throw Error(ErrorCode::BadDistribution,
                      "negative or non-finite probability in '" + nb.features[i].name + "'");
        }
        sum += row[c];
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::BadDistribution,
                    "P(" + nb.features[i].name + " | class " + std::to_string(c) + ") does not sum to 1");
      }
    }
  }
}

}  // namespace

Model validate_model(Model model, const ValidationOptions& options) {
  validate_features(features_of(model));
  if (auto* dt = std::get_if<DecisionTreeModel>(&model)) {
    validate_tree(dt->features, dt->tree);
  } else if (auto* rf = std::get_if<RandomForestModel>(&model)) {
    if (rf->trees.empty()) throw Error(ErrorCode::InvalidModel, "forest without trees");
    for (const auto& t : rf->trees) validate_tree(rf->features, t);
  } else {
    validate_naive_bayes(std::get<NaiveBayesModel>(model), options);
  }
  return model;
}

void validate_instance(const FeatureList& features, const Instance& instance) {
  if (instance.values.size() != features.size()) {
    throw Error(ErrorCode::InvalidInstance, "instance does not cover exactly the model's features");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Value& v = instance.values[i];
    if (features[i].kind == FeatureKind::Continuous) {
      if (!std::isfinite(v.number)) {
        throw Error(ErrorCode::InvalidInstance, "non-finite value for '" + features[i].name + "'");
      }
    } else if (v.category >= features[i].categories.size()) {
      throw Error(ErrorCode::InvalidInstance, "unknown category for '" + features[i].name + "'");
    }
  }
}

int evaluate(const DecisionTree& tree, const Instance& instance) {
  std::size_t id = DecisionTree::root;
  while (!tree.nodes[id].is_leaf) {
    const TreeNode& node = tree.nodes[id];
    id = holds(node.predicate, instance.values[node.predicate.feature]) ? node.true_child
                                                                         : node.false_child;
  }
  return tree.nodes[id].label;
}

std::size_t count_positive_votes(const RandomForestModel& forest, const Instance& instance) {
  std::size_t votes = 0;
  for (const auto& t : forest.trees) votes += static_cast<std::size_t>(evaluate(t, instance));
  return votes;
}

std::array<double, 2> naive_bayes_log_scores(const NaiveBayesModel& model, const Instance& instance) {
  std::array<double, 2> score{std::log(model.prior[0]), std::log(model.prior[1])};
  for (std::size_t i = 0; i < model.features.size(); ++i) {
    const auto& row = model.cpt[i][instance.values[i].category];
    score[0] += std::log(row[0]);
    score[1] += std::log(row[1]);
  }
  return score;
}

int decide_scores(double score0, double score1) { return score1 > score0 ? 1 : 0; }

int evaluate(const Model& model, const Instance& instance) {
  if (const auto* dt = std::get_if<DecisionTreeModel>(&model)) return evaluate(dt->tree, instance);
  if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
    // Strict majority for class 1; an even split falls to class 0.
    return 2 * count_positive_votes(*rf, instance) > rf->trees.size() ? 1 : 0;
  }
  auto s = naive_bayes_log_scores(std::get<NaiveBayesModel>(model), instance);
  return decide_scores(s[0], s[1]);
}

std::vector<TreePath> enumerate_paths(const DecisionTree& tree) {
  std::vector<TreePath> out;
  std::vector<PathLiteral> prefix;
  auto walk = [&](auto&& self, std::size_t id) -> void {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf) {
      out.push_back({prefix, node.label});
      return;
    }
    prefix.push_back({node.predicate, true});
    self(self, node.true_child);
    prefix.back().positive = false;
    self(self, node.false_child);
    prefix.pop_back();
  };
  walk(walk, DecisionTree::root);
  return out;
}

}  // namespace cfx
