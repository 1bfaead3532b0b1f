#pragma once

#include <compare>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cfx/models.hpp"
#include "cfx/registry.hpp"

namespace cfx {

// Indicator factor: v (positive) or (1 - v) (negated).
struct Literal {
  VarId var = 0;
  bool positive = true;

  auto operator<=>(const Literal&) const = default;
};

// Monic product of literals, sorted by variable, at most one literal per variable.
struct Term {
  std::vector<Literal> literals;

  std::size_t size() const { return literals.size(); }
  std::size_t negated_count() const;
  bool satisfied_by(std::span<const std::uint8_t> assignment) const;

  auto operator<=>(const Term&) const = default;
};

// Sum of monic terms with unit coefficients and no constant term. Evaluates to 1 exactly on the
// consistent assignments the classifier maps to target_class. An empty term list is the
// polynomial of a class the classifier never outputs.
struct DecisionPolynomial {
  int target_class = 0;
  std::vector<Term> terms;
  std::shared_ptr<const IndicatorRegistry> registry;

  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
};

std::string to_string(const DecisionPolynomial& dp);

DecisionPolynomial dp_from_tree(const DecisionTree& tree, int target_class,
                                std::shared_ptr<const IndicatorRegistry> registry);
DecisionPolynomial dp_from_tree(const DecisionTreeModel& model, int target_class);

// A classifier given by its full table over categorical features. labels are indexed in mixed
// radix with the first feature most significant.
struct TruthTable {
  FeatureList features;
  std::vector<int> labels;
};

struct EnumerationOptions {
  std::size_t max_assignments = std::size_t{1} << 20;
};

// One full-length term per joint assignment of target_class, then reduce_dp. Binary features
// contribute a single literal on the indicator of their second category (negated for the first);
// wider features contribute the positive one-hot literal of their value.
DecisionPolynomial dp_from_enumerable(const NaiveBayesModel& model, int target_class,
                                      const EnumerationOptions& options = {});
DecisionPolynomial dp_from_enumerable(const TruthTable& table, int target_class,
                                      const EnumerationOptions& options = {});

// Repeatedly replaces pairs of terms that differ only in the polarity of one literal by their
// common factors. Variables are scanned in registry order, passes repeat until nothing merges,
// and the result is sorted. Merges that would leave a constant term are skipped.
DecisionPolynomial reduce_dp(const DecisionPolynomial& dp);

// Number of satisfied terms; throws InconsistentAssignment on unrealizable input.
int eval_dp(const DecisionPolynomial& dp, std::span<const std::uint8_t> assignment);

// Exhaustive check that p0 + p1 == 1 on every consistent assignment of the shared registry.
bool check_complementary(const DecisionPolynomial& p0, const DecisionPolynomial& p1,
                 std::size_t max_assignments = std::size_t{1} << 20);

}  // namespace cfx
