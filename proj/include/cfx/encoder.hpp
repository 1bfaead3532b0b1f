#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cfx/ilp.hpp"
#include "cfx/models.hpp"
#include "cfx/polynomial.hpp"
#include "cfx/weights.hpp"

namespace cfx {

// ---- generation constraints -------------------------------------------------------------------

// Each term forced to 0: sum of its literals <= k - 1, negated literals folded into the rhs.
std::vector<LinearConstraint> encode_force_zero(const DecisionPolynomial& dp);

// Exactly one term forced to 1 through fresh term selectors. Returns the selector ids.
// Throws EmptyPolynomialUnsatisfiable for an empty polynomial.
std::vector<VarId> encode_force_one(IlpProblem& problem, const DecisionPolynomial& dp,
                                    std::size_t tree_index = 0);

// Adds one tree vote variable delta with delta == 0 implying dp == 0. An empty polynomial adds
// no constraints and leaves delta unconstrained.
VarId encode_tree_indicator(IlpProblem& problem, const DecisionPolynomial& dp, std::size_t tree_index);

// Minimum number of trees voting `target` for a forest of m trees to output it (ties go to 0).
std::size_t votes_needed(std::size_t trees, int target);

// Forest encoding over per-tree polynomials of a single class. When that class is the target,
// each tree gets term selectors linked to a tree vote and the votes must reach votes_needed;
// otherwise each tree gets a vote indicator and at most m - votes_needed of them may be set.
void encode_forest(IlpProblem& problem, std::span<const DecisionPolynomial> per_tree, int target);

// ---- structural constraints -------------------------------------------------------------------

// Threshold nesting per feature with two or more thresholds, in the reduced pairwise form:
// for each threshold a, the larger thresholds sum to at least their count times i[X<=a], the
// smaller ones to at most their count times i[X<=a]; duplicates dropped.
std::vector<LinearConstraint> encode_consistency(const IndicatorRegistry& registry);

// Sum of each categorical group == 1.
std::vector<LinearConstraint> encode_onehot(const IndicatorRegistry& registry);

// Weighted l1 distance to the factual indicator vector with the absolute values removed. A
// categorical change flips two one-hot indicators, so one-hot terms count half: a uniform
// weight vector charges one unit per threshold crossed and one per category switch.
LinearObjective build_objective(const IndicatorRegistry& registry, std::span<const std::uint8_t> factual,
                                const WeightVector& weights);

// ---- user conditions --------------------------------------------------------------------------

struct Condition {
  enum class Kind { Interval, Equals, NotEquals, Keep };

  std::string feature;
  Kind kind = Kind::Interval;
  Interval interval;     // Interval
  std::string category;  // Equals / NotEquals

  static Condition between(std::string feature, double lo, double hi);
  static Condition greater_than(std::string feature, double value);
  static Condition at_least(std::string feature, double value);
  static Condition less_than(std::string feature, double value);
  static Condition at_most(std::string feature, double value);
  static Condition equals(std::string feature, std::string category);
  static Condition not_equals(std::string feature, std::string category);
  static Condition keep(std::string feature);

  bool operator==(const Condition&) const = default;
};

// Fixes the indicators decided by the conditions: thresholds at or above the interval's upper
// end become 1, thresholds the interval lies strictly above become 0, the rest stay free.
// Keep fixes a feature's indicators to the factual values. Throws InfeasibleCondition on an
// empty interval or contradictory fixes, InvalidCondition on kind mismatches, UnknownFeature.
IlpProblem apply_conditions(IlpProblem problem, const IndicatorRegistry& registry,
                            std::span<const Condition> conditions, const Instance* factual = nullptr);

// Intersection of the interval conditions on one continuous feature.
Interval condition_interval(const FeatureList& features, std::size_t feature,
                            std::span<const Condition> conditions);

// ---- whole problems ---------------------------------------------------------------------------

enum class Polarity { Auto, Zero, One };

struct EncodedProblem {
  IlpProblem problem;
  std::shared_ptr<const IndicatorRegistry> registry;
  int target_class = 0;
  int polarity = 0;
  std::vector<DecisionPolynomial> polynomials;  // one per tree, or one for the whole model
};

// Decision polynomials of both classes for the model (per tree for forests).
struct ModelPolynomials {
  std::shared_ptr<const IndicatorRegistry> registry;
  std::vector<DecisionPolynomial> zero;
  std::vector<DecisionPolynomial> one;
};
ModelPolynomials model_polynomials(const Model& model, const EnumerationOptions& options = {});

// Smaller total term count wins; ties go to the 0-polynomials.
int choose_polarity(const ModelPolynomials& dps, Polarity requested);

// Generation + consistency + one-hot constraints and the weighted objective for "classify as
// target", with the factual as hint. Fresh auxiliary variables follow the registry indicators.
EncodedProblem encode_counterfactual(const Model& model, const Instance& factual, const WeightVector& weights,
                                     int target, Polarity polarity = Polarity::Auto,
                                     const EnumerationOptions& options = {});

// Maximizes the number of changed features while keeping the factual's class. Features kept by
// `keep` have their indicators fixed. Features the model never tests count as changed.
EncodedProblem encode_prime_implicant(const Model& model, const Instance& factual,
                                      std::span<const std::string> keep, Polarity polarity = Polarity::Auto,
                                      const EnumerationOptions& options = {});

// ---- reporting --------------------------------------------------------------------------------

struct EncodingStats {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t generation = 0;
  std::size_t consistency = 0;
  std::size_t fixed = 0;
  std::map<std::string, std::size_t> by_family;
};

EncodingStats encoding_stats(const IlpProblem& problem);

std::string variable_name(const IlpProblem& problem, const IndicatorRegistry& registry, VarId id);

// LP text: header, objective, one constraint per line, fixed bounds, binaries. See docs/lp_format.md.
void write_lp(std::ostream& out, const IlpProblem& problem, const IndicatorRegistry& registry);

}  // namespace cfx
