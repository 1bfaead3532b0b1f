#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfx/registry.hpp"

namespace cfx {

enum class VarKind {
  Indicator,      // registry entry; id equals its registry id
  TermDelta,      // per-term selector of a force-one encoding
  TreeDelta,      // per-tree vote indicator
  FeatureChange,  // 1 only if some indicator of the feature leaves its factual value
};

struct IlpVariable {
  VarKind kind = VarKind::Indicator;
  std::size_t index = 0;  // registry id, tree index, or feature index
  std::size_t term = 0;   // TermDelta only
  std::uint8_t hint = 0;  // preferred value when the objective is indifferent (factual value)

  bool operator==(const IlpVariable&) const = default;
};

enum class Relation { LessEqual, GreaterEqual, Equal };

enum class ConstraintFamily {
  ForceZero,            // one term of a polynomial forced to 0
  ForceOneTerm,         // term >= k * delta
  ForceOneCardinality,  // sum of term deltas == 1
  TreeIndicator,        // term - k <= delta - 1
  TreeLink,             // sum of a tree's term deltas == tree delta
  Majority,             // vote count over tree deltas
  Consistency,          // threshold nesting within a feature
  OneHot,               // exactly one category per feature
  FeatureChange,        // change flag bounded by the feature's flips
  NoGood,               // excludes one earlier solution
};

std::string_view to_string(ConstraintFamily family);
bool is_generation_family(ConstraintFamily family);

struct LinearConstraint {
  std::vector<std::pair<VarId, std::int64_t>> terms;
  Relation relation = Relation::LessEqual;
  std::int64_t rhs = 0;
  ConstraintFamily family = ConstraintFamily::ForceZero;

  std::int64_t activity(std::span<const std::uint8_t> x) const;
  bool satisfied_by(std::span<const std::uint8_t> x) const;
  // Terms sorted and merged, zero coefficients dropped.
  LinearConstraint normalized() const;

  bool operator==(const LinearConstraint&) const = default;
};

enum class Sense { Minimize, Maximize };

// Objective value is (sum coefficients[i] * x[i] + constant) / scale.
struct LinearObjective {
  std::vector<std::int64_t> coefficients;
  std::int64_t constant = 0;
  std::int64_t scale = 1;

  std::int64_t scaled_value(std::span<const std::uint8_t> x) const;
  double value(std::span<const std::uint8_t> x) const {
    return static_cast<double>(scaled_value(x)) / static_cast<double>(scale);
  }
};

struct IlpProblem {
  std::vector<IlpVariable> variables;
  std::vector<LinearConstraint> constraints;
  LinearObjective objective;
  Sense sense = Sense::Minimize;
  std::vector<std::int8_t> fixed;  // -1 free, else the fixed value

  std::size_t size() const { return variables.size(); }
  VarId add_variable(const IlpVariable& v);
  void add_constraint(LinearConstraint c);
  void add_constraints(std::vector<LinearConstraint> cs);
  void fix(VarId var, std::uint8_t value);

  bool feasible(std::span<const std::uint8_t> x) const;
};

// Variables 0..n-1 are the registry indicators, hinted with the given factual values.
IlpProblem make_indicator_problem(const IndicatorRegistry& registry, std::span<const std::uint8_t> hints);

}  // namespace cfx
