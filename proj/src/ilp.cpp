#include "cfx/ilp.hpp"

#include <algorithm>

#include "cfx/error.hpp"

namespace cfx {

std::string_view to_string(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::ForceZero: return "force_zero";
    case ConstraintFamily::ForceOneTerm: return "force_one_term";
    case ConstraintFamily::ForceOneCardinality: return "force_one_cardinality";
    case ConstraintFamily::TreeIndicator: return "tree_indicator";
    case ConstraintFamily::TreeLink: return "tree_link";
    case ConstraintFamily::Majority: return "majority";
    case ConstraintFamily::Consistency: return "consistency";
    case ConstraintFamily::OneHot: return "onehot";
    case ConstraintFamily::FeatureChange: return "feature_change";
    case ConstraintFamily::NoGood: return "nogood";
  }
  return "unknown";
}

bool is_generation_family(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::ForceZero:
    case ConstraintFamily::ForceOneTerm:
    case ConstraintFamily::ForceOneCardinality:
    case ConstraintFamily::TreeIndicator:
    case ConstraintFamily::TreeLink:
    case ConstraintFamily::Majority:
      return true;
    default:
      return false;
  }
}

std::int64_t LinearConstraint::activity(std::span<const std::uint8_t> x) const {
  std::int64_t sum = 0;
  for (const auto& [var, coef] : terms) sum += x[var] ? coef : 0;
  return sum;
}

bool LinearConstraint::satisfied_by(std::span<const std::uint8_t> x) const {
  std::int64_t a = activity(x);
  switch (relation) {
    case Relation::LessEqual: return a <= rhs;
    case Relation::GreaterEqual: return a >= rhs;
    case Relation::Equal: return a == rhs;
  }
  return false;
}

LinearConstraint LinearConstraint::normalized() const {
  LinearConstraint out = *this;
  std::sort(out.terms.begin(), out.terms.end());
  std::vector<std::pair<VarId, std::int64_t>> merged;
  for (const auto& t : out.terms) {
    if (!merged.empty() && merged.back().first == t.first) {
      merged.back().second += t.second;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const auto& t) { return t.second == 0; });
  out.terms = std::move(merged);
  return out;
}

std::int64_t LinearObjective::scaled_value(std::span<const std::uint8_t> x) const {
  std::int64_t sum = constant;
  for (std::size_t i = 0; i < coefficients.size() && i < x.size(); ++i) sum += x[i] ? coefficients[i] : 0;
  return sum;
}

VarId IlpProblem::add_variable(const IlpVariable& v) {
  variables.push_back(v);
  fixed.push_back(-1);
  objective.coefficients.resize(variables.size(), 0);
  return static_cast<VarId>(variables.size() - 1);
}

void IlpProblem::add_constraint(LinearConstraint c) {
  c = c.normalized();
  if (c.terms.empty()) throw Error(ErrorCode::InvalidModel, "constraint without nonzero coefficients");
  constraints.push_back(std::move(c));
}

void IlpProblem::add_constraints(std::vector<LinearConstraint> cs) {
  for (auto& c : cs) add_constraint(std::move(c));
}

void IlpProblem::fix(VarId var, std::uint8_t value) {
  if (fixed[var] >= 0 && fixed[var] != value) {
    throw Error(ErrorCode::InfeasibleCondition, "variable fixed to both 0 and 1");
  }
  fixed[var] = static_cast<std::int8_t>(value);
}

bool IlpProblem::feasible(std::span<const std::uint8_t> x) const {
  if (x.size() != variables.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1) return false;
    if (fixed[i] >= 0 && x[i] != fixed[i]) return false;
  }
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const LinearConstraint& c) { return c.satisfied_by(x); });
}

IlpProblem make_indicator_problem(const IndicatorRegistry& registry, std::span<const std::uint8_t> hints) {
  IlpProblem p;
  for (VarId id = 0; id < registry.size(); ++id) {
    p.add_variable({VarKind::Indicator, id, 0, id < hints.size() ? hints[id] : std::uint8_t{0}});
  }
  return p;
}

}  // namespace cfx
