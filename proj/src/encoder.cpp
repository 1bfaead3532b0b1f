#include "cfx/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cfx/error.hpp"

namespace cfx {

namespace {

// Sum of a term's literals as +v / (1 - v): linear part plus the count of negated literals.
struct LiteralSum {
  std::vector<std::pair<VarId, std::int64_t>> terms;
  std::int64_t negated = 0;
};

LiteralSum literal_sum(const Term& term) {
  LiteralSum s;
  for (const Literal& l : term.literals) {
    s.terms.emplace_back(l.var, l.positive ? 1 : -1);
    if (!l.positive) ++s.negated;
  }
  return s;
}

std::int64_t as_int(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

std::vector<LinearConstraint> encode_force_zero(const DecisionPolynomial& dp) {
  std::vector<LinearConstraint> out;
  for (const Term& t : dp.terms) {
    auto s = literal_sum(t);
    out.push_back({std::move(s.terms), Relation::LessEqual, as_int(t.size()) - 1 - s.negated,
                   ConstraintFamily::ForceZero});
  }
  return out;
}

namespace {

std::vector<VarId> add_term_selectors(IlpProblem& problem, const DecisionPolynomial& dp, std::size_t tree) {
  std::vector<VarId> deltas;
  for (std::size_t i = 0; i < dp.terms.size(); ++i) {
    const Term& t = dp.terms[i];
    VarId d = problem.add_variable({VarKind::TermDelta, tree, i, 0});
    auto s = literal_sum(t);
    s.terms.emplace_back(d, -as_int(t.size()));
    problem.add_constraint({std::move(s.terms), Relation::GreaterEqual, -s.negated,
                            ConstraintFamily::ForceOneTerm});
    deltas.push_back(d);
  }
  return deltas;
}

}  // namespace

std::vector<VarId> encode_force_one(IlpProblem& problem, const DecisionPolynomial& dp, std::size_t tree_index) {
  if (dp.empty()) {
    throw Error(ErrorCode::EmptyPolynomialUnsatisfiable,
                "class " + std::to_string(dp.target_class) + " is never produced by the model");
  }
  auto deltas = add_term_selectors(problem, dp, tree_index);
  LinearConstraint card{{}, Relation::Equal, 1, ConstraintFamily::ForceOneCardinality};
  for (VarId d : deltas) card.terms.emplace_back(d, 1);
  problem.add_constraint(std::move(card));
  return deltas;
}

VarId encode_tree_indicator(IlpProblem& problem, const DecisionPolynomial& dp, std::size_t tree_index) {
  VarId delta = problem.add_variable({VarKind::TreeDelta, tree_index, 0, 0});
  for (const Term& t : dp.terms) {
    auto s = literal_sum(t);
    s.terms.emplace_back(delta, -1);
    problem.add_constraint({std::move(s.terms), Relation::LessEqual, as_int(t.size()) - 1 - s.negated,
                            ConstraintFamily::TreeIndicator});
  }
  return delta;
}

std::size_t votes_needed(std::size_t trees, int target) {
  return target == 1 ? trees / 2 + 1 : (trees + 1) / 2;
}

void encode_forest(IlpProblem& problem, std::span<const DecisionPolynomial> per_tree, int target) {
  if (per_tree.empty()) throw Error(ErrorCode::InvalidModel, "forest without trees");
  const int polarity = per_tree.front().target_class;
  const std::size_t m = per_tree.size();
  const std::size_t need = votes_needed(m, target);
  LinearConstraint majority{{}, Relation::GreaterEqual, as_int(need), ConstraintFamily::Majority};
  if (polarity == target) {
    bool any_term = false;
    for (std::size_t j = 0; j < m; ++j) {
      VarId vote = problem.add_variable({VarKind::TreeDelta, j, 0, 0});
      auto deltas = add_term_selectors(problem, per_tree[j], j);
      any_term = any_term || !deltas.empty();
      LinearConstraint link{{}, Relation::Equal, 0, ConstraintFamily::TreeLink};
      for (VarId d : deltas) link.terms.emplace_back(d, 1);
      link.terms.emplace_back(vote, -1);
      problem.add_constraint(std::move(link));
      majority.terms.emplace_back(vote, 1);
    }
    if (!any_term) {
      throw Error(ErrorCode::EmptyPolynomialUnsatisfiable,
                  "no tree ever votes for class " + std::to_string(target));
    }
  } else {
    majority.relation = Relation::LessEqual;
    majority.rhs = as_int(m - need);
    for (std::size_t j = 0; j < m; ++j) {
      VarId vote = encode_tree_indicator(problem, per_tree[j], j);
      // A tree that never votes for the polynomial's class keeps its indicator at 0.
      if (per_tree[j].empty()) problem.fix(vote, 0);
      majority.terms.emplace_back(vote, 1);
    }
  }
  problem.add_constraint(std::move(majority));
}

std::vector<LinearConstraint> encode_consistency(const IndicatorRegistry& registry) {
  std::vector<LinearConstraint> out;
  std::set<std::pair<std::vector<std::pair<VarId, std::int64_t>>, std::int64_t>> seen;
  auto emit = [&](LinearConstraint c) {
    c = c.normalized();
    // Canonical <= form for duplicate detection.
    auto key_terms = c.terms;
    std::int64_t key_rhs = c.rhs;
    if (c.relation == Relation::GreaterEqual) {
      for (auto& t : key_terms) t.second = -t.second;
      key_rhs = -key_rhs;
    }
    if (seen.emplace(std::move(key_terms), key_rhs).second) out.push_back(std::move(c));
  };
  for (std::size_t f = 0; f < registry.features().size(); ++f) {
    if (registry.features()[f].kind != FeatureKind::Continuous) continue;
    auto vars = registry.feature_vars(f);
    const std::size_t q = vars.size();
    if (q < 2) continue;
    for (std::size_t k = 0; k < q; ++k) {
      if (k + 1 < q) {
        LinearConstraint above{{}, Relation::GreaterEqual, 0, ConstraintFamily::Consistency};
        for (std::size_t b = k + 1; b < q; ++b) above.terms.emplace_back(vars[b], 1);
        above.terms.emplace_back(vars[k], -as_int(q - k - 1));
        emit(std::move(above));
      }
      if (k > 0) {
        LinearConstraint below{{}, Relation::LessEqual, 0, ConstraintFamily::Consistency};
        for (std::size_t b = 0; b < k; ++b) below.terms.emplace_back(vars[b], 1);
        below.terms.emplace_back(vars[k], -as_int(k));
        emit(std::move(below));
      }
    }
  }
  return out;
}

std::vector<LinearConstraint> encode_onehot(const IndicatorRegistry& registry) {
  std::vector<LinearConstraint> out;
  for (std::size_t f = 0; f < registry.features().size(); ++f) {
    if (registry.features()[f].kind != FeatureKind::Categorical) continue;
    LinearConstraint c{{}, Relation::Equal, 1, ConstraintFamily::OneHot};
    for (VarId id : registry.feature_vars(f)) c.terms.emplace_back(id, 1);
    out.push_back(std::move(c));
  }
  return out;
}

LinearObjective build_objective(const IndicatorRegistry& registry, std::span<const std::uint8_t> factual,
                                const WeightVector& weights) {
  if (weights.values.size() != registry.size()) {
    throw Error(ErrorCode::MissingWeight, "weight vector covers " + std::to_string(weights.values.size()) +
                                              " of " + std::to_string(registry.size()) + " indicators");
  }
  LinearObjective obj;
  obj.coefficients.assign(registry.size(), 0);
  obj.scale = 2 * kWeightUnitsPerOne;
  for (VarId id = 0; id < registry.size(); ++id) {
    std::int64_t units = weight_units(weights.values[id]);
    std::int64_t w = registry.at(id).kind == Indicator::Kind::Threshold ? 2 * units : units;
    if (factual[id]) {
      obj.coefficients[id] = -w;
      obj.constant += w;
    } else {
      obj.coefficients[id] = w;
    }
  }
  return obj;
}

Condition Condition::between(std::string feature, double lo, double hi) {
  return {std::move(feature), Kind::Interval, Interval{lo, hi, true, true}, {}};
}
Condition Condition::greater_than(std::string feature, double value) {
  return {std::move(feature), Kind::Interval,
          Interval{value, std::numeric_limits<double>::infinity(), false, false}, {}};
}
Condition Condition::at_least(std::string feature, double value) {
  return {std::move(feature), Kind::Interval,
          Interval{value, std::numeric_limits<double>::infinity(), true, false}, {}};
}
Condition Condition::less_than(std::string feature, double value) {
  return {std::move(feature), Kind::Interval,
          Interval{-std::numeric_limits<double>::infinity(), value, false, false}, {}};
}
Condition Condition::at_most(std::string feature, double value) {
  return {std::move(feature), Kind::Interval,
          Interval{-std::numeric_limits<double>::infinity(), value, false, true}, {}};
}
Condition Condition::equals(std::string feature, std::string category) {
  return {std::move(feature), Kind::Equals, {}, std::move(category)};
}
Condition Condition::not_equals(std::string feature, std::string category) {
  return {std::move(feature), Kind::NotEquals, {}, std::move(category)};
}
Condition Condition::keep(std::string feature) { return {std::move(feature), Kind::Keep, {}, {}}; }

namespace {

std::size_t resolve_feature(const FeatureList& features, const std::string& name) {
  auto f = find_feature(features, name);
  if (!f) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + name + "'");
  return *f;
}

std::size_t resolve_category(const Feature& feature, const std::string& category) {
  auto c = find_category(feature, category);
  if (!c) {
    throw Error(ErrorCode::InvalidCondition,
                "unknown category '" + category + "' for feature '" + feature.name + "'");
  }
  return *c;
}

// Interval form of a continuous condition, or nullopt for conditions that are not intervals.
std::optional<Interval> as_interval(const Feature& feature, const Condition& c) {
  if (c.kind == Condition::Kind::Interval) return c.interval;
  if (c.kind == Condition::Kind::Equals) {
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(c.category, &used);
      if (used != c.category.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidCondition,
                  "feature '" + feature.name + "' is continuous; '" + c.category + "' is not a number");
    }
    return Interval{v, v, true, true};
  }
  return std::nullopt;
}

}  // namespace

Interval condition_interval(const FeatureList& features, std::size_t feature,
                            std::span<const Condition> conditions) {
  Interval out{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false, false};
  if (features[feature].kind != FeatureKind::Continuous) return out;
  for (const auto& c : conditions) {
    if (c.feature != features[feature].name) continue;
    if (auto iv = as_interval(features[feature], c)) out = out.intersect(*iv);
  }
  return out;
}

IlpProblem apply_conditions(IlpProblem problem, const IndicatorRegistry& registry,
                            std::span<const Condition> conditions, const Instance* factual) {
  const FeatureList& features = registry.features();
  Assignment factual_bits;
  if (factual) factual_bits = registry.indicators_of(*factual);
  for (const auto& c : conditions) {
    const std::size_t f = resolve_feature(features, c.feature);
    const Feature& feature = features[f];
    auto vars = registry.feature_vars(f);
    if (c.kind == Condition::Kind::Keep) {
      if (!factual) throw Error(ErrorCode::InvalidCondition, "keep condition needs a factual instance");
      for (VarId id : vars) problem.fix(id, factual_bits[id]);
      continue;
    }
    if (feature.kind == FeatureKind::Continuous) {
      if (c.kind == Condition::Kind::NotEquals) {
        throw Error(ErrorCode::InvalidCondition, "'!=' is not supported on continuous feature '" + feature.name + "'");
      }
      Interval iv = *as_interval(feature, c);
      if (iv.empty()) {
        throw Error(ErrorCode::InfeasibleCondition, "empty interval for feature '" + feature.name + "'");
      }
      for (VarId id : vars) {
        double t = registry.at(id).threshold;
        if (iv.hi <= t) {
          problem.fix(id, 1);
        } else if (iv.lo_closed ? iv.lo > t : iv.lo >= t) {
          problem.fix(id, 0);
        }
      }
      continue;
    }
    if (c.kind == Condition::Kind::Interval) {
      throw Error(ErrorCode::InvalidCondition, "interval condition on categorical feature '" + feature.name + "'");
    }
    const std::size_t cat = resolve_category(feature, c.category);
    if (c.kind == Condition::Kind::Equals) {
      for (std::size_t k = 0; k < vars.size(); ++k) problem.fix(vars[k], k == cat ? 1 : 0);
    } else {
      problem.fix(vars[cat], 0);
    }
  }
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind == FeatureKind::Continuous) {
      // Each condition may be satisfiable alone while their intersection is empty.
      if (condition_interval(features, f, conditions).empty()) {
        throw Error(ErrorCode::InfeasibleCondition, "conditions on '" + features[f].name + "' do not overlap");
      }
      continue;
    }
    auto vars = registry.feature_vars(f);
    if (std::all_of(vars.begin(), vars.end(), [&](VarId id) { return problem.fixed[id] == 0; })) {
      throw Error(ErrorCode::InfeasibleCondition, "conditions exclude every category of '" + features[f].name + "'");
    }
  }
  return problem;
}

ModelPolynomials model_polynomials(const Model& model, const EnumerationOptions& options) {
  ModelPolynomials out;
  if (const auto* nb = std::get_if<NaiveBayesModel>(&model)) {
    auto zero = dp_from_enumerable(*nb, 0, options);
    auto one = dp_from_enumerable(*nb, 1, options);
    out.registry = zero.registry;
    one.registry = out.registry;
    out.zero.push_back(std::move(zero));
    out.one.push_back(std::move(one));
    return out;
  }
  out.registry = std::make_shared<const IndicatorRegistry>(build_registry(model));
  std::span<const DecisionTree> trees;
  if (const auto* dt = std::get_if<DecisionTreeModel>(&model)) {
    trees = std::span<const DecisionTree>(&dt->tree, 1);
  } else {
    trees = std::get<RandomForestModel>(model).trees;
  }
  for (const auto& t : trees) {
    out.zero.push_back(dp_from_tree(t, 0, out.registry));
    out.one.push_back(dp_from_tree(t, 1, out.registry));
  }
  return out;
}

int choose_polarity(const ModelPolynomials& dps, Polarity requested) {
  if (requested == Polarity::Zero) return 0;
  if (requested == Polarity::One) return 1;
  auto count = [](const std::vector<DecisionPolynomial>& v) {
    std::size_t n = 0;
    for (const auto& dp : v) n += dp.size();
    return n;
  };
  return count(dps.one) < count(dps.zero) ? 1 : 0;
}

namespace {

EncodedProblem encode_generation(const Model& model, const Instance& factual, int target, Polarity polarity,
                                 const EnumerationOptions& options) {
  validate_instance(features_of(model), factual);
  ModelPolynomials dps = model_polynomials(model, options);
  EncodedProblem out;
  out.registry = dps.registry;
  out.target_class = target;
  out.polarity = choose_polarity(dps, polarity);
  out.polynomials = out.polarity == 0 ? std::move(dps.zero) : std::move(dps.one);
  const Assignment hints = out.registry->indicators_of(factual);
  out.problem = make_indicator_problem(*out.registry, hints);
  if (std::holds_alternative<RandomForestModel>(model)) {
    encode_forest(out.problem, out.polynomials, target);
  } else if (out.polarity == target) {
    encode_force_one(out.problem, out.polynomials.front());
  } else {
    out.problem.add_constraints(encode_force_zero(out.polynomials.front()));
  }
  out.problem.add_constraints(encode_consistency(*out.registry));
  out.problem.add_constraints(encode_onehot(*out.registry));
  return out;
}

}  // namespace

EncodedProblem encode_counterfactual(const Model& model, const Instance& factual, const WeightVector& weights,
                                     int target, Polarity polarity, const EnumerationOptions& options) {
  EncodedProblem out = encode_generation(model, factual, target, polarity, options);
  const Assignment hints = out.registry->indicators_of(factual);
  out.problem.objective = build_objective(*out.registry, hints, weights);
  out.problem.objective.coefficients.resize(out.problem.size(), 0);
  out.problem.sense = Sense::Minimize;
  return out;
}

EncodedProblem encode_prime_implicant(const Model& model, const Instance& factual,
                                      std::span<const std::string> keep, Polarity polarity,
                                      const EnumerationOptions& options) {
  const int label = evaluate(model, factual);
  EncodedProblem out = encode_generation(model, factual, label, polarity, options);
  const IndicatorRegistry& reg = *out.registry;
  const Assignment hints = reg.indicators_of(factual);
  std::vector<bool> kept(reg.features().size(), false);
  std::vector<Condition> keep_conditions;
  for (const auto& name : keep) {
    kept[resolve_feature(reg.features(), name)] = true;
    keep_conditions.push_back(Condition::keep(name));
  }
  IlpProblem& p = out.problem;
  p.objective = LinearObjective{};
  p.objective.coefficients.assign(p.size(), 0);
  p.sense = Sense::Maximize;
  for (std::size_t f = 0; f < reg.features().size(); ++f) {
    auto vars = reg.feature_vars(f);
    if (vars.empty()) {
      if (!kept[f]) ++p.objective.constant;
      continue;
    }
    VarId changed = p.add_variable({VarKind::FeatureChange, f, 0, 1});
    // changed <= number of flipped indicators of the feature
    LinearConstraint c{{{changed, 1}}, Relation::LessEqual, 0, ConstraintFamily::FeatureChange};
    for (VarId id : vars) {
      if (hints[id]) {
        c.terms.emplace_back(id, 1);
        ++c.rhs;
      } else {
        c.terms.emplace_back(id, -1);
      }
    }
    p.add_constraint(std::move(c));
    p.objective.coefficients[changed] = 1;
  }
  out.problem = apply_conditions(std::move(out.problem), reg, keep_conditions, &factual);
  return out;
}

EncodingStats encoding_stats(const IlpProblem& problem) {
  EncodingStats s;
  s.variables = problem.size();
  s.constraints = problem.constraints.size();
  for (const auto& c : problem.constraints) {
    ++s.by_family[std::string(to_string(c.family))];
    if (is_generation_family(c.family)) ++s.generation;
    if (c.family == ConstraintFamily::Consistency) ++s.consistency;
  }
  s.fixed = static_cast<std::size_t>(std::count_if(problem.fixed.begin(), problem.fixed.end(),
                                                   [](std::int8_t v) { return v >= 0; }));
  return s;
}

std::string variable_name(const IlpProblem& problem, const IndicatorRegistry& registry, VarId id) {
  const IlpVariable& v = problem.variables[id];
  switch (v.kind) {
    case VarKind::Indicator: return "1[" + registry.label(static_cast<VarId>(v.index)) + "]";
    case VarKind::TermDelta: return "delta[" + std::to_string(v.index) + "," + std::to_string(v.term) + "]";
    case VarKind::TreeDelta: return "delta[" + std::to_string(v.index) + "]";
    case VarKind::FeatureChange: return "changed[" + registry.features()[v.index].name + "]";
  }
  return "?";
}

void write_lp(std::ostream& out, const IlpProblem& problem, const IndicatorRegistry& registry) {
  auto term = [](std::int64_t coef, VarId id) {
    return std::string(coef < 0 ? " - " : " + ") + std::to_string(coef < 0 ? -coef : coef) + " x" +
           std::to_string(id);
  };
  out << "\\ cfx-lp/1\n";
  out << "\\ objective scale " << problem.objective.scale << "\n";
  for (VarId id = 0; id < problem.size(); ++id) {
    out << "\\ x" << id << " " << variable_name(problem, registry, id) << "\n";
  }
  out << (problem.sense == Sense::Minimize ? "minimize\n" : "maximize\n");
  out << " obj:";
  bool any = false;
  for (VarId id = 0; id < problem.objective.coefficients.size(); ++id) {
    if (problem.objective.coefficients[id] == 0) continue;
    out << term(problem.objective.coefficients[id], id);
    any = true;
  }
  if (problem.objective.constant != 0 || !any) {
    std::int64_t k = problem.objective.constant;
    out << (k < 0 ? " - " : " + ") << (k < 0 ? -k : k);
  }
  out << "\nsubject to\n";
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& c = problem.constraints[i];
    out << " c" << i << ":";
    for (const auto& [id, coef] : c.terms) out << term(coef, id);
    out << (c.relation == Relation::LessEqual ? " <= " : c.relation == Relation::GreaterEqual ? " >= " : " = ")
        << c.rhs << "\n";
  }
  out << "bounds\n";
  for (VarId id = 0; id < problem.size(); ++id) {
    if (problem.fixed[id] >= 0) out << " x" << id << " = " << int(problem.fixed[id]) << "\n";
  }
  out << "binary\n";
  for (VarId id = 0; id < problem.size(); ++id) out << " x" << id << "\n";
  out << "end\n";
}

}  // namespace cfx
