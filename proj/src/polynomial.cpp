#include "cfx/polynomial.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cfx/error.hpp"

namespace cfx {

std::size_t Term::negated_count() const {
  return static_cast<std::size_t>(
      std::count_if(literals.begin(), literals.end(), [](const Literal& l) { return !l.positive; }));
}

bool Term::satisfied_by(std::span<const std::uint8_t> assignment) const {
  for (const Literal& l : literals) {
    if ((assignment[l.var] != 0) != l.positive) return false;
  }
  return true;
}

std::string to_string(const DecisionPolynomial& dp) {
  if (dp.terms.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < dp.terms.size(); ++i) {
    if (i) os << " + ";
    const auto& lits = dp.terms[i].literals;
    for (std::size_t j = 0; j < lits.size(); ++j) {
      if (j) os << "*";
      std::string name = "1[" + dp.registry->label(lits[j].var) + "]";
      os << (lits[j].positive ? name : "(1-" + name + ")");
    }
  }
  return os.str();
}

namespace {

// Literals from a path, or nullopt when the path tests one predicate with both outcomes.
std::optional<Term> term_from_path(const TreePath& path, const IndicatorRegistry& registry) {
  std::map<VarId, bool> seen;
  for (const auto& pl : path.literals) {
    auto var = registry.var_for(pl.predicate);
    if (!var) throw Error(ErrorCode::UnknownFeature, "path predicate missing from registry");
    auto [it, inserted] = seen.emplace(*var, pl.positive);
    if (!inserted && it->second != pl.positive) return std::nullopt;
  }
  Term t;
  for (const auto& [var, positive] : seen) t.literals.push_back({var, positive});
  return t;
}

template <typename Label>
DecisionPolynomial enumerate_terms(const FeatureList& features, int target_class,
                                   const EnumerationOptions& options, Label&& label_of) {
  for (const auto& f : features) {
    if (f.kind != FeatureKind::Categorical) {
      throw Error(ErrorCode::InvalidModel, "enumerable classifiers take categorical features only");
    }
  }
  auto registry = std::make_shared<const IndicatorRegistry>(features, std::vector<std::vector<double>>{});
  if (registry->space_size() > options.max_assignments) {
    throw Error(ErrorCode::EnumerationCapExceeded,
                "joint assignment count exceeds the enumeration cap of " +
                    std::to_string(options.max_assignments));
  }
  DecisionPolynomial dp{target_class, {}, registry};
  std::vector<std::size_t> cells(features.size(), 0);
  Instance instance;
  instance.values.resize(features.size());
  std::size_t index = 0;
  while (true) {
    for (std::size_t f = 0; f < features.size(); ++f) instance.values[f] = Value::of_category(cells[f]);
    if (label_of(instance, index) == target_class) {
      Term t;
      for (std::size_t f = 0; f < features.size(); ++f) {
        if (features[f].categories.size() == 2) {
          t.literals.push_back({*registry->category_var(f, 1), cells[f] == 1});
        } else {
          t.literals.push_back({*registry->category_var(f, cells[f]), true});
        }
      }
      std::sort(t.literals.begin(), t.literals.end());
      dp.terms.push_back(std::move(t));
    }
    ++index;
    // Odometer, last feature fastest.
    std::size_t f = features.size();
    while (f > 0) {
      --f;
      if (++cells[f] < features[f].categories.size()) break;
      cells[f] = 0;
      if (f == 0) return reduce_dp(dp);
    }
    if (features.empty()) return reduce_dp(dp);
  }
}

struct TermHash {
  std::size_t operator()(const std::vector<Literal>& lits) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (const Literal& l : lits) {
      h ^= (static_cast<std::size_t>(l.var) << 1) | (l.positive ? 1u : 0u);
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

DecisionPolynomial dp_from_tree(const DecisionTree& tree, int target_class,
                                std::shared_ptr<const IndicatorRegistry> registry) {
  DecisionPolynomial dp{target_class, {}, registry};
  std::set<Term> seen;
  for (const auto& path : enumerate_paths(tree)) {
    if (path.label != target_class) continue;
    auto term = term_from_path(path, *registry);
    if (!term || !seen.insert(*term).second) continue;
    dp.terms.push_back(std::move(*term));
  }
  return dp;
}

DecisionPolynomial dp_from_tree(const DecisionTreeModel& model, int target_class) {
  auto registry = std::make_shared<const IndicatorRegistry>(
      build_registry(model.features, std::span<const DecisionTree>(&model.tree, 1)));
  return dp_from_tree(model.tree, target_class, std::move(registry));
}

DecisionPolynomial dp_from_enumerable(const NaiveBayesModel& model, int target_class,
                                      const EnumerationOptions& options) {
  return enumerate_terms(model.features, target_class, options,
                         [&](const Instance& x, std::size_t) {
                           auto s = naive_bayes_log_scores(model, x);
                           return decide_scores(s[0], s[1]);
                         });
}

DecisionPolynomial dp_from_enumerable(const TruthTable& table, int target_class,
                                      const EnumerationOptions& options) {
  std::size_t expected = 1;
  for (const auto& f : table.features) expected *= std::max<std::size_t>(f.categories.size(), 1);
  if (table.labels.size() != expected) {
    throw Error(ErrorCode::InvalidModel, "truth table size does not match its features");
  }
  return enumerate_terms(table.features, target_class, options,
                         [&](const Instance&, std::size_t index) { return table.labels[index]; });
}

DecisionPolynomial reduce_dp(const DecisionPolynomial& dp) {
  std::vector<Term> terms = dp.terms;
  const std::size_t vars = dp.registry ? dp.registry->size() : 0;
  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    for (VarId v = 0; v < vars; ++v) {
      // rest-of-term -> {index of term with v positive, index with v negated}
      std::unordered_map<std::vector<Literal>, std::pair<long, long>, TermHash> groups;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& lits = terms[i].literals;
        auto it = std::find_if(lits.begin(), lits.end(), [&](const Literal& l) { return l.var == v; });
        if (it == lits.end()) continue;
        std::vector<Literal> rest;
        rest.reserve(lits.size() - 1);
        rest.insert(rest.end(), lits.begin(), it);
        rest.insert(rest.end(), it + 1, lits.end());
        if (rest.empty()) continue;
        auto& slot = groups.try_emplace(std::move(rest), -1, -1).first->second;
        (it->positive ? slot.first : slot.second) = static_cast<long>(i);
      }
      std::vector<bool> removed(terms.size(), false);
      std::vector<Term> added;
      for (auto& [rest, pair] : groups) {
        if (pair.first < 0 || pair.second < 0) continue;
        removed[pair.first] = removed[pair.second] = true;
        added.push_back(Term{rest});
      }
      if (added.empty()) continue;
      merged_any = true;
      std::vector<Term> next;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        if (!removed[i]) next.push_back(std::move(terms[i]));
      }
      for (auto& t : added) next.push_back(std::move(t));
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      terms = std::move(next);
    }
  }
  std::sort(terms.begin(), terms.end());
  return DecisionPolynomial{dp.target_class, std::move(terms), dp.registry};
}

int eval_dp(const DecisionPolynomial& dp, std::span<const std::uint8_t> assignment) {
  if (!dp.registry->is_consistent(assignment)) {
    throw Error(ErrorCode::InconsistentAssignment, "assignment is not realizable");
  }
  int total = 0;
  for (const auto& t : dp.terms) total += t.satisfied_by(assignment) ? 1 : 0;
  return total;
}

bool check_complementary(const DecisionPolynomial& p0, const DecisionPolynomial& p1, std::size_t max_assignments) {
  const IndicatorRegistry& reg = *p0.registry;
  if (p1.registry != p0.registry && !(*p1.registry == reg)) {
    throw Error(ErrorCode::InvalidModel, "decision polynomials do not share a registry");
  }
  if (reg.space_size() > max_assignments) {
    throw Error(ErrorCode::EnumerationCapExceeded, "consistent assignment space exceeds the cap");
  }
  const std::size_t n = reg.features().size();
  std::vector<std::size_t> cells(n, 0);
  while (true) {
    Assignment a = reg.assignment_from_cells(cells);
    if (eval_dp(p0, a) + eval_dp(p1, a) != 1) return false;
    std::size_t f = n;
    while (f > 0) {
      --f;
      if (++cells[f] < reg.cell_count(f)) break;
      cells[f] = 0;
      if (f == 0) return true;
    }
    if (n == 0) return true;
  }
}

}  // namespace cfx
