#include "cfx/explainer.hpp"

#include <algorithm>
#include <cmath>

#include "cfx/error.hpp"

namespace cfx {

int resolve_target(const Model& model, const Instance& factual, std::optional<int> target) {
  validate_instance(features_of(model), factual);
  const int predicted = evaluate(model, factual);
  if (!target) return 1 - predicted;
  if (*target != 0 && *target != 1) throw Error(ErrorCode::InvalidCondition, "target class must be 0 or 1");
  if (*target == predicted) {
    throw Error(ErrorCode::TargetIsPrediction,
                "the factual is already classified as " + std::to_string(predicted));
  }
  return *target;
}

CounterfactualSet decode_solution(const IndicatorRegistry& registry, const Instance& factual,
                                  std::span<const std::uint8_t> assignment, std::span<const Condition> conditions) {
  const auto n = registry.size();
  if (assignment.size() < n) throw Error(ErrorCode::InconsistentAssignment, "assignment too short");
  auto cells = registry.cells_from_assignment(assignment.first(n));
  if (!cells) throw Error(ErrorCode::InconsistentAssignment, "assignment selects an empty region");
  const FeatureList& features = registry.features();
  CounterfactualSet out;
  out.indicators.assign(assignment.begin(), assignment.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t f = 0; f < features.size(); ++f) {
    FeatureCondition fc;
    fc.feature = f;
    if (features[f].kind == FeatureKind::Categorical) {
      fc.category = (*cells)[f];
      fc.changed = fc.category != factual.values[f].category;
    } else {
      fc.interval = registry.cell_interval(f, (*cells)[f]).intersect(condition_interval(features, f, conditions));
      if (fc.interval.empty()) throw Error(ErrorCode::InconsistentAssignment, "region of '" + features[f].name + "' is empty");
      fc.changed = !fc.interval.contains(factual.values[f].number);
    }
    out.conditions.push_back(fc);
  }
  return out;
}

namespace {

[[noreturn]] void raise_status(SolveStatus status) {
  if (status == SolveStatus::CapExceeded) {
    throw Error(ErrorCode::CapExceeded, "solver node or time limit reached");
  }
  throw Error(ErrorCode::Infeasible, "no assignment satisfies the constraints");
}

EncodedProblem prepare(const Model& model, const Instance& factual, const WeightVector& weights, int target,
                       std::span<const Condition> conditions, const ExplainOptions& options) {
  EncodedProblem enc = encode_counterfactual(model, factual, weights, target, options.polarity, options.enumeration);
  enc.problem = apply_conditions(std::move(enc.problem), *enc.registry, conditions, &factual);
  return enc;
}

ProblemShape shape_of(const EncodedProblem& enc) {
  return {enc.problem.size(), enc.problem.constraints.size(), enc.polarity};
}

CounterfactualSet decode(const EncodedProblem& enc, const Instance& factual, const Solution& s,
                         std::span<const Condition> conditions) {
  CounterfactualSet set = decode_solution(*enc.registry, factual, s.assignment, conditions);
  set.target_class = enc.target_class;
  set.objective_scaled = s.objective_scaled;
  set.scale = s.scale;
  set.stats = s.stats;
  set.shape = shape_of(enc);
  return set;
}

}  // namespace

CounterfactualSet counterfactual(const Model& model, const Instance& factual, const WeightVector& weights,
                                 std::optional<int> target, std::span<const Condition> conditions,
                                 const ExplainOptions& options) {
  const int t = resolve_target(model, factual, target);
  EncodedProblem enc = prepare(model, factual, weights, t, conditions, options);
  Solution s = solve(enc.problem, options.solver);
  if (!s.optimal()) raise_status(s.status);
  return decode(enc, factual, s, conditions);
}

std::vector<CounterfactualSet> diverse_counterfactual(const Model& model, const Instance& factual,
                                                      const WeightVector& weights,
                                                      std::span<const Condition> conditions, std::size_t k,
                                                      std::optional<int> target, const ExplainOptions& options) {
  const int t = resolve_target(model, factual, target);
  EncodedProblem enc = prepare(model, factual, weights, t, conditions, options);
  TopK top = enumerate_topk(enc.problem, k, options.solver);
  if (top.status != SolveStatus::Optimal) raise_status(top.status);
  std::vector<CounterfactualSet> out;
  for (const auto& s : top.solutions) out.push_back(decode(enc, factual, s, conditions));
  return out;
}

RobustnessResult robustness(const Model& model, const Instance& factual, const ExplainOptions& options) {
  auto registry = build_registry(model);
  RobustnessResult r;
  r.witness = counterfactual(model, factual, uniform_weights(registry), std::nullopt, {}, options);
  // Uniform weights make every unit of the objective one threshold crossing or category switch.
  r.value = r.witness.objective_scaled / r.witness.scale;
  return r;
}

std::string_view to_string(Verification v) {
  switch (v) {
    case Verification::Verified: return "verified";
    case Verification::Refuted: return "refuted";
    case Verification::Skipped: return "skipped";
  }
  return "unknown";
}

std::optional<Instance> find_pi_counterexample(const Model& model, const IndicatorRegistry& registry,
                                               const Instance& factual, std::span<const std::size_t> kept,
                                               std::uint64_t cap) {
  const std::size_t nf = registry.features().size();
  std::vector<bool> is_kept(nf, false);
  for (auto f : kept) is_kept.at(f) = true;
  std::vector<std::size_t> free;
  std::uint64_t total = 1;
  for (std::size_t f = 0; f < nf; ++f) {
    if (is_kept[f]) continue;
    free.push_back(f);
    const std::uint64_t c = registry.cell_count(f);
    if (total > cap / c) {
      throw Error(ErrorCode::VerificationCapExceeded, "too many cell combinations to verify the implicant");
    }
    total *= c;
  }
  const int label = evaluate(model, factual);
  std::vector<std::size_t> digit(free.size(), 0);
  Instance x = factual;
  for (std::uint64_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < free.size(); ++k) x.values[free[k]] = registry.representative(free[k], digit[k]);
    if (evaluate(model, x) != label) return x;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (++digit[k] < registry.cell_count(free[k])) break;
      digit[k] = 0;
    }
  }
  return std::nullopt;
}

PrimeImplicantResult prime_implicants(const Model& model, const Instance& factual, std::span<const std::string> keep,
                                      const ExplainOptions& options) {
  validate_instance(features_of(model), factual);
  EncodedProblem enc = encode_prime_implicant(model, factual, keep, options.polarity, options.enumeration);
  Solution s = solve(enc.problem, options.solver);
  if (!s.optimal()) raise_status(s.status);
  const IndicatorRegistry& reg = *enc.registry;
  const FeatureList& features = reg.features();
  PrimeImplicantResult out;
  out.predicted_class = enc.target_class;
  out.stats = s.stats;
  out.shape = shape_of(enc);
  out.indicators.assign(s.assignment.begin(), s.assignment.begin() + static_cast<std::ptrdiff_t>(reg.size()));
  auto cells = reg.cells_from_assignment(out.indicators);
  if (!cells) throw Error(ErrorCode::InconsistentAssignment, "solver returned an inconsistent assignment");
  const auto factual_cells = reg.cells_of(factual);
  std::vector<bool> kept(features.size(), false);
  for (const auto& name : keep) kept[*find_feature(features, name)] = true;
  for (std::size_t f = 0; f < features.size(); ++f) {
    // Features without indicators are irrelevant to the model; they stay in Z only when kept.
    const bool stays = reg.feature_vars(f).empty() ? kept[f] : (*cells)[f] == factual_cells[f];
    (stays ? out.implicant : out.changed).push_back(f);
  }
  try {
    out.counterexample = find_pi_counterexample(model, reg, factual, out.implicant, options.verification_cap);
    out.verification = out.counterexample ? Verification::Refuted : Verification::Verified;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::VerificationCapExceeded) throw;
    out.verification = Verification::Skipped;
  }
  return out;
}

namespace {

double sample_continuous(const Interval& iv, std::mt19937_64& rng) {
  const double inf = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool has_lo = std::isfinite(iv.lo), has_hi = std::isfinite(iv.hi);
  // Edge points the region includes.
  std::vector<double> edges;
  if (has_hi) edges.push_back(iv.hi_closed ? iv.hi : std::nextafter(iv.hi, -inf));
  if (has_lo) edges.push_back(iv.lo_closed ? iv.lo : std::nextafter(iv.lo, inf));
  std::erase_if(edges, [&](double x) { return !iv.contains(x); });
  if (!edges.empty() && unit(rng) < 0.2) {
    return edges[std::uniform_int_distribution<std::size_t>(0, edges.size() - 1)(rng)];
  }
  double x = 0.0;
  if (has_lo && has_hi) {
    x = iv.lo + (iv.hi - iv.lo) * unit(rng);
  } else if (has_lo || has_hi) {
    const double anchor = has_lo ? iv.lo : iv.hi;
    std::exponential_distribution<double> tail(1.0 / std::max(1.0, std::abs(anchor)));
    x = has_lo ? anchor + tail(rng) : anchor - tail(rng);
  } else {
    x = std::normal_distribution<double>(0.0, 100.0)(rng);
  }
  if (iv.contains(x)) return x;
  return edges.empty() ? 0.0 : edges.front();
}

}  // namespace

std::vector<Instance> sample_region(const IndicatorRegistry& registry, const CounterfactualSet& set,
                                    std::size_t count, std::mt19937_64& rng) {
  std::vector<Instance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Instance x;
    for (const auto& fc : set.conditions) {
      if (registry.features()[fc.feature].kind == FeatureKind::Categorical) {
        x.values.push_back(Value::of_category(fc.category));
      } else {
        x.values.push_back(Value::of(sample_continuous(fc.interval, rng)));
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace cfx
