#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfx/encoder.hpp"
#include "cfx/solver.hpp"

namespace cfx {

// Size of the solved problem and the polynomial class it was built from.
struct ProblemShape {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  int polarity = 0;

  bool operator==(const ProblemShape&) const = default;
};

// Region of one feature in a counterfactual set.
struct FeatureCondition {
  std::size_t feature = 0;
  bool changed = false;
  Interval interval;          // continuous features
  std::size_t category = 0;   // categorical features

  bool operator==(const FeatureCondition&) const = default;
};

struct CounterfactualSet {
  int target_class = 0;
  std::int64_t objective_scaled = 0;
  std::int64_t scale = 1;
  std::vector<FeatureCondition> conditions;  // one per feature, declaration order
  Assignment indicators;                     // registry part of the solver assignment
  SolveStats stats;
  ProblemShape shape;

  double objective() const { return static_cast<double>(objective_scaled) / static_cast<double>(scale); }
  bool operator==(const CounterfactualSet&) const = default;
};

struct ExplainOptions {
  Polarity polarity = Polarity::Auto;
  SolverConfig solver;
  EnumerationOptions enumeration;
  std::uint64_t verification_cap = 1'000'000;  // prime implicant verification
};

// Target class when the caller leaves it open: the complement of the prediction.
int resolve_target(const Model& model, const Instance& factual, std::optional<int> target);

// Region selected by the assignment, narrowed by interval conditions. A feature is unchanged
// when the factual value lies in its region. Throws InconsistentAssignment.
CounterfactualSet decode_solution(const IndicatorRegistry& registry, const Instance& factual,
                                  std::span<const std::uint8_t> assignment,
                                  std::span<const Condition> conditions = {});

CounterfactualSet counterfactual(const Model& model, const Instance& factual, const WeightVector& weights,
                                 std::optional<int> target = std::nullopt,
                                 std::span<const Condition> conditions = {}, const ExplainOptions& options = {});

// Up to k regions in objective order, each satisfying the conditions. Throws Infeasible when
// none exists.
std::vector<CounterfactualSet> diverse_counterfactual(const Model& model, const Instance& factual,
                                                      const WeightVector& weights,
                                                      std::span<const Condition> conditions, std::size_t k,
                                                      std::optional<int> target = std::nullopt,
                                                      const ExplainOptions& options = {});

struct RobustnessResult {
  std::int64_t value = 0;
  CounterfactualSet witness;
};

RobustnessResult robustness(const Model& model, const Instance& factual, const ExplainOptions& options = {});

enum class Verification { Verified, Refuted, Skipped };
std::string_view to_string(Verification v);

struct PrimeImplicantResult {
  int predicted_class = 0;
  std::vector<std::size_t> implicant;  // features kept at their factual values
  std::vector<std::size_t> changed;    // the complement
  Verification verification = Verification::Skipped;
  std::optional<Instance> counterexample;  // set when refuted
  Assignment indicators;
  SolveStats stats;
  ProblemShape shape;
};

// Maximizes the number of features that can change while the class stays the same; features
// named in `keep` are held at their factual values. The universal property of the kept set is
// then checked by enumerating every cell combination of the changed features.
PrimeImplicantResult prime_implicants(const Model& model, const Instance& factual,
                                      std::span<const std::string> keep = {}, const ExplainOptions& options = {});

// Checks that every instance agreeing with the factual on `kept` (cell-wise) has the factual's
// class. Returns a counterexample when it does not; throws VerificationCapExceeded above `cap`.
std::optional<Instance> find_pi_counterexample(const Model& model, const IndicatorRegistry& registry,
                                               const Instance& factual, std::span<const std::size_t> kept,
                                               std::uint64_t cap);

// Points drawn from a counterfactual region: uniform inside bounded intervals, exponential tails
// for unbounded ones, and the representable values at each finite end that the region includes.
std::vector<Instance> sample_region(const IndicatorRegistry& registry, const CounterfactualSet& set,
                                    std::size_t count, std::mt19937_64& rng);

}  // namespace cfx
