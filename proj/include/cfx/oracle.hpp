#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfx/encoder.hpp"

namespace cfx::oracle {

// Exhaustive reference answers over the cells of a registry. Shares the registry and the model
// evaluator with the product path, nothing else.

inline constexpr std::uint64_t kDefaultCap = 1'000'000;

// Calls fn(cells) for every cell combination in mixed-radix order, first feature slowest.
// Throws CapExceeded when the space is larger than cap.
void for_each_cell_combination(const IndicatorRegistry& registry, std::uint64_t cap,
                               const std::function<void(std::span<const std::size_t>)>& fn);

// Every consistent indicator vector, once each.
std::vector<Assignment> enumerate_consistent(const IndicatorRegistry& registry, std::uint64_t cap = kDefaultCap);

// Objective in the solver's scaled units: 2 * units(w) per threshold indicator flipped, units(w)
// per one-hot indicator flipped; the scale is 2 * 10^6.
std::int64_t weighted_distance(const IndicatorRegistry& registry, std::span<const std::uint8_t> from,
                               std::span<const std::uint8_t> to, const WeightVector& weights);
inline constexpr std::int64_t kObjectiveScale = 2'000'000;

// True iff the cell can hold a point satisfying every condition on its feature.
bool cells_satisfy(const IndicatorRegistry& registry, std::span<const std::size_t> cells,
                   std::span<const Condition> conditions, const Instance& factual);

struct CounterfactualOracle {
  bool feasible = false;
  std::int64_t objective_scaled = 0;
  std::vector<Assignment> argmin;  // every optimal indicator vector
  std::size_t candidates = 0;      // consistent vectors of the target class satisfying the conditions
};

CounterfactualOracle brute_counterfactual(const Model& model, const Instance& factual, const WeightVector& weights,
                                          int target, std::span<const Condition> conditions = {},
                                          std::uint64_t cap = kDefaultCap);

struct PrimeImplicantOracle {
  std::size_t max_changed = 0;
  std::vector<std::vector<std::size_t>> witnesses;  // changed-feature sets reaching the maximum
};

// Largest number of features that can leave their factual cell together without changing the
// class, with kept features held. Features the model never tests always count as changed
// unless kept.
PrimeImplicantOracle brute_pi(const Model& model, const Instance& factual, std::span<const std::string> keep = {},
                              std::uint64_t cap = kDefaultCap);

// Counterexample to "fixing the kept features at their factual values fixes the class", if any.
std::optional<Instance> universal_pi_counterexample(const Model& model, const Instance& factual,
                                                    std::span<const std::size_t> kept,
                                                    std::uint64_t cap = kDefaultCap);

// Draws random points inside every cell visited and reports the first whose class differs from
// the cell representative's. Empty when the classifier is constant on cells.
std::optional<Instance> cell_invariance_violation(const Model& model, const IndicatorRegistry& registry,
                                                  std::span<const std::size_t> cells, std::mt19937_64& rng,
                                                  std::size_t samples = 8);

}  // namespace cfx::oracle
