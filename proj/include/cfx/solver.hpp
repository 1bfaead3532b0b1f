#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "cfx/ilp.hpp"

namespace cfx {

struct SolverConfig {
  std::uint64_t node_cap = 10'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  // Resolve ties among optimal assignments: scanning variables by ascending id, prefer the
  // objective-cheaper value, and the hint when the objective is indifferent.
  bool canonical = true;

  static SolverConfig with_time_limit(double seconds);
};

enum class SolveStatus { Optimal, Infeasible, CapExceeded };

std::string_view to_string(SolveStatus status);

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t canonical_probes = 0;

  bool operator==(const SolveStats&) const = default;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<std::uint8_t> assignment;  // one value per problem variable; empty unless optimal
  std::int64_t objective_scaled = 0;     // objective.scaled_value(assignment), in the problem's sense
  std::int64_t scale = 1;
  SolveStats stats;

  bool optimal() const { return status == SolveStatus::Optimal; }
  double objective() const { return static_cast<double>(objective_scaled) / static_cast<double>(scale); }
};

// Exact branch-and-bound over binary variables with bounds propagation. Deterministic.
Solution solve(const IlpProblem& problem, const SolverConfig& config = {});

struct TopK {
  SolveStatus status = SolveStatus::Infeasible;  // Optimal once at least one solution was found
  std::vector<Solution> solutions;
  SolveStats stats;
};

// Up to k best assignments, distinct on the Indicator variables: after each solution a cut
// excluding its indicator vector is added. Ordered by objective, then by the tie rule of solve.
TopK enumerate_topk(const IlpProblem& problem, std::size_t k, const SolverConfig& config = {});

// Cut excluding `assignment` restricted to the Indicator variables of `problem`.
LinearConstraint no_good_cut(const IlpProblem& problem, std::span<const std::uint8_t> assignment);

}  // namespace cfx
