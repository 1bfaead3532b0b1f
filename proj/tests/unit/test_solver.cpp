#include <doctest.h>

#include <algorithm>
#include <random>

#include "cfx/encoder.hpp"
#include "cfx/generators.hpp"
#include "cfx/error.hpp"
#include "cfx/solver.hpp"
#include "fixtures.hpp"

using namespace cfx;
namespace fx = cfx::fixtures;

namespace {

IlpProblem plain(std::size_t n) {
  IlpProblem p;
  for (std::size_t i = 0; i < n; ++i) p.add_variable({VarKind::Indicator, i, 0, 0});
  return p;
}

// Every feasible vector with its objective, smallest first; ties keep enumeration order.
std::vector<std::pair<std::int64_t, std::vector<std::uint8_t>>> feasible_sorted(const IlpProblem& p) {
  std::vector<std::pair<std::int64_t, std::vector<std::uint8_t>>> out;
  const std::size_t n = p.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    std::vector<std::uint8_t> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (bits >> i) & 1;
    if (p.feasible(x)) out.emplace_back(p.objective.scaled_value(x), x);
  }
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    return p.sense == Sense::Minimize ? a.first < b.first : a.first > b.first;
  });
  return out;
}

IlpProblem random_problem(std::mt19937_64& rng, std::size_t n) {
  IlpProblem p = plain(n);
  std::uniform_int_distribution<int> coef(-3, 3), width(1, 4);
  std::uniform_int_distribution<std::size_t> var(0, n - 1), rows(1, 6);
  const std::size_t m = rows(rng);
  for (std::size_t r = 0; r < m; ++r) {
    LinearConstraint c;
    const int w = width(rng);
    for (int k = 0; k < w; ++k) {
      const int a = coef(rng);
      if (a != 0) c.terms.emplace_back(static_cast<VarId>(var(rng)), a);
    }
    c = c.normalized();
    if (c.terms.empty()) continue;
    c.relation = static_cast<Relation>(std::uniform_int_distribution<int>(0, 2)(rng));
    c.rhs = std::uniform_int_distribution<int>(-2, 3)(rng);
    p.add_constraint(c);
  }
  for (auto& o : p.objective.coefficients) o = std::uniform_int_distribution<int>(-5, 9)(rng);
  p.objective.constant = 7;
  if (std::bernoulli_distribution(0.2)(rng)) p.fix(static_cast<VarId>(var(rng)), 1);
  return p;
}

}  // namespace

TEST_CASE("a single variable fixed both ways is infeasible") {
  IlpProblem p = plain(1);
  p.add_constraint({{{0, 1}}, Relation::GreaterEqual, 1, ConstraintFamily::ForceZero});
  p.add_constraint({{{0, 1}}, Relation::LessEqual, 0, ConstraintFamily::ForceZero});
  const auto s = solve(p);
  CHECK(s.status == SolveStatus::Infeasible);
  CHECK(s.assignment.empty());
}

TEST_CASE("an unconstrained problem takes the cheap side of every variable") {
  IlpProblem p = plain(4);
  p.objective.coefficients = {3, -2, 0, -1};
  p.variables[2].hint = 1;
  const auto s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.assignment == std::vector<std::uint8_t>{0, 1, 1, 1});
  CHECK(s.objective_scaled == -3);
}

TEST_CASE("maximization") {
  IlpProblem p = plain(3);
  p.sense = Sense::Maximize;
  p.objective.coefficients = {1, 1, 1};
  p.add_constraint({{{0, 1}, {1, 1}, {2, 1}}, Relation::LessEqual, 2, ConstraintFamily::ForceZero});
  const auto s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.objective_scaled == 2);
}

TEST_CASE("random problems match exhaustive search") {
  std::mt19937_64 rng(4242);
  int feasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 12;
    IlpProblem p = random_problem(rng, n);
    if (trial % 5 == 0) p.sense = Sense::Maximize;
    const auto all = feasible_sorted(p);
    const auto s = solve(p);
    if (all.empty()) {
      CHECK(s.status == SolveStatus::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(s.optimal());
    CHECK(s.objective_scaled == all.front().first);
    CHECK(p.feasible(s.assignment));
    CHECK(p.objective.scaled_value(s.assignment) == s.objective_scaled);
  }
  CHECK(feasible > 100);
}

TEST_CASE("top-k returns the k best distinct vectors in order") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 8;
    IlpProblem p = random_problem(rng, n);
    const auto all = feasible_sorted(p);
    const std::size_t k = 1 + trial % 5;
    const auto top = enumerate_topk(p, k);
    if (all.empty()) {
      CHECK(top.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(top.solutions.size() == std::min(k, all.size()));
    for (std::size_t i = 0; i < top.solutions.size(); ++i) {
      CHECK(top.solutions[i].objective_scaled == all[i].first);
      CHECK(p.feasible(top.solutions[i].assignment));
      for (std::size_t j = 0; j < i; ++j) CHECK(top.solutions[i].assignment != top.solutions[j].assignment);
    }
  }
}

TEST_CASE("no-good cuts exclude exactly one indicator vector") {
  IlpProblem p = plain(3);
  const std::vector<std::uint8_t> x{1, 0, 1};
  const auto cut = no_good_cut(p, x);
  for (std::uint64_t bits = 0; bits < 8; ++bits) {
    std::vector<std::uint8_t> y{std::uint8_t(bits & 1), std::uint8_t((bits >> 1) & 1), std::uint8_t((bits >> 2) & 1)};
    CHECK(cut.satisfied_by(y) == (y != x));
  }
  IlpProblem q = plain(2);
  q.add_variable({VarKind::TermDelta, 0, 0, 0});
  const auto c = no_good_cut(q, std::vector<std::uint8_t>{1, 1, 1});
  CHECK(std::none_of(c.terms.begin(), c.terms.end(), [](const auto& t) { return t.first == 2; }));
}

TEST_CASE("solving is deterministic and breaks ties toward the factual") {
  const auto reg = build_registry(Model(fx::fig1_tree()));
  const auto enc = encode_counterfactual(Model(fx::fig1_tree()), fx::fig1_factual(), uniform_weights(reg), 0);
  const auto a = solve(enc.problem);
  const auto b = solve(enc.problem);
  REQUIRE(a.optimal());
  CHECK(a.assignment == b.assignment);
  CHECK(a.stats == b.stats);
  CHECK(a.objective() == 1.0);
  // Two optima: X2 above 50, or X1 above 10 with X2 in (20, 50]. Raising X2 flips a later variable.
  CHECK(std::vector<std::uint8_t>(a.assignment.begin(), a.assignment.begin() + 3) == std::vector<std::uint8_t>{1, 0, 0});
}

TEST_CASE("fixed variables are respected") {
  const auto reg = build_registry(Model(fx::fig1_tree()));
  auto enc = encode_counterfactual(Model(fx::fig1_tree()), fx::fig1_factual(), uniform_weights(reg), 0);
  enc.problem.fix(2, 1);  // X2 <= 50
  const auto s = solve(enc.problem);
  REQUIRE(s.optimal());
  CHECK(s.assignment[2] == 1);
  CHECK(s.assignment[0] == 0);
  CHECK(s.objective() == 1.0);
}

TEST_CASE("both polarities reach the same optimum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto features = gen::continuous_features(3);
    const auto pool = gen::threshold_pool(features, 3, rng);
    RandomForestModel rf{features, {}};
    for (int t = 0; t < 3; ++t) rf.trees.push_back(gen::random_tree(features, pool, {3, 0.8}, rng));
    const Model m(rf);
    const auto x = gen::random_instance(features, rng);
    const auto reg = build_registry(m);
    const int target = 1 - evaluate(m, x);
    std::int64_t values[2];
    bool ok[2];
    int i = 0;
    for (auto pol : {Polarity::Zero, Polarity::One}) {
      try {
        const auto s = solve(encode_counterfactual(m, x, uniform_weights(reg), target, pol).problem);
        ok[i] = s.optimal();
        values[i] = s.objective_scaled;
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyPolynomialUnsatisfiable);
        ok[i] = false;
      }
      ++i;
    }
    CHECK(ok[0] == ok[1]);
    if (ok[0] && ok[1]) CHECK(values[0] == values[1]);
  }
}

TEST_CASE("node cap and deadline") {
  std::mt19937_64 rng(77);
  const auto features = gen::continuous_features(8);
  const auto pool = gen::threshold_pool(features, 4, rng);
  RandomForestModel rf{features, {}};
  for (int t = 0; t < 9; ++t) rf.trees.push_back(gen::random_tree(features, pool, {5, 0.9}, rng));
  const Model m(rf);
  const auto x = gen::random_instance(features, rng);
  const auto enc = encode_counterfactual(m, x, uniform_weights(build_registry(m)), 1 - evaluate(m, x));
  SolverConfig tight;
  tight.node_cap = 1;
  CHECK(solve(enc.problem, tight).status == SolveStatus::CapExceeded);
  const auto past = SolverConfig::with_time_limit(0.0);
  CHECK(solve(enc.problem, past).status != SolveStatus::Infeasible);
  CHECK(solve(enc.problem).optimal());
}
