#include <doctest.h>

#include <cmath>
#include <random>

#include "brute.hpp"
#include "cfx/error.hpp"
#include "cfx/explainer.hpp"
#include "cfx/generators.hpp"
#include "fixtures.hpp"

using namespace cfx;
namespace fx = cfx::fixtures;

namespace {

const double inf = std::numeric_limits<double>::infinity();

Interval open_closed(double lo, double hi) { return Interval{lo, hi, false, std::isfinite(hi)}; }

bool region_is_target(const Model& m, const IndicatorRegistry& reg, const CounterfactualSet& set, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const auto& x : sample_region(reg, set, 100, rng)) {
    if (evaluate(m, x) != set.target_class) return false;
  }
  return true;
}

Instance region_point(const IndicatorRegistry& reg, const CounterfactualSet& set) {
  std::mt19937_64 rng(1);
  return sample_region(reg, set, 1, rng).front();
}

}  // namespace

TEST_CASE("the example tree: uniform weights raise X2 above 50") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  const auto set = counterfactual(m, fx::fig1_factual(), uniform_weights(reg));
  CHECK(set.target_class == 0);
  CHECK(set.objective() == 1.0);
  REQUIRE(set.conditions.size() == 2);
  CHECK_FALSE(set.conditions[0].changed);
  CHECK(set.conditions[0].interval == open_closed(-inf, 10));
  CHECK(set.conditions[1].changed);
  CHECK(set.conditions[1].interval == open_closed(50, inf));
  CHECK(region_is_target(m, reg, set, 3));
}

TEST_CASE("the example tree: an expensive X2<=50 rule moves X1 instead") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  const auto set = counterfactual(m, fx::fig1_factual(), WeightVector{{1, 1, 5}});
  CHECK(set.objective() == 1.0);
  CHECK(set.conditions[0].changed);
  CHECK(set.conditions[0].interval == open_closed(10, inf));
  CHECK_FALSE(set.conditions[1].changed);
  CHECK(set.conditions[1].interval == open_closed(20, 50));
  CHECK(region_is_target(m, reg, set, 4));
}

TEST_CASE("the example tree: robustness is one") {
  const Model m(fx::fig1_tree());
  CHECK(robustness(m, fx::fig1_factual()).value == 1);
  CHECK(brute::robustness(m, fx::fig1_factual()) == 1);
}

TEST_CASE("the example tree: a condition on X2 steers the explanation") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  const std::vector<Condition> c{Condition::at_most("X2", 50)};
  const auto sets = diverse_counterfactual(m, fx::fig1_factual(), uniform_weights(reg), c, 1);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].objective() == 1.0);
  CHECK(sets[0].conditions[0].interval == open_closed(10, inf));
  CHECK(sets[0].conditions[1].interval == open_closed(20, 50));

  const std::vector<Condition> narrow{Condition::between("X2", 25, 40)};
  const auto n = counterfactual(m, fx::fig1_factual(), uniform_weights(reg), std::nullopt, narrow);
  CHECK(n.conditions[1].interval == Interval{25, 40, true, true});
  CHECK_FALSE(n.conditions[1].changed);
}

TEST_CASE("the example tree: every class-0 region in objective order") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  const auto sets = diverse_counterfactual(m, fx::fig1_factual(), uniform_weights(reg), {}, 5);
  REQUIRE(sets.size() == 3);
  CHECK(sets[0].objective() == 1.0);
  CHECK(sets[1].objective() == 1.0);
  CHECK(sets[2].objective() == 2.0);
  CHECK(sets[0].conditions[1].interval == open_closed(50, inf));
  CHECK(sets[1].conditions[0].interval == open_closed(10, inf));
  CHECK(sets[1].conditions[1].interval == open_closed(20, 50));
  CHECK(sets[2].conditions[0].interval == open_closed(10, inf));
  CHECK(sets[2].conditions[1].interval == open_closed(50, inf));
  for (std::size_t i = 0; i < sets.size(); ++i) CHECK(region_is_target(m, reg, sets[i], i));
}

TEST_CASE("the forest example") {
  const Model m(fx::forest3());
  const auto reg = build_registry(m);
  const auto x = fx::forest3_factual();
  CHECK(evaluate(m, x) == 1);
  const auto set = counterfactual(m, x, uniform_weights(reg));
  const auto best = brute::counterfactual(m, x, 0);
  REQUIRE(best.feasible);
  CHECK(set.objective_scaled == best.cost);
  CHECK(region_is_target(m, reg, set, 5));
}

TEST_CASE("targets") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  try {
    counterfactual(m, fx::fig1_factual(), uniform_weights(reg), 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TargetIsPrediction);
  }
  CHECK(resolve_target(m, fx::fig1_factual(), std::nullopt) == 0);
  CHECK_THROWS_AS(resolve_target(m, fx::fig1_factual(), 3), Error);
}

TEST_CASE("infeasible conditions") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  // Class 0 needs X2 above 20; capping it at 20 leaves nothing.
  const std::vector<Condition> c{Condition::at_most("X2", 20)};
  try {
    counterfactual(m, fx::fig1_factual(), uniform_weights(reg), std::nullopt, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(is_infeasible(e.code()));
  }
}

TEST_CASE("decoding") {
  const auto reg = build_registry(Model(fx::fig1_tree()));
  const auto set = decode_solution(reg, fx::fig1_factual(), std::vector<std::uint8_t>{0, 1, 1});
  CHECK(set.conditions[0].interval == open_closed(10, inf));
  CHECK(set.conditions[1].interval == open_closed(-inf, 20));
  CHECK(set.conditions[0].changed);
  CHECK(set.conditions[1].changed);
  try {
    decode_solution(reg, fx::fig1_factual(), std::vector<std::uint8_t>{0, 1, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentAssignment);
  }
}

TEST_CASE("region sampling stays inside the region and hits closed ends") {
  const auto reg = build_registry(Model(fx::fig1_tree()));
  const auto set = decode_solution(reg, fx::fig1_factual(), std::vector<std::uint8_t>{0, 0, 1});
  std::mt19937_64 rng(2);
  bool saw_end = false;
  for (const auto& x : sample_region(reg, set, 200, rng)) {
    CHECK(set.conditions[0].interval.contains(x.values[0].number));
    CHECK(set.conditions[1].interval.contains(x.values[1].number));
    saw_end = saw_end || x.values[1].number == 50;
  }
  CHECK(saw_end);
}

TEST_CASE("naive Bayes counterfactuals match the brute force") {
  const Model m(fx::voting());
  const auto reg = build_registry(m);
  for (std::size_t r = 0; r < 64; ++r) {
    Instance x;
    for (std::size_t f = 0; f < 6; ++f) x.values.push_back(Value::of_category((r >> f) & 1));
    const int target = 1 - evaluate(m, x);
    const auto best = brute::counterfactual(m, x, target);
    REQUIRE(best.feasible);
    const auto set = counterfactual(m, x, uniform_weights(reg));
    CHECK(set.objective_scaled == best.cost);
    CHECK(evaluate(m, region_point(reg, set)) == target);
  }
}

TEST_CASE("random models match the brute force with random weights") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 90; ++trial) {
    Model m;
    const int kind = trial % 3;
    if (kind == 2) {
      m = gen::random_naive_bayes(2 + trial % 5, 3, rng);
    } else {
      const auto features = gen::mixed_features(3, kind, 3, rng);
      const auto pool = gen::threshold_pool(features, 2, rng);
      if (kind == 0) {
        m = DecisionTreeModel{features, gen::random_tree(features, pool, {4, 0.8}, rng)};
      } else {
        RandomForestModel rf{features, {}};
        for (int t = 0; t < 1 + trial % 4; ++t) rf.trees.push_back(gen::random_tree(features, pool, {3, 0.8}, rng));
        m = rf;
      }
    }
    const auto x = gen::random_instance(features_of(m), rng);
    const auto reg = build_registry(m);
    WeightVector w{std::vector<double>(reg.size())};
    for (auto& v : w.values) v = std::uniform_int_distribution<int>(1, 12)(rng) * 0.25;
    brute::RuleWeights rw;
    rw.threshold = [&](std::size_t f, double t) { return w.values[*reg.threshold_var(f, t)]; };
    rw.category = [&](std::size_t f, std::size_t c) { return w.values[*reg.category_var(f, c)]; };
    const int target = 1 - evaluate(m, x);
    const auto best = brute::counterfactual(m, x, target, rw);
    try {
      const auto set = counterfactual(m, x, w);
      REQUIRE(best.feasible);
      CHECK(set.objective_scaled == best.cost);
      CHECK(region_is_target(m, reg, set, static_cast<std::uint64_t>(trial)));
      CHECK(brute::cost(m, x, region_point(reg, set), rw) == best.cost);
    } catch (const Error& e) {
      CHECK(is_infeasible(e.code()));
      CHECK_FALSE(best.feasible);
    }
  }
}

TEST_CASE("prime implicant of a classifier that copies its first feature") {
  const Model m(fx::class_is_first(5));
  const auto x = fx::categories({1, 0, 1, 1, 0});
  const auto pi = prime_implicants(m, x);
  CHECK(pi.predicted_class == 1);
  CHECK(pi.implicant == std::vector<std::size_t>{0});
  CHECK(pi.changed == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(pi.verification == Verification::Verified);
  CHECK_FALSE(pi.counterexample);
}

TEST_CASE("prime implicant of xor is refuted") {
  const Model m(fx::xor_tree(3));
  const auto x = fx::point({0, 1, 7});
  const auto pi = prime_implicants(m, x);
  // Moving both inputs keeps the parity, so nothing is kept; that set does not fix the class.
  CHECK(pi.implicant.empty());
  CHECK(pi.changed.size() == 3);
  CHECK(pi.verification == Verification::Refuted);
  REQUIRE(pi.counterexample);
  CHECK(evaluate(m, *pi.counterexample) != evaluate(m, x));
  CHECK(brute::max_free_features(m, x, {false, false, false}) == 3);

  const std::vector<std::string> keep{"X1"};
  const auto kept = prime_implicants(m, x, keep);
  CHECK(kept.implicant == std::vector<std::size_t>{0, 1});
  CHECK(kept.verification == Verification::Verified);
}

TEST_CASE("prime implicants match the brute force on random naive Bayes models") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 30; ++trial) {
    const Model m(gen::random_naive_bayes(2 + trial % 6, 3, rng));
    const auto x = gen::random_instance(features_of(m), rng);
    const auto pi = prime_implicants(m, x);
    const std::vector<bool> none(features_of(m).size(), false);
    CHECK(pi.changed.size() == brute::max_free_features(m, x, none));
    std::vector<bool> kept(none.size(), false);
    for (auto f : pi.implicant) kept[f] = true;
    CHECK((pi.verification == Verification::Verified) == brute::kept_set_decides(m, x, kept));
  }
}

TEST_CASE("verification beyond its cap is skipped") {
  const Model m(fx::class_is_first(4));
  ExplainOptions o;
  o.verification_cap = 2;
  const auto pi = prime_implicants(m, fx::categories({0, 0, 0, 0}), {}, o);
  CHECK(pi.verification == Verification::Skipped);
  CHECK(to_string(pi.verification) == "skipped");
}
