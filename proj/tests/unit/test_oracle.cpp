#include <doctest.h>

#include <random>

#include "brute.hpp"
#include "cfx/error.hpp"
#include "cfx/generators.hpp"
#include "cfx/oracle.hpp"
#include "fixtures.hpp"

using namespace cfx;
namespace fx = cfx::fixtures;

TEST_CASE("enumeration sizes") {
  CHECK(oracle::enumerate_consistent(build_registry(Model(fx::fig1_tree()))).size() == 6);
  CHECK(oracle::enumerate_consistent(build_registry(Model(fx::forest3()))).size() == 48);
  CHECK(oracle::enumerate_consistent(build_registry(Model(fx::class_is_first(1)))).size() == 2);
  CHECK(oracle::enumerate_consistent(build_registry(Model(fx::voting()))).size() == 64);
}

TEST_CASE("enumerated vectors are distinct and consistent") {
  const auto reg = build_registry(Model(fx::forest3()));
  auto all = oracle::enumerate_consistent(reg);
  for (const auto& a : all) CHECK(reg.is_consistent(a));
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
}

TEST_CASE("the cap is enforced") {
  const auto reg = build_registry(Model(fx::voting()));
  try {
    oracle::enumerate_consistent(reg, 63);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
}

TEST_CASE("the example tree has two optimal regions") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  const auto o = oracle::brute_counterfactual(m, fx::fig1_factual(), uniform_weights(reg), 0);
  CHECK(o.feasible);
  CHECK(o.objective_scaled == oracle::kObjectiveScale);
  CHECK(o.candidates == 3);
  REQUIRE(o.argmin.size() == 2);
  CHECK(o.argmin[0] == Assignment{1, 0, 0});
  CHECK(o.argmin[1] == Assignment{0, 0, 1});
}

TEST_CASE("conditions filter the candidates") {
  const Model m(fx::fig1_tree());
  const auto reg = build_registry(m);
  const std::vector<Condition> c{Condition::at_most("X2", 50)};
  const auto o = oracle::brute_counterfactual(m, fx::fig1_factual(), uniform_weights(reg), 0, c);
  CHECK(o.candidates == 1);
  const std::vector<Condition> keep{Condition::keep("X1")};
  const auto k = oracle::brute_counterfactual(m, fx::fig1_factual(), uniform_weights(reg), 0, keep);
  CHECK(k.argmin == std::vector<Assignment>{{1, 0, 0}});
  const std::vector<Condition> none{Condition::at_most("X2", 20)};
  CHECK_FALSE(oracle::brute_counterfactual(m, fx::fig1_factual(), uniform_weights(reg), 0, none).feasible);
}

TEST_CASE("weighted distance counts one-hot flips at half weight") {
  FeatureList f{{"c", FeatureKind::Categorical, {"a", "b", "z"}}, {"X", FeatureKind::Continuous, {}}};
  IndicatorRegistry reg(f, {{}, {1, 2}});
  const Assignment from{1, 0, 0, 1, 1}, to{0, 0, 1, 0, 0};
  const WeightVector w{{1, 1, 3, 1, 0.5}};
  // category a -> z: 1 + 3, two thresholds: 2 * 1 + 2 * 0.5, all in millionths.
  CHECK(oracle::weighted_distance(reg, from, to, w) == 4'000'000 + 3'000'000);
}

TEST_CASE("the oracle agrees with the independent brute force") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto features = gen::mixed_features(2, 1, 3, rng);
    const auto pool = gen::threshold_pool(features, 3, rng);
    RandomForestModel rf{features, {}};
    for (int t = 0; t < 3; ++t) rf.trees.push_back(gen::random_tree(features, pool, {3, 0.8}, rng));
    const Model m(rf);
    const auto x = gen::random_instance(features, rng);
    const auto reg = build_registry(m);
    const int target = 1 - evaluate(m, x);
    const auto o = oracle::brute_counterfactual(m, x, uniform_weights(reg), target);
    const auto b = brute::counterfactual(m, x, target);
    CHECK(o.feasible == b.feasible);
    if (o.feasible) {
      CHECK(o.objective_scaled == b.cost);
      CHECK(o.argmin.size() == b.argmin.size());
    }
    const std::vector<bool> none(features.size(), false);
    CHECK(oracle::brute_pi(m, x).max_changed == brute::max_free_features(m, x, none));
  }
}

TEST_CASE("universal implicant counterexamples") {
  const Model m(fx::xor_tree(2));
  const auto x = fx::point({0, 0});
  const std::vector<std::size_t> none, first{0}, both{0, 1};
  CHECK(oracle::universal_pi_counterexample(m, x, none).has_value());
  CHECK(oracle::universal_pi_counterexample(m, x, first).has_value());
  CHECK_FALSE(oracle::universal_pi_counterexample(m, x, both).has_value());
}

TEST_CASE("cell invariance holds for trees") {
  std::mt19937_64 rng(3);
  const Model m(fx::forest3());
  const auto reg = build_registry(m);
  oracle::for_each_cell_combination(reg, 1000, [&](std::span<const std::size_t> cells) {
    CHECK_FALSE(oracle::cell_invariance_violation(m, reg, cells, rng).has_value());
  });
}
