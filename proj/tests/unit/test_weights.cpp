#include <doctest.h>

#include <cmath>
#include <random>

#include "cfx/csv.hpp"
#include "cfx/error.hpp"
#include "cfx/explainer.hpp"
#include "cfx/generators.hpp"
#include "fixtures.hpp"

using namespace cfx;
namespace fx = cfx::fixtures;

namespace {

Dataset column(std::vector<double> xs) {
  Dataset d;
  d.features = fx::xs(1);
  d.rows = xs.size();
  d.present = {true};
  d.numeric = {std::move(xs)};
  d.categorical = {{}};
  return d;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("weight units") {
  CHECK(weight_units(1.0) == 1'000'000);
  CHECK(weight_units(0.0) == 0);
  CHECK(weight_units(1e-12) == 1);
  CHECK(weight_units(2.5) == 2'500'000);
  CHECK(code_of([] { weight_units(-1); }) == ErrorCode::MissingWeight);
  CHECK(code_of([] { weight_units(std::nan("")); }) == ErrorCode::MissingWeight);
}

TEST_CASE("spread statistics") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  const std::vector<double> v{1, 2, 3, 50};
  // median 2.5, deviations 1.5 0.5 0.5 47.5
  CHECK(median_absolute_deviation(v) == 1.0);
  const std::vector<double> b{0, 0, 1, 1};
  // mean 0.5, squared deviations sum to 1, over n - 1 = 3
  CHECK(sample_standard_deviation(b) == doctest::Approx(std::sqrt(1.0 / 3.0)));
  const std::vector<double> one{4};
  CHECK(sample_standard_deviation(one) == 0.0);
}

TEST_CASE("rule weights by the inverse MAD of the rows satisfying the rule") {
  IndicatorRegistry reg(fx::xs(1), {{10, 100}});
  const auto w = mad_rule_weights(reg, column({1, 2, 3, 50}));
  // X <= 10 keeps 1 2 3: median 2, deviations 1 0 1, MAD 1.
  CHECK(w.values[0] == doctest::Approx(1.0));
  // X <= 100 keeps all four: MAD 1 as computed above.
  CHECK(w.values[1] == doctest::Approx(1.0));

  const auto w2 = mad_rule_weights(reg, column({1, 3, 9, 50, 60, 200}));
  // X <= 10: 1 3 9, median 3, deviations 2 0 6, MAD 2.
  CHECK(w2.values[0] == doctest::Approx(0.5));
  // X <= 100: 1 3 9 50 60, median 9, deviations 8 6 0 41 51, MAD 8.
  CHECK(w2.values[1] == doctest::Approx(0.125));
}

TEST_CASE("degenerate rules fall back to the largest weight on the feature") {
  IndicatorRegistry reg(fx::xs(1), {{0, 10, 100}});
  // X <= 100 keeps every row: median 12.5, deviations 7.5 7.5 7.5 7.5 27.5 28.5, MAD 7.5.
  // X <= 10 keeps 5 5 5 with zero spread and X <= 0 keeps nothing: both take 1 / 7.5.
  const auto w = mad_rule_weights(reg, column({5, 5, 5, 20, 40, 41}));
  CHECK(w.values[2] == doctest::Approx(1.0 / 7.5));
  CHECK(w.values[1] == doctest::Approx(1.0 / 7.5));
  CHECK(w.values[0] == doctest::Approx(1.0 / 7.5));
  // A constant column leaves nothing finite, so every rule weighs 1.
  const auto c = mad_rule_weights(reg, column({3, 3, 3}));
  CHECK(c.values == std::vector<double>{1, 1, 1});
}

TEST_CASE("std weights are shared by the rules of a feature") {
  IndicatorRegistry reg(fx::xs(1), {{0.5, 2}});
  const auto w = std_weights(reg, column({0, 0, 1, 1}));
  CHECK(w.values[0] == doctest::Approx(1.7320508));
  CHECK(w.values[1] == doctest::Approx(1.7320508));
}

TEST_CASE("one-hot weights use the indicator column") {
  FeatureList f{{"c", FeatureKind::Categorical, {"a", "b", "z"}}};
  IndicatorRegistry reg(f, {{}});
  Dataset d;
  d.features = f;
  d.rows = 4;
  d.present = {true};
  d.numeric = {{}};
  d.categorical = {{0, 0, 1, 1}};
  const auto w = mad_rule_weights(reg, d);
  // columns 1 1 0 0 and 0 0 1 1 both have standard deviation sqrt(1/3); the z column is constant.
  CHECK(w.values[0] == doctest::Approx(std::sqrt(3.0)));
  CHECK(w.values[1] == doctest::Approx(std::sqrt(3.0)));
  CHECK(w.values[2] == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("missing columns") {
  IndicatorRegistry reg(fx::xs(2), {{1}, {}});
  Dataset d = column({1, 2});
  d.features = fx::xs(2);
  d.present = {false, true};
  d.numeric.push_back({1, 2});
  d.categorical.push_back({});
  CHECK(code_of([&] { mad_rule_weights(reg, d); }) == ErrorCode::MissingColumn);
  CHECK(code_of([&] { compute_weights(WeightScheme::Std, reg, nullptr); }) == ErrorCode::MissingColumn);
  CHECK(compute_weights(WeightScheme::Uniform, reg, nullptr).values == std::vector<double>{1});
  // The untested second feature needs no column.
  d.present = {true, false};
  CHECK(mad_rule_weights(reg, d).values.size() == 1);
}

TEST_CASE("weight scheme names") {
  CHECK(parse_weight_scheme("mad") == WeightScheme::Mad);
  CHECK(parse_weight_scheme("std") == WeightScheme::Std);
  CHECK(parse_weight_scheme("uniform") == WeightScheme::Uniform);
  CHECK(to_string(WeightScheme::Mad) == "mad");
  CHECK(code_of([] { parse_weight_scheme("l2"); }) == ErrorCode::InvalidCondition);
}

TEST_CASE("scaling every weight keeps the region and scales the objective") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const auto features = gen::mixed_features(3, 1, 3, rng);
    const auto pool = gen::threshold_pool(features, 3, rng);
    DecisionTreeModel m{features, gen::random_tree(features, pool, {4, 0.8}, rng)};
    const auto x = gen::random_instance(features, rng);
    const auto reg = build_registry(Model(m));
    WeightVector w{std::vector<double>(reg.size())};
    for (auto& v : w.values) v = std::uniform_int_distribution<int>(1, 8)(rng) * 0.25;
    WeightVector w3 = w;
    for (auto& v : w3.values) v *= 3;
    try {
      const auto a = counterfactual(Model(m), x, w);
      const auto b = counterfactual(Model(m), x, w3);
      CHECK(a.conditions == b.conditions);
      CHECK(b.objective_scaled == 3 * a.objective_scaled);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyPolynomialUnsatisfiable);
    }
  }
}

TEST_CASE("csv records") {
  const auto r = parse_csv_records("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\n1,\"two\nlines\"\n");
  REQUIRE(r.size() == 3);
  CHECK(r[0] == std::vector<std::string>{"a", "b"});
  CHECK(r[1] == std::vector<std::string>{"x, y", "say \"hi\""});
  CHECK(r[2] == std::vector<std::string>{"1", "two\nlines"});
  CHECK(parse_csv_records("a,,\n").at(0).size() == 3);
  CHECK(code_of([] { parse_csv_records("a\"b\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv_records("\"open\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("csv datasets") {
  FeatureList f = fx::xs(2);
  f.push_back({"c", FeatureKind::Categorical, {"a", "b"}});
  std::vector<std::string> warnings;
  const auto d = parse_dataset_csv("X2,extra,c\n1.5,q,a\n-2e1,r,b\n", f, &warnings);
  CHECK(d.rows == 2);
  CHECK(d.present == std::vector<bool>{false, true, true});
  CHECK(d.numeric[1] == std::vector<double>{1.5, -20});
  CHECK(d.categorical[2] == std::vector<std::size_t>{0, 1});
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("extra") != std::string::npos);
  CHECK(code_of([&] { parse_dataset_csv("X1,X1\n1,2\n", f); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_dataset_csv("X1\nabc\n", f); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_dataset_csv("X1,X2\n1\n", f); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_dataset_csv("c\nq\n", f); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_dataset_csv("", f); }) == ErrorCode::ParseError);
}
