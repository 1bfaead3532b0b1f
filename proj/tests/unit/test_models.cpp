#include <doctest.h>

#include <random>

#include "cfx/error.hpp"
#include "cfx/generators.hpp"
#include "fixtures.hpp"

using namespace cfx;
namespace fx = cfx::fixtures;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("the example tree validates and classifies the factual as 1") {
  const Model m = validate_model(fx::fig1_tree());
  CHECK(evaluate(m, fx::fig1_factual()) == 1);
  CHECK(evaluate(m, fx::point({5, 60})) == 0);
  CHECK(evaluate(m, fx::point({11, 20})) == 1);
  CHECK(evaluate(m, fx::point({11, 20.5})) == 0);
}

TEST_CASE("thresholds are closed below") {
  const Model m = validate_model(fx::fig1_tree());
  CHECK(evaluate(m, fx::point({10, 50})) == 1);
  CHECK(evaluate(m, fx::point({10, std::nextafter(50.0, 100.0)})) == 0);
}

TEST_CASE("a bare leaf is a constant classifier") {
  DecisionTreeModel t{fx::xs(1), {}};
  t.tree.nodes.push_back(TreeNode{true, 1, {}, 0, 0});
  CHECK(code_of([&] { validate_model(t); }) == ErrorCode::ConstantClassifier);
}

TEST_CASE("predicates must reference declared features and categories") {
  auto t = fx::fig1_tree();
  t.tree.nodes[0].predicate.feature = 7;
  CHECK(code_of([&] { validate_model(t); }) == ErrorCode::UnknownFeature);

  auto c = fx::fig1_tree();
  c.tree.nodes[0].predicate = Predicate::equals(0, 0);
  CHECK(code_of([&] { validate_model(c); }) == ErrorCode::InvalidModel);
}

TEST_CASE("feature declarations") {
  auto dup = fx::fig1_tree();
  dup.features[1].name = "X1";
  CHECK_THROWS_AS(validate_model(dup), Error);
  NaiveBayesModel one_cat = fx::class_is_first(2);
  one_cat.features[1].categories = {"only"};
  one_cat.cpt[1] = {{1.0, 1.0}};
  CHECK_THROWS_AS(validate_model(one_cat), Error);
}

TEST_CASE("naive Bayes feature cap") {
  auto nb = fx::class_is_first(25);
  CHECK(code_of([&] { validate_model(nb); }) == ErrorCode::EnumerationCapExceeded);
  CHECK_NOTHROW(validate_model(nb, ValidationOptions{30}));
}

TEST_CASE("naive Bayes distributions must sum to one") {
  auto nb = fx::class_is_first(2);
  nb.cpt[1][0][0] = 0.6;
  CHECK(code_of([&] { validate_model(nb); }) == ErrorCode::BadDistribution);
  auto neg = fx::class_is_first(2);
  neg.prior = {1.2, -0.2};
  CHECK(code_of([&] { validate_model(neg); }) == ErrorCode::BadDistribution);
  auto close = fx::class_is_first(2);
  close.cpt[1][0][0] = 0.5 + 4e-10;
  close.cpt[1][1][0] = 0.5 - 4e-10;
  CHECK_NOTHROW(validate_model(close));
}

TEST_CASE("naive Bayes ties and zero probabilities go to class 0") {
  NaiveBayesModel flat = fx::class_is_first(3);
  for (auto& row : flat.cpt) row = {{0.5, 0.5}, {0.5, 0.5}};
  const Model m = validate_model(flat);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) CHECK(evaluate(m, fx::categories({a, b, 1})) == 0);
  }
  const Model x1 = validate_model(fx::class_is_first(3));
  CHECK(evaluate(x1, fx::categories({1, 0, 0})) == 1);
  CHECK(evaluate(x1, fx::categories({0, 1, 1})) == 0);
  CHECK(decide_scores(-INFINITY, -INFINITY) == 0);
}

TEST_CASE("naive Bayes is invariant under scaling both class scores") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    NaiveBayesModel nb = gen::random_naive_bayes(4, 3, rng);
    NaiveBayesModel scaled = nb;
    // Multiplying the prior by a constant multiplies both joint scores by it.
    scaled.prior = {nb.prior[0] * 0.37, nb.prior[1] * 0.37};
    const Instance x = gen::random_instance(nb.features, rng);
    CHECK(evaluate(Model(nb), x) == evaluate(Model(scaled), x));
  }
}

TEST_CASE("the example forest classifies the factual as 1 and ties go to 0") {
  const Model m = validate_model(fx::forest3());
  CHECK(evaluate(m, fx::forest3_factual()) == 1);
  CHECK(count_positive_votes(fx::forest3(), fx::forest3_factual()) == 3);

  RandomForestModel two = fx::forest3();
  two.trees.pop_back();
  // T1 votes 1 and T2 votes 0 here.
  const Instance split = fx::point({6, 1, 2});
  CHECK(evaluate(two.trees[0], split) == 1);
  CHECK(evaluate(two.trees[1], split) == 0);
  CHECK(evaluate(Model(validate_model(two)), split) == 0);
}

TEST_CASE("forest vote rule") {
  std::mt19937_64 rng(11);
  const auto features = gen::continuous_features(3);
  const auto pool = gen::threshold_pool(features, 3, rng);
  for (int trial = 0; trial < 50; ++trial) {
    RandomForestModel rf{features, {}};
    const std::size_t m = 1 + trial % 6;
    for (std::size_t i = 0; i < m; ++i) rf.trees.push_back(gen::random_tree(features, pool, {3, 0.7}, rng));
    const Instance x = gen::random_instance(features, rng);
    const std::size_t ones = count_positive_votes(rf, x);
    const int expected = 2 * ones > m ? 1 : 0;
    CHECK(evaluate(Model(rf), x) == expected);
  }
}

TEST_CASE("paths of the example tree") {
  const auto paths = enumerate_paths(fx::fig1_tree().tree);
  REQUIRE(paths.size() == 4);
  CHECK(std::count_if(paths.begin(), paths.end(), [](const TreePath& p) { return p.label == 1; }) == 2);
  CHECK(paths[0].literals == std::vector<PathLiteral>{{Predicate::at_most(0, 10), true},
                                                      {Predicate::at_most(1, 50), true}});
  CHECK(paths[0].label == 1);
}

TEST_CASE("paths of a depth-one tree") {
  fx::TreeBuilder b;
  const auto tree = b.finish(b.split(Predicate::at_most(0, 5), b.leaf(1), b.leaf(0)));
  const auto paths = enumerate_paths(tree);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0] == TreePath{{{Predicate::at_most(0, 5), true}}, 1});
  CHECK(paths[1] == TreePath{{{Predicate::at_most(0, 5), false}}, 0});
}

TEST_CASE("the second example tree has the path X1<=5, X2<=2 to class 1") {
  const auto paths = enumerate_paths(fx::forest3().trees[1]);
  const TreePath want{{{Predicate::at_most(0, 5), true}, {Predicate::at_most(1, 2), true}}, 1};
  CHECK(std::find(paths.begin(), paths.end(), want) != paths.end());
}

TEST_CASE("exactly one path holds and it gives the tree's class") {
  std::mt19937_64 rng(3);
  const auto features = gen::mixed_features(3, 1, 3, rng);
  const auto pool = gen::threshold_pool(features, 3, rng);
  for (int trial = 0; trial < 100; ++trial) {
    const DecisionTree tree = gen::random_tree(features, pool, {4, 0.8}, rng);
    const Instance x = gen::random_instance(features, rng);
    int satisfied = 0;
    int label = -1;
    for (const auto& p : enumerate_paths(tree)) {
      const bool ok = std::all_of(p.literals.begin(), p.literals.end(), [&](const PathLiteral& l) {
        return holds(l.predicate, x.values[l.predicate.feature]) == l.positive;
      });
      if (ok) {
        ++satisfied;
        label = p.label;
      }
    }
    CHECK(satisfied == 1);
    CHECK(label == evaluate(tree, x));
  }
}

TEST_CASE("instances must match the features") {
  const FeatureList f = fx::xs(2);
  CHECK_THROWS_AS(validate_instance(f, fx::point({1})), Error);
  CHECK_THROWS_AS(validate_instance(f, fx::point({1, NAN})), Error);
  NaiveBayesModel nb = fx::class_is_first(2);
  CHECK_THROWS_AS(validate_instance(nb.features, fx::categories({0, 2})), Error);
  CHECK_NOTHROW(validate_instance(nb.features, fx::categories({0, 1})));
}
