#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "../src/core/ensemble.hpp"
#include "../src/core/error.hpp"

using namespace soniclog;

namespace {

Matrix matrix_from_columns(const std::vector<std::vector<double>>& cols) {
  Matrix x(cols.empty() ? 0 : cols[0].size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) x.at(r, c) = cols[c][r];
  return x;
}

// Random regression fixture with a learnable signal.
struct Fixture {
  Matrix x;
  std::vector<double> y;
};

Fixture make_fixture(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(p));
  std::vector<double> y;
  for (int r = 0; r < n; ++r) {
    for (auto& c : cols) c.push_back(g(rng));
    double signal = 0;
    for (std::size_t j = 0; j < cols.size(); ++j)
      signal += (static_cast<double>(j) + 1) * cols[j].back();
    y.push_back(signal + 0.2 * g(rng));
  }
  return {matrix_from_columns(cols), std::move(y)};
}

RegressionTree constant_tree(double value) {
  RegressionTree tree;
  TreeNode leaf;
  leaf.value = value;
  leaf.cover = 1;
  tree.nodes.push_back(leaf);
  tree.n_features = 1;
  return tree;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

}  // namespace

TEST_CASE("single-tree forest without bootstrap reduces to fit_tree") {
  Fixture fx = make_fixture(60, 3, 1);
  BoostParams params;
  params.n_estimators = 1;
  params.bootstrap = false;
  params.tree.max_depth = 4;
  params.tree.feature_subsample = 3;  // all features: subsampling is a no-op
  ForestModel forest = fit_random_forest(fx.x, fx.y, params);
  REQUIRE(forest.trees.size() == 1);

  TreeParams tp = params.tree;
  RegressionTree lone = fit_tree(fx.x, fx.y, {}, tp);
  REQUIRE(forest.trees[0].nodes.size() == lone.nodes.size());
  for (std::size_t i = 0; i < lone.nodes.size(); ++i) {
    CHECK(forest.trees[0].nodes[i].feature == lone.nodes[i].feature);
    CHECK(forest.trees[0].nodes[i].threshold == lone.nodes[i].threshold);
    CHECK(forest.trees[0].nodes[i].value == doctest::Approx(lone.nodes[i].value));
    CHECK(forest.trees[0].nodes[i].cover == doctest::Approx(lone.nodes[i].cover));
  }
}

TEST_CASE("forest predicts the constant on constant targets") {
  Fixture fx = make_fixture(40, 2, 2);
  std::vector<double> constant(fx.y.size(), 3.25);
  BoostParams params;
  params.n_estimators = 5;
  ForestModel forest = fit_random_forest(fx.x, constant, params);
  for (double v : forest.predict(fx.x)) CHECK(v == doctest::Approx(3.25));
}

TEST_CASE("forest prediction is the unweighted tree mean") {
  ForestModel forest;
  forest.n_features = 1;
  forest.trees.push_back(constant_tree(3));
  forest.trees.push_back(constant_tree(5));
  std::vector<double> row{0.0};
  CHECK(forest.predict_row(row) == doctest::Approx(4.0));

  // permutation invariance in tree order
  std::swap(forest.trees[0], forest.trees[1]);
  CHECK(forest.predict_row(row) == doctest::Approx(4.0));
}

TEST_CASE("forest defaults feature_subsample to ceil(p/3)") {
  Fixture fx = make_fixture(30, 7, 3);
  BoostParams params;
  params.n_estimators = 2;
  ForestModel forest = fit_random_forest(fx.x, fx.y, params);
  CHECK(forest.feature_subsample == 3);  // ceil(7/3)

  Fixture fx1 = make_fixture(30, 1, 3);
  CHECK(fit_random_forest(fx1.x, fx1.y, params).feature_subsample == 1);
}

TEST_CASE("forest training is deterministic in the seed") {
  Fixture fx = make_fixture(80, 4, 4);
  BoostParams params;
  params.n_estimators = 7;
  params.tree.max_depth = 4;
  params.tree.seed = 99;
  ForestModel a = fit_random_forest(fx.x, fx.y, params);
  ForestModel b = fit_random_forest(fx.x, fx.y, params);
  std::vector<double> pa = a.predict(fx.x);
  std::vector<double> pb = b.predict(fx.x);
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);

  params.tree.seed = 100;
  ForestModel c = fit_random_forest(fx.x, fx.y, params);
  bool any_different = false;
  std::vector<double> pc = c.predict(fx.x);
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i] != pc[i]) any_different = true;
  CHECK(any_different);
}

TEST_CASE("gbdt interpolates distinct rows with one unlimited-depth stage") {
  Fixture fx = make_fixture(32, 2, 5);
  BoostParams params;
  params.n_estimators = 1;
  params.learning_rate = 1.0;
  params.tree.max_depth = 32;
  GbdtModel model = fit_gbdt(fx.x, fx.y, params);
  std::vector<double> pred = model.predict(fx.x);
  for (std::size_t i = 0; i < fx.y.size(); ++i)
    CHECK(pred[i] == doctest::Approx(fx.y[i]).epsilon(1e-12));
  REQUIRE(model.training_mse.size() == 1);
  CHECK(model.training_mse[0] == doctest::Approx(0.0));
}

TEST_CASE("gbdt init_value is the target mean and composition is affine") {
  Fixture fx = make_fixture(50, 2, 6);
  BoostParams params;
  params.n_estimators = 3;
  GbdtModel model = fit_gbdt(fx.x, fx.y, params);
  double mean = 0;
  for (double v : fx.y) mean += v;
  mean /= static_cast<double>(fx.y.size());
  CHECK(model.init_value == doctest::Approx(mean));

  // a zero learning rate in the composition formula pins the prediction at
  // init_value regardless of the stages
  GbdtModel frozen = model;
  frozen.learning_rate = 0.0;
  for (double v : frozen.predict(fx.x))
    CHECK(v == doctest::Approx(model.init_value));
}

TEST_CASE("booster composition: init 10, stage predicting -2, lr 0.5 -> 9") {
  GbdtModel model;
  model.init_value = 10;
  model.learning_rate = 0.5;
  model.n_features = 1;
  model.stages.push_back(constant_tree(-2));
  std::vector<double> row{0.0};
  CHECK(model.predict_row(row) == doctest::Approx(9.0));
}

TEST_CASE("ensemble predictions equal per-row tree composition") {
  Fixture fx = make_fixture(40, 3, 7);
  BoostParams params;
  params.n_estimators = 6;
  params.tree.max_depth = 3;

  GbdtModel booster = fit_gbdt(fx.x, fx.y, params);
  ForestModel forest = fit_random_forest(fx.x, fx.y, params);
  std::vector<double> row(fx.x.cols);
  for (std::size_t r = 0; r < fx.x.rows; ++r) {
    fx.x.row(r, row.data());
    double acc = booster.init_value;
    for (const auto& tree : booster.stages)
      acc += booster.learning_rate * tree.predict(row);
    CHECK(booster.predict(fx.x)[r] == doctest::Approx(acc).epsilon(1e-12));

    double mean = 0;
    for (const auto& tree : forest.trees) mean += tree.predict(row);
    mean /= static_cast<double>(forest.trees.size());
    CHECK(forest.predict(fx.x)[r] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("gbdt training MSE is non-increasing per stage") {
  Fixture fx = make_fixture(120, 3, 8);
  BoostParams params;
  params.n_estimators = 25;
  params.learning_rate = 0.3;
  params.tree.max_depth = 3;
  GbdtModel model = fit_gbdt(fx.x, fx.y, params);
  REQUIRE(model.training_mse.size() == 25);
  for (std::size_t m = 1; m < model.training_mse.size(); ++m)
    CHECK(model.training_mse[m] <= model.training_mse[m - 1] + 1e-12);
}

TEST_CASE("second-order boost with lambda=gamma=0 matches first-order gbdt") {
  Fixture fx = make_fixture(50, 3, 9);
  BoostParams params;
  params.n_estimators = 10;
  params.learning_rate = 0.2;
  params.tree.max_depth = 3;
  params.lambda = 0.0;
  params.gamma = 0.0;
  GbdtModel first = fit_gbdt(fx.x, fx.y, params);
  GbdtModel second = fit_second_order_boost(fx.x, fx.y, params);
  std::vector<double> p1 = first.predict(fx.x);
  std::vector<double> p2 = second.predict(fx.x);
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK(p2[i] == doctest::Approx(p1[i]).epsilon(1e-9));
}

TEST_CASE("second-order boost gain gate stops all splits under huge gamma") {
  Fixture fx = make_fixture(50, 2, 10);
  BoostParams params;
  params.n_estimators = 5;
  params.gamma = 1e12;
  GbdtModel model = fit_second_order_boost(fx.x, fx.y, params);
  for (double v : model.predict(fx.x))
    CHECK(v == doctest::Approx(model.init_value));
  for (const auto& stage : model.stages) CHECK(stage.n_leaves() == 1);
}

TEST_CASE("second-order boost training MSE is recorded and non-increasing") {
  Fixture fx = make_fixture(100, 3, 11);
  BoostParams params;
  params.n_estimators = 15;
  params.learning_rate = 0.3;
  params.tree.max_depth = 3;
  params.lambda = 1.0;
  GbdtModel model = fit_second_order_boost(fx.x, fx.y, params);
  REQUIRE(model.training_mse.size() == 15);
  for (std::size_t m = 1; m < model.training_mse.size(); ++m)
    CHECK(model.training_mse[m] <= model.training_mse[m - 1] + 1e-12);
}

TEST_CASE("ensemble training rejects bad inputs") {
  Matrix empty;
  std::vector<double> none;
  BoostParams params;
  CHECK(code_of([&] { fit_random_forest(empty, none, params); }) ==
        ErrorCode::EmptyInput);
  CHECK(code_of([&] { fit_gbdt(empty, none, params); }) ==
        ErrorCode::EmptyInput);
  CHECK(code_of([&] { fit_second_order_boost(empty, none, params); }) ==
        ErrorCode::EmptyInput);

  Fixture fx = make_fixture(10, 2, 12);
  std::vector<double> bad = fx.y;
  bad[3] = std::nan("");
  CHECK(code_of([&] { fit_gbdt(fx.x, bad, params); }) ==
        ErrorCode::InvalidInput);

  BoostParams bad_lr;
  bad_lr.learning_rate = 0.0;
  CHECK(code_of([&] { fit_gbdt(fx.x, fx.y, bad_lr); }) ==
        ErrorCode::InvalidArgument);

  BoostParams bad_reg;
  bad_reg.lambda = -1.0;
  CHECK(code_of([&] { fit_second_order_boost(fx.x, fx.y, bad_reg); }) ==
        ErrorCode::InvalidArgument);

  // prediction rejects a feature-count mismatch
  GbdtModel model = fit_gbdt(fx.x, fx.y, params);
  Matrix wrong(5, 3);
  CHECK(code_of([&] { model.predict(wrong); }) == ErrorCode::InvalidInput);
}
