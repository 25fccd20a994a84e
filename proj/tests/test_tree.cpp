#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "../src/core/error.hpp"
#include "../src/core/tree.hpp"

using namespace soniclog;

namespace {

Matrix matrix_from_columns(const std::vector<std::vector<double>>& cols) {
  Matrix x(cols.empty() ? 0 : cols[0].size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) x.at(r, c) = cols[c][r];
  return x;
}

double sse_of(const std::vector<double>& y) {
  if (y.empty()) return 0.0;
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sse = 0;
  for (double v : y) sse += (v - mean) * (v - mean);
  return sse;
}

// Independent oracle: enumerate every (feature, midpoint threshold) pair and
// measure the SSE reduction directly from the induced partition.
struct OracleSplit {
  int feature = -1;
  double threshold = 0;
  double reduction = -1;
};

OracleSplit exhaustive_best_split(const Matrix& x,
                                  const std::vector<double>& y) {
  OracleSplit best;
  double parent = sse_of(y);
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::vector<double> values(x.col(f).begin(), x.col(f).end());
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      double threshold = (distinct[i] + distinct[i + 1]) / 2.0;
      std::vector<double> left, right;
      for (std::size_t r = 0; r < values.size(); ++r)
        (values[r] <= threshold ? left : right).push_back(y[r]);
      if (left.empty() || right.empty()) continue;
      double reduction = parent - sse_of(left) - sse_of(right);
      // mirror the production tie rule: first strictly better wins, scanning
      // features in order and thresholds ascending
      if (reduction > best.reduction + 1e-12) {
        best = {static_cast<int>(f), threshold, reduction};
      }
    }
  }
  return best;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

// Recursively verify child covers sum to the parent cover.
void check_cover_sums(const RegressionTree& tree, int node_index) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
  if (node.is_leaf()) return;
  const TreeNode& left = tree.nodes[static_cast<std::size_t>(node.left)];
  const TreeNode& right = tree.nodes[static_cast<std::size_t>(node.right)];
  CHECK(left.cover + right.cover == doctest::Approx(node.cover));
  check_cover_sums(tree, node.left);
  check_cover_sums(tree, node.right);
}

int max_path_depth(const RegressionTree& tree, int node_index) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
  if (node.is_leaf()) return 0;
  return 1 + std::max(max_path_depth(tree, node.left),
                      max_path_depth(tree, node.right));
}

}  // namespace

TEST_CASE("best_split finds the hand-computed optimum") {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<double> y{0, 0, 10, 10};
  auto split = best_split(x, y);
  REQUIRE(split.has_value());
  CHECK(split->threshold == doctest::Approx(2.5));
  // parent SSE 100, both children pure
  CHECK(split->sse_reduction == doctest::Approx(100.0));
}

TEST_CASE("best_split returns none for constant inputs") {
  std::vector<double> x{1, 2, 3};
  std::vector<double> y_const{5, 5, 5};
  CHECK(!best_split(x, y_const).has_value());
  std::vector<double> x_const{2, 2, 2};
  std::vector<double> y{1, 2, 3};
  CHECK(!best_split(x_const, y).has_value());
}

TEST_CASE("best_split rejects mismatched lengths") {
  std::vector<double> x{1, 2, 3};
  std::vector<double> y{1, 2};
  CHECK(code_of([&] { best_split(x, y); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("greedy root split matches exhaustive enumeration on random data") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_dist(2, 64);
  std::uniform_int_distribution<int> p_dist(1, 4);
  std::normal_distribution<double> g(0, 1);
  std::uniform_int_distribution<int> lattice(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    int n = n_dist(rng);
    int p = p_dist(rng);
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(p));
    std::vector<double> y;
    for (int r = 0; r < n; ++r) {
      // a quantized lattice provokes ties and duplicate feature values
      for (auto& c : cols) c.push_back(trial % 2 == 0 ? g(rng) : lattice(rng));
      y.push_back(trial % 3 == 0 ? lattice(rng) : g(rng));
    }
    Matrix x = matrix_from_columns(cols);
    OracleSplit oracle = exhaustive_best_split(x, y);

    TreeParams params;
    params.max_depth = 1;
    RegressionTree tree = fit_tree(x, y, {}, params);
    if (oracle.reduction <= 0) {
      // nothing reducible: either a leaf, or a zero-gain split on impure
      // nodes (CART admits those); both predict the parent mean
      continue;
    }
    REQUIRE(!tree.nodes[0].is_leaf());
    // the greedy split achieves the oracle's best reduction
    std::vector<double> left, right;
    for (int r = 0; r < n; ++r) {
      double v = x.at(static_cast<std::size_t>(r),
                      static_cast<std::size_t>(tree.nodes[0].feature));
      (v <= tree.nodes[0].threshold ? left : right).push_back(
          y[static_cast<std::size_t>(r)]);
    }
    double achieved = sse_of(y) - sse_of(left) - sse_of(right);
    CHECK(achieved == doctest::Approx(oracle.reduction).epsilon(1e-9));
  }
}

TEST_CASE("fit_tree collapses constant targets to a single leaf") {
  Matrix x = matrix_from_columns({{1, 2, 3, 4, 5}});
  std::vector<double> y{7, 7, 7, 7, 7};
  RegressionTree tree = fit_tree(x, y, {}, TreeParams{});
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].value == 7.0);
  CHECK(tree.nodes[0].cover == 5.0);
}

TEST_CASE("fit_tree stump reproduces the best_split example") {
  Matrix x = matrix_from_columns({{1, 2, 3, 4}});
  std::vector<double> y{0, 0, 10, 10};
  TreeParams params;
  params.max_depth = 1;
  RegressionTree tree = fit_tree(x, y, {}, params);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].threshold == doctest::Approx(2.5));
  CHECK(tree.predict(std::vector<double>{2.0}) == 0.0);
  CHECK(tree.predict(std::vector<double>{2.5}) == 0.0);  // boundary goes left
  CHECK(tree.predict(std::vector<double>{3.0}) == 10.0);
}

TEST_CASE("fit_tree separates XOR at depth 2 but not depth 1") {
  Matrix x = matrix_from_columns({{0, 0, 1, 1}, {0, 1, 0, 1}});
  std::vector<double> y{0, 1, 1, 0};
  TreeParams deep;
  deep.max_depth = 2;
  RegressionTree t2 = fit_tree(x, y, {}, deep);
  double sse2 = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    double row[2];
    x.row(r, row);
    double diff = t2.predict(std::span<const double>(row, 2)) - y[r];
    sse2 += diff * diff;
  }
  CHECK(sse2 == doctest::Approx(0.0));

  TreeParams shallow;
  shallow.max_depth = 1;
  RegressionTree t1 = fit_tree(x, y, {}, shallow);
  double sse1 = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    double row[2];
    x.row(r, row);
    double diff = t1.predict(std::span<const double>(row, 2)) - y[r];
    sse1 += diff * diff;
  }
  CHECK(sse1 > 0.0);
}

TEST_CASE("predict routes by <= and validates its input") {
  Matrix x = matrix_from_columns({{1, 2, 3, 4}});
  std::vector<double> y{0, 0, 10, 10};
  RegressionTree tree = fit_tree(x, y, {}, TreeParams{});
  CHECK(code_of([&] {
          tree.predict(std::vector<double>{std::nan("")});
        }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] { tree.predict(std::vector<double>{1.0, 2.0}); }) ==
        ErrorCode::InvalidInput);

  // single-leaf tree ignores feature values entirely
  std::vector<double> constant{5, 5};
  RegressionTree leaf = fit_tree(matrix_from_columns({{1, 2}}), constant, {},
                                 TreeParams{});
  CHECK(leaf.predict(std::vector<double>{123.0}) == 5.0);
}

TEST_CASE("tree structure is invariant under monotone feature rescaling") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> cols(3);
  std::vector<double> y;
  for (int r = 0; r < 120; ++r) {
    for (auto& c : cols) c.push_back(g(rng));
    y.push_back(cols[0].back() * 2 - cols[1].back() + 0.3 * g(rng));
  }
  TreeParams params;
  params.max_depth = 4;
  RegressionTree base = fit_tree(matrix_from_columns(cols), y, {}, params);

  // strictly increasing transform of feature 1: x -> exp(x)
  auto warped_cols = cols;
  for (double& v : warped_cols[1]) v = std::exp(v);
  RegressionTree warped = fit_tree(matrix_from_columns(warped_cols), y, {},
                                   params);

  REQUIRE(base.nodes.size() == warped.nodes.size());
  for (std::size_t i = 0; i < base.nodes.size(); ++i) {
    CHECK(base.nodes[i].feature == warped.nodes[i].feature);
    CHECK(base.nodes[i].left == warped.nodes[i].left);
    CHECK(base.nodes[i].right == warped.nodes[i].right);
    CHECK(base.nodes[i].value == doctest::Approx(warped.nodes[i].value));
    CHECK(base.nodes[i].cover == warped.nodes[i].cover);
  }
}

TEST_CASE("training SSE is non-increasing in max_depth") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> cols(2);
  std::vector<double> y;
  for (int r = 0; r < 80; ++r) {
    for (auto& c : cols) c.push_back(g(rng));
    y.push_back(std::sin(cols[0].back()) + 0.5 * g(rng));
  }
  Matrix x = matrix_from_columns(cols);
  double previous = std::numeric_limits<double>::infinity();
  for (int depth = 1; depth <= 6; ++depth) {
    TreeParams params;
    params.max_depth = depth;
    RegressionTree tree = fit_tree(x, y, {}, params);
    double sse = 0;
    for (std::size_t r = 0; r < y.size(); ++r) {
      double row[2];
      x.row(r, row);
      double diff = tree.predict(std::span<const double>(row, 2)) - y[r];
      sse += diff * diff;
    }
    CHECK(sse <= previous + 1e-9);
    previous = sse;
  }
}

TEST_CASE("covers sum and leaf/depth limits hold on a random fit") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> cols(3);
  std::vector<double> y;
  for (int r = 0; r < 200; ++r) {
    for (auto& c : cols) c.push_back(g(rng));
    y.push_back(g(rng));
  }
  TreeParams params;
  params.max_depth = 5;
  params.min_samples_leaf = 7;
  RegressionTree tree = fit_tree(matrix_from_columns(cols), y, {}, params);
  check_cover_sums(tree, 0);
  CHECK(max_path_depth(tree, 0) <= params.max_depth);
  for (const TreeNode& node : tree.nodes)
    if (node.is_leaf()) CHECK(node.cover >= params.min_samples_leaf);
  CHECK(tree.nodes[0].cover == 200.0);
}

TEST_CASE("sample weights shift leaf values to the weighted mean") {
  Matrix x = matrix_from_columns({{1, 2}});
  std::vector<double> y{0, 10};
  std::vector<double> w{3, 1};
  TreeParams leaf_only;
  leaf_only.max_depth = 1;
  leaf_only.min_samples_leaf = 4;  // forces a single leaf
  RegressionTree tree = fit_tree(x, y, w, leaf_only);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].value == doctest::Approx(2.5));  // (3*0 + 1*10) / 4
  CHECK(tree.nodes[0].cover == doctest::Approx(4.0));  // total weight

  CHECK(code_of([&] {
          fit_tree(x, y, std::vector<double>{-1, 1}, TreeParams{});
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("feature_subsample is deterministic in the seed") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> cols(6);
  std::vector<double> y;
  for (int r = 0; r < 100; ++r) {
    for (auto& c : cols) c.push_back(g(rng));
    y.push_back(cols[2].back() + g(rng) * 0.1);
  }
  Matrix x = matrix_from_columns(cols);
  TreeParams params;
  params.max_depth = 3;
  params.feature_subsample = 2;
  params.seed = 77;
  RegressionTree a = fit_tree(x, y, {}, params);
  RegressionTree b = fit_tree(x, y, {}, params);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
    CHECK(a.nodes[i].value == b.nodes[i].value);
  }
}

TEST_CASE("fit_tree validates its inputs") {
  Matrix empty;
  std::vector<double> none;
  CHECK(code_of([&] { fit_tree(empty, none, {}, TreeParams{}); }) ==
        ErrorCode::EmptyInput);

  Matrix x = matrix_from_columns({{1, 2}});
  std::vector<double> y{1, 2};
  TreeParams bad_depth;
  bad_depth.max_depth = 0;
  CHECK(code_of([&] { fit_tree(x, y, {}, bad_depth); }) ==
        ErrorCode::InvalidArgument);
  bad_depth.max_depth = 65;
  CHECK(code_of([&] { fit_tree(x, y, {}, bad_depth); }) ==
        ErrorCode::InvalidArgument);

  std::vector<double> bad_y{1, std::nan("")};
  CHECK(code_of([&] { fit_tree(x, bad_y, {}, TreeParams{}); }) ==
        ErrorCode::InvalidInput);

  std::vector<double> short_y{1};
  CHECK(code_of([&] { fit_tree(x, short_y, {}, TreeParams{}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("fit_gradient_tree computes regularized leaf weights and gain gates") {
  // one stage of squared loss from a zero model: g = -y, h = 1
  Matrix x = matrix_from_columns({{1, 2, 3, 4}});
  std::vector<double> y{0, 0, 10, 10};
  std::vector<double> g(4), h(4, 1.0);
  for (std::size_t i = 0; i < 4; ++i) g[i] = -y[i];
  Presort presort = Presort::build(x);

  TreeParams params;
  params.max_depth = 1;
  RegressionTree plain = fit_gradient_tree(x, g, h, 0.0, 0.0, params, presort);
  REQUIRE(plain.nodes.size() == 3);
  // leaf weight -G/(H+lambda): left |-0| / 2 = 0, right 20/2 = 10
  CHECK(plain.predict(std::vector<double>{1.0}) == doctest::Approx(0.0));
  CHECK(plain.predict(std::vector<double>{4.0}) == doctest::Approx(10.0));

  // lambda shrinks the leaves toward zero
  RegressionTree shrunk = fit_gradient_tree(x, g, h, 2.0, 0.0, params, presort);
  CHECK(shrunk.predict(std::vector<double>{4.0}) == doctest::Approx(5.0));

  // a huge gamma rejects every split: the root leaf holds -G/(H+lambda)
  RegressionTree gated = fit_gradient_tree(x, g, h, 0.0, 1e9, params, presort);
  REQUIRE(gated.nodes.size() == 1);
  CHECK(gated.nodes[0].value == doctest::Approx(5.0));  // 20/4
}
