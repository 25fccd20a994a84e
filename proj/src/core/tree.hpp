#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace soniclog {

// Column-major numeric feature matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
  double& at(std::size_t r, std::size_t c) { return data[c * rows + r]; }
  std::span<const double> col(std::size_t c) const {
    return {data.data() + c * rows, rows};
  }
  void row(std::size_t r, double* out) const {
    for (std::size_t c = 0; c < cols; ++c) out[c] = at(r, c);
  }
};

struct TreeParams {
  int max_depth = 6;          // in [1, 64]
  int min_samples_leaf = 1;   // compared against node cover
  int feature_subsample = 0;  // features tried per split; 0 = all
  std::uint64_t seed = 0;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0;
  double sse_reduction = 0;
};

// Array node; leaf iff left < 0. Indices are offsets into the owning tree's
// node vector, root at 0. Cover is kept on every node: the explainer's
// conditional expectations weight unknown-feature branches by child covers.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
  double cover = 0;

  bool is_leaf() const { return left < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  std::size_t n_features = 0;
  TreeParams params;

  // Routes by "go left iff value <= threshold" and returns the leaf value.
  double predict(std::span<const double> x) const;
  int n_leaves() const;
};

// Per-feature row orderings, shared by every tree grown on the same matrix.
struct Presort {
  std::vector<std::vector<std::uint32_t>> order;  // order[j]: rows by (value, index)
  static Presort build(const Matrix& x);
};

// Exact greedy split of one feature vector against targets, maximizing
// SSE(parent) - SSE(left) - SSE(right) with midpoint thresholds. Returns
// nullopt when all feature values or all targets are identical.
std::optional<SplitCandidate> best_split(std::span<const double> feature_values,
                                         std::span<const double> targets);

// Greedy top-down least-squares tree; leaf value is the (weighted) mean of
// its targets. Empty weights means uniform.
RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        std::span<const double> sample_weights,
                        const TreeParams& params);
RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        std::span<const double> sample_weights,
                        const TreeParams& params, const Presort& presort);

// Tree on per-row gradient/hessian pairs: leaf weight -G/(H+lambda), split
// gain ((GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l))/2 - gamma), splits only while
// the gain stays positive.
RegressionTree fit_gradient_tree(const Matrix& x, std::span<const double> grad,
                                 std::span<const double> hess, double lambda,
                                 double gamma, const TreeParams& params,
                                 const Presort& presort);

}  // namespace soniclog
