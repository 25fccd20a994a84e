#include "tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace soniclog {

namespace {

constexpr int kDepthCap = 64;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-row statistics driving one tree fit. Least-squares mode uses
// (num, den, cover) = (w*y, w, w) with leaf A/B; second-order mode uses
// (g, h, 1) with leaf -A/(B+lambda).
struct Objective {
  std::span<const double> num;
  std::span<const double> den;
  std::span<const double> cover;
  std::span<const double> purity;  // targets; empty disables the purity stop
  double lambda = 0;
  double min_gain = kNegInf;  // candidate accepted iff gain > min_gain
  double gain_scale = 1.0;
  double leaf_sign = 1.0;
};

struct NodeBuild {
  int node_id = -1;
  double sum_num = 0, sum_den = 0, sum_cover = 0;
  double purity_min = 0, purity_max = 0;
  bool skip = false;  // cannot split: too small or pure

  double best_gain = kNegInf;
  int best_feature = -1;
  double best_threshold = 0;

  // scan state, reset per feature
  double run_num = 0, run_den = 0, run_cover = 0;
  double prev_value = 0;
  bool has_prev = false;

  std::vector<char> allowed;  // empty = all features
};

double partial_score(double a, double b, double lambda) {
  double d = b + lambda;
  return d > 0 ? a * a / d : 0.0;
}

void validate_params(const TreeParams& params, std::size_t n_features) {
  if (params.max_depth < 1 || params.max_depth > kDepthCap)
    throw Error(ErrorCode::InvalidArgument,
                "max_depth must be in [1, " + std::to_string(kDepthCap) + "]");
  if (params.min_samples_leaf < 1)
    throw Error(ErrorCode::InvalidArgument, "min_samples_leaf must be >= 1");
  if (params.feature_subsample < 0 ||
      static_cast<std::size_t>(params.feature_subsample) > n_features)
    throw Error(ErrorCode::InvalidArgument,
                "feature_subsample must be in [0, feature count]");
}

RegressionTree grow(const Matrix& x, const Objective& obj,
                    const TreeParams& params, const Presort& presort,
                    SplitCandidate* root_split_out) {
  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  const double msl = static_cast<double>(params.min_samples_leaf);
  const bool subsampling =
      params.feature_subsample > 0 &&
      static_cast<std::size_t>(params.feature_subsample) < p;
  Rng rng(params.seed);

  RegressionTree tree;
  tree.n_features = p;
  tree.params = params;

  auto leaf_value = [&](const NodeBuild& nb) {
    return obj.leaf_sign * nb.sum_num / (nb.sum_den + obj.lambda);
  };

  // node id -> slot in the active list; -1 for finalized nodes
  std::vector<std::int32_t> slot_of;
  std::vector<std::int32_t> position(n, -1);

  NodeBuild root;
  root.node_id = 0;
  bool purity_init = false;
  for (std::size_t r = 0; r < n; ++r) {
    if (obj.cover[r] <= 0) continue;
    position[r] = 0;
    root.sum_num += obj.num[r];
    root.sum_den += obj.den[r];
    root.sum_cover += obj.cover[r];
    if (!obj.purity.empty()) {
      double y = obj.purity[r];
      if (!purity_init) {
        root.purity_min = root.purity_max = y;
        purity_init = true;
      } else {
        root.purity_min = std::min(root.purity_min, y);
        root.purity_max = std::max(root.purity_max, y);
      }
    }
  }
  if (root.sum_cover <= 0)
    throw Error(ErrorCode::EmptyInput, "no rows with positive weight");

  tree.nodes.emplace_back();
  slot_of.assign(1, 0);
  std::vector<NodeBuild> active{root};

  for (int depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
    for (auto& nb : active) {
      nb.skip = nb.sum_cover < 2 * msl;
      if (!obj.purity.empty() && nb.purity_min == nb.purity_max)
        nb.skip = true;
      nb.best_gain = obj.min_gain;
      nb.best_feature = -1;
      if (subsampling && !nb.skip) {
        auto chosen = rng.sample_indices(static_cast<int>(p),
                                         params.feature_subsample);
        nb.allowed.assign(p, 0);
        for (int j : chosen) nb.allowed[static_cast<std::size_t>(j)] = 1;
      }
    }

    for (std::size_t j = 0; j < p; ++j) {
      for (auto& nb : active) {
        nb.run_num = nb.run_den = nb.run_cover = 0;
        nb.has_prev = false;
      }
      const auto& ord = presort.order[j];
      for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t r = ord[k];
        std::int32_t nid = position[r];
        if (nid < 0) continue;
        NodeBuild& nb = active[static_cast<std::size_t>(slot_of[nid])];
        if (nb.skip) continue;
        if (!nb.allowed.empty() && !nb.allowed[j]) continue;
        double v = x.at(r, j);
        if (nb.has_prev && v > nb.prev_value) {
          double mid = 0.5 * (nb.prev_value + v);
          if (mid > nb.prev_value && mid < v) {
            double cov_l = nb.run_cover;
            double cov_r = nb.sum_cover - cov_l;
            if (cov_l >= msl && cov_r >= msl) {
              double gain =
                  obj.gain_scale *
                  (partial_score(nb.run_num, nb.run_den, obj.lambda) +
                   partial_score(nb.sum_num - nb.run_num,
                                 nb.sum_den - nb.run_den, obj.lambda) -
                   partial_score(nb.sum_num, nb.sum_den, obj.lambda));
              if (gain > nb.best_gain) {
                nb.best_gain = gain;
                nb.best_feature = static_cast<int>(j);
                nb.best_threshold = mid;
              }
            }
          }
        }
        nb.run_num += obj.num[r];
        nb.run_den += obj.den[r];
        nb.run_cover += obj.cover[r];
        nb.prev_value = v;
        nb.has_prev = true;
      }
    }

    // Finalize this level: leaves for unsplittable nodes, children otherwise.
    std::vector<NodeBuild> next;
    for (auto& nb : active) {
      TreeNode& node = tree.nodes[static_cast<std::size_t>(nb.node_id)];
      node.cover = nb.sum_cover;
      if (nb.best_feature < 0) {
        node.value = leaf_value(nb);
        continue;
      }
      if (nb.node_id == 0 && root_split_out) {
        root_split_out->feature = nb.best_feature;
        root_split_out->threshold = nb.best_threshold;
        root_split_out->sse_reduction = std::max(nb.best_gain, 0.0);
      }
      const int left_id = static_cast<int>(tree.nodes.size());
      const int right_id = left_id + 1;
      node.feature = nb.best_feature;
      node.threshold = nb.best_threshold;
      node.left = left_id;
      node.right = right_id;
      // growing tree.nodes invalidates `node`; don't touch it past here
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      slot_of.resize(tree.nodes.size(), -1);
      NodeBuild l, r;
      l.node_id = left_id;
      r.node_id = right_id;
      slot_of[static_cast<std::size_t>(left_id)] =
          static_cast<std::int32_t>(next.size());
      next.push_back(std::move(l));
      slot_of[static_cast<std::size_t>(right_id)] =
          static_cast<std::int32_t>(next.size());
      next.push_back(std::move(r));
    }

    // Route rows into children and accumulate child statistics.
    std::vector<char> child_seen(next.size(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      std::int32_t nid = position[r];
      if (nid < 0) continue;
      const TreeNode& node = tree.nodes[static_cast<std::size_t>(nid)];
      if (node.is_leaf()) {
        position[r] = -1;
        continue;
      }
      double v = x.at(r, static_cast<std::size_t>(node.feature));
      std::int32_t child = v <= node.threshold ? node.left : node.right;
      position[r] = child;
      NodeBuild& cb = next[static_cast<std::size_t>(slot_of[child])];
      cb.sum_num += obj.num[r];
      cb.sum_den += obj.den[r];
      cb.sum_cover += obj.cover[r];
      if (!obj.purity.empty()) {
        double y = obj.purity[r];
        std::size_t cslot = static_cast<std::size_t>(slot_of[child]);
        if (!child_seen[cslot]) {
          cb.purity_min = cb.purity_max = y;
          child_seen[cslot] = 1;
        } else {
          cb.purity_min = std::min(cb.purity_min, y);
          cb.purity_max = std::max(cb.purity_max, y);
        }
      }
    }
    active = std::move(next);
  }

  // Depth cap reached: everything still active becomes a leaf.
  for (auto& nb : active) {
    TreeNode& node = tree.nodes[static_cast<std::size_t>(nb.node_id)];
    node.cover = nb.sum_cover;
    node.value = leaf_value(nb);
  }
  return tree;
}

}  // namespace

Presort Presort::build(const Matrix& x) {
  Presort ps;
  ps.order.resize(x.cols);
  for (std::size_t j = 0; j < x.cols; ++j) {
    auto& ord = ps.order[j];
    ord.resize(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r)
      ord[r] = static_cast<std::uint32_t>(r);
    auto col = x.col(j);
    std::sort(ord.begin(), ord.end(),
              [&col](std::uint32_t a, std::uint32_t b) {
                if (col[a] != col[b]) return col[a] < col[b];
                return a < b;
              });
  }
  return ps;
}

double RegressionTree::predict(std::span<const double> x) const {
  if (x.size() != n_features)
    throw Error(ErrorCode::InvalidInput,
                "expected " + std::to_string(n_features) + " features, got " +
                    std::to_string(x.size()));
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    double v = x[static_cast<std::size_t>(node->feature)];
    if (!std::isfinite(v))
      throw Error(ErrorCode::InvalidInput,
                  "non-finite value for feature " +
                      std::to_string(node->feature));
    node = &nodes[static_cast<std::size_t>(v <= node->threshold ? node->left
                                                                : node->right)];
  }
  return node->value;
}

int RegressionTree::n_leaves() const {
  int count = 0;
  for (const auto& node : nodes) count += node.is_leaf() ? 1 : 0;
  return count;
}

std::optional<SplitCandidate> best_split(
    std::span<const double> feature_values, std::span<const double> targets) {
  if (feature_values.size() != targets.size())
    throw Error(ErrorCode::InvalidArgument,
                "feature/target length mismatch: " +
                    std::to_string(feature_values.size()) + " vs " +
                    std::to_string(targets.size()));
  if (feature_values.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least 2 rows");

  Matrix x(feature_values.size(), 1);
  std::copy(feature_values.begin(), feature_values.end(), x.data.begin());
  Presort presort = Presort::build(x);

  std::vector<double> ones(targets.size(), 1.0);
  Objective obj;
  obj.num = targets;
  obj.den = ones;
  obj.cover = ones;
  obj.purity = targets;

  TreeParams params;
  params.max_depth = 1;
  SplitCandidate cand;
  RegressionTree stump = grow(x, obj, params, presort, &cand);
  if (stump.nodes[0].is_leaf()) return std::nullopt;
  return cand;
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        std::span<const double> sample_weights,
                        const TreeParams& params) {
  return fit_tree(x, targets, sample_weights, params, Presort::build(x));
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        std::span<const double> sample_weights,
                        const TreeParams& params, const Presort& presort) {
  if (x.rows == 0) throw Error(ErrorCode::EmptyInput, "empty training input");
  if (targets.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "targets/rows length mismatch");
  if (!sample_weights.empty() && sample_weights.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "weights/rows length mismatch");
  validate_params(params, x.cols);
  for (double y : targets)
    if (!std::isfinite(y))
      throw Error(ErrorCode::InvalidInput, "non-finite training target");

  std::vector<double> num(x.rows), den(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    double w = sample_weights.empty() ? 1.0 : sample_weights[r];
    if (w < 0)
      throw Error(ErrorCode::InvalidArgument, "negative sample weight");
    num[r] = w * targets[r];
    den[r] = w;
  }
  Objective obj;
  obj.num = num;
  obj.den = den;
  obj.cover = den;
  obj.purity = targets;
  return grow(x, obj, params, presort, nullptr);
}

RegressionTree fit_gradient_tree(const Matrix& x, std::span<const double> grad,
                                 std::span<const double> hess, double lambda,
                                 double gamma, const TreeParams& params,
                                 const Presort& presort) {
  if (x.rows == 0) throw Error(ErrorCode::EmptyInput, "empty training input");
  if (grad.size() != x.rows || hess.size() != x.rows)
    throw Error(ErrorCode::InvalidArgument, "gradient/rows length mismatch");
  validate_params(params, x.cols);

  std::vector<double> ones(x.rows, 1.0);
  Objective obj;
  obj.num = grad;
  obj.den = hess;
  obj.cover = ones;
  obj.lambda = lambda;
  obj.min_gain = gamma;
  obj.gain_scale = 0.5;
  obj.leaf_sign = -1.0;
  return grow(x, obj, params, presort, nullptr);
}

}  // namespace soniclog
