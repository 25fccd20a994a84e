#include "shap.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include "error.hpp"
#include "table.hpp"

namespace soniclog {

EnsembleView view_of(const ForestModel& model) {
  EnsembleView view;
  view.base = 0;
  view.n_features = model.n_features;
  double w = 1.0 / static_cast<double>(model.trees.size());
  for (const auto& tree : model.trees) view.trees.push_back({&tree, w});
  return view;
}

EnsembleView view_of(const GbdtModel& model) {
  EnsembleView view;
  view.base = model.init_value;
  view.n_features = model.n_features;
  for (const auto& tree : model.stages)
    view.trees.push_back({&tree, model.learning_rate});
  return view;
}

EnsembleView view_of_mu(const NGBoostModel& model) {
  EnsembleView view;
  view.base = model.theta0.mu;
  view.n_features = model.n_features;
  for (const auto& stage : model.stages)
    view.trees.push_back({&stage.tree_mu, -model.learning_rate * stage.rho});
  return view;
}

namespace {

double cond_exp(const std::vector<TreeNode>& nodes, int idx,
                std::span<const double> row, std::uint32_t mask) {
  const TreeNode& nd = nodes[static_cast<std::size_t>(idx)];
  if (nd.is_leaf()) return nd.value;
  if ((mask >> nd.feature) & 1u) {
    int next = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
                   ? nd.left
                   : nd.right;
    return cond_exp(nodes, next, row, mask);
  }
  double cl = nodes[static_cast<std::size_t>(nd.left)].cover;
  double cr = nodes[static_cast<std::size_t>(nd.right)].cover;
  double total = cl + cr;
  if (!(total > 0))
    throw Error(ErrorCode::ModelFormat,
                "tree lacks the cover weights attribution marginalizes over");
  return (cl * cond_exp(nodes, nd.left, row, mask) +
          cr * cond_exp(nodes, nd.right, row, mask)) /
         total;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

}  // namespace

double subset_expectation(const RegressionTree& tree, std::span<const double> row,
                          std::uint32_t mask) {
  return cond_exp(tree.nodes, 0, row, mask);
}

double view_expectation(const EnsembleView& view, std::span<const double> row,
                        std::uint32_t mask) {
  double acc = view.base;
  for (const auto& wt : view.trees)
    acc += wt.weight * subset_expectation(*wt.tree, row, mask);
  return acc;
}

Attribution shap_row(const EnsembleView& view, std::span<const double> row) {
  const std::size_t p = view.n_features;
  if (p == 0) throw Error(ErrorCode::InvalidArgument, "view has no features");
  if (p > 20)
    throw Error(ErrorCode::Unsupported,
                "exact attribution enumerates 2^p subsets; limited to 20 features");
  if (row.size() != p)
    throw Error(ErrorCode::InvalidInput, "feature count mismatch");

  const std::uint32_t n_masks = 1u << p;
  std::vector<double> v(n_masks);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask)
    v[mask] = view_expectation(view, row, mask);

  // Shapley kernel: weight of a subset of size s is 1 / (p * C(p-1, s)).
  std::vector<double> weight(p);
  double binom = 1.0;  // C(p-1, s), built up incrementally
  for (std::size_t s = 0; s < p; ++s) {
    weight[s] = 1.0 / (static_cast<double>(p) * binom);
    binom *= static_cast<double>(p - 1 - s) / static_cast<double>(s + 1);
  }

  Attribution attr;
  attr.phi0 = v[0];
  attr.fx = v[n_masks - 1];
  attr.phi.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const std::uint32_t bit = 1u << j;
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      attr.phi[j] += weight[std::popcount(mask)] * (v[mask | bit] - v[mask]);
    }
  }
  return attr;
}

std::vector<Attribution> shap_values(const EnsembleView& view, const Matrix& x) {
  if (x.cols != view.n_features)
    throw Error(ErrorCode::InvalidInput, "feature count mismatch");
  std::vector<Attribution> out(x.rows);
  std::vector<double> row(x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    x.row(r, row.data());
    out[r] = shap_row(view, row);
  }
  return out;
}

std::vector<ImportanceEntry> mean_abs_importance(
    std::span<const Attribution> attributions,
    std::span<const std::string> feature_names) {
  if (attributions.empty())
    throw Error(ErrorCode::EmptyInput, "no attributions to summarize");
  const std::size_t p = feature_names.size();
  std::vector<ImportanceEntry> entries(p);
  for (std::size_t j = 0; j < p; ++j) entries[j].feature = feature_names[j];
  for (const auto& attr : attributions) {
    if (attr.phi.size() != p)
      throw Error(ErrorCode::InvalidArgument, "attribution width mismatch");
    for (std::size_t j = 0; j < p; ++j)
      entries[j].mean_abs_shap += std::abs(attr.phi[j]);
  }
  for (auto& e : entries)
    e.mean_abs_shap /= static_cast<double>(attributions.size());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) {
                     return a.mean_abs_shap > b.mean_abs_shap;
                   });
  return entries;
}

void write_importance_csv(const std::string& path,
                          std::span<const ImportanceEntry> entries) {
  std::ofstream out = open_out(path);
  out << "feature,mean_abs_shap\n";
  for (const auto& e : entries)
    out << e.feature << ',' << format_double(e.mean_abs_shap) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

void write_beeswarm_csv(const std::string& path,
                        std::span<const std::string> feature_names,
                        std::span<const std::int64_t> depth_index, const Matrix& x,
                        std::span<const Attribution> attributions) {
  if (attributions.size() != x.rows || depth_index.size() != x.rows ||
      feature_names.size() != x.cols)
    throw Error(ErrorCode::InvalidInput, "beeswarm input shape mismatch");
  std::ofstream out = open_out(path);
  out << "feature,depth_index,shap,value\n";
  for (std::size_t j = 0; j < x.cols; ++j)
    for (std::size_t r = 0; r < x.rows; ++r)
      out << feature_names[j] << ',' << depth_index[r] << ','
          << format_double(attributions[r].phi[j]) << ','
          << format_double(x.at(r, j)) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

void write_dependence_csv(const std::string& path,
                          std::span<const std::int64_t> depth_index,
                          const Matrix& x,
                          std::span<const Attribution> attributions,
                          std::size_t feature_a, std::size_t feature_b) {
  if (attributions.size() != x.rows || depth_index.size() != x.rows)
    throw Error(ErrorCode::InvalidInput, "dependence input shape mismatch");
  if (feature_a >= x.cols || feature_b >= x.cols)
    throw Error(ErrorCode::Schema, "dependence feature index out of range");
  std::ofstream out = open_out(path);
  out << "depth_index,value_a,value_b,shap_a\n";
  for (std::size_t r = 0; r < x.rows; ++r)
    out << depth_index[r] << ',' << format_double(x.at(r, feature_a)) << ','
        << format_double(x.at(r, feature_b)) << ','
        << format_double(attributions[r].phi[feature_a]) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace soniclog
