#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "ngboost.hpp"
#include "tree.hpp"

namespace soniclog {

// A model reduced to what attribution needs: an additive constant plus a
// weighted sum of regression trees.  Views borrow the trees; keep the source
// model alive while the view is in use.
struct WeightedTree {
  const RegressionTree* tree = nullptr;
  double weight = 1.0;
};

struct EnsembleView {
  double base = 0;
  std::vector<WeightedTree> trees;
  std::size_t n_features = 0;
};

EnsembleView view_of(const ForestModel& model);
EnsembleView view_of(const GbdtModel& model);
// NGBoost view over the mean parameter only: attribution of mu(x).
EnsembleView view_of_mu(const NGBoostModel& model);

// Expected tree output when only the features in `mask` (bit j = feature j)
// are known to equal row[j]; unknown features marginalize over both subtrees
// weighted by training cover.
double subset_expectation(const RegressionTree& tree, std::span<const double> row,
                          std::uint32_t mask);

// Same game evaluated on the whole view: base plus the weighted per-tree
// expectations.  The full mask recovers the ensemble prediction exactly.
double view_expectation(const EnsembleView& view, std::span<const double> row,
                        std::uint32_t mask);

struct Attribution {
  double phi0 = 0;          // expectation with nothing known
  std::vector<double> phi;  // one contribution per feature
  double fx = 0;            // the prediction being explained; phi0 + sum(phi)
};

// Exact Shapley values by enumerating all 2^p feature subsets; p is capped at
// 20 to keep the enumeration tractable.
Attribution shap_row(const EnsembleView& view, std::span<const double> row);
std::vector<Attribution> shap_values(const EnsembleView& view, const Matrix& x);

struct ImportanceEntry {
  std::string feature;
  double mean_abs_shap = 0;
};

// Global importance: mean |phi_j| over rows, sorted descending (ties keep the
// original feature order).
std::vector<ImportanceEntry> mean_abs_importance(
    std::span<const Attribution> attributions,
    std::span<const std::string> feature_names);

void write_importance_csv(const std::string& path,
                          std::span<const ImportanceEntry> entries);

// Long-form per-sample records for beeswarm plots: one row per (sample,
// feature) with the attribution and the raw feature value.
void write_beeswarm_csv(const std::string& path,
                        std::span<const std::string> feature_names,
                        std::span<const std::int64_t> depth_index, const Matrix& x,
                        std::span<const Attribution> attributions);

// Dependence records for feature `a` colored by feature `b`.
void write_dependence_csv(const std::string& path,
                          std::span<const std::int64_t> depth_index,
                          const Matrix& x,
                          std::span<const Attribution> attributions,
                          std::size_t feature_a, std::size_t feature_b);

}  // namespace soniclog
