#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ensemble.hpp"
#include "ngboost.hpp"

namespace soniclog {

// Everything needed to reuse a fit: the fitted ensemble plus the column
// contract (features in order, target, input transform) it was trained under.
struct TrainedModel {
  ModelFamily family = ModelFamily::Gbdt;
  std::string target;
  std::vector<std::string> features;
  std::vector<std::string> log_columns;  // columns ln-transformed before fitting
  double epsilon = 1e-6;                 // floor used by the log transform
  std::uint64_t seed = 0;
  BoostParams params;
  std::map<std::string, double> metrics;  // training-time metrics, by name
  std::variant<ForestModel, GbdtModel, NGBoostModel> model;

  std::size_t n_features() const { return features.size(); }
  bool probabilistic() const { return family == ModelFamily::NGBoost; }
};

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

// File forms write/parse the JSON above; the same inputs always produce
// byte-identical files.
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

}  // namespace soniclog
