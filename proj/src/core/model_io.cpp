#include "model_io.hpp"

#include <fstream>

#include "error.hpp"

namespace soniclog {

using nlohmann::json;

namespace {

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& nd : tree.nodes)
    nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value,
                     nd.cover});
  return nodes;
}

RegressionTree tree_from_json(const json& j, std::size_t n_features) {
  if (!j.is_array() || j.empty())
    throw Error(ErrorCode::ModelFormat, "tree payload must be a non-empty array");
  RegressionTree tree;
  tree.n_features = n_features;
  const int count = static_cast<int>(j.size());
  for (const json& nj : j) {
    if (!nj.is_array() || nj.size() != 6)
      throw Error(ErrorCode::ModelFormat, "tree node must have 6 fields");
    TreeNode nd;
    nd.feature = nj[0].get<int>();
    nd.threshold = nj[1].get<double>();
    nd.left = nj[2].get<int>();
    nd.right = nj[3].get<int>();
    nd.value = nj[4].get<double>();
    nd.cover = nj[5].get<double>();
    bool leaf = nd.left < 0;
    if (leaf ? nd.right >= 0
             : (nd.right < 0 || nd.left >= count || nd.right >= count ||
                nd.feature < 0 ||
                static_cast<std::size_t>(nd.feature) >= n_features))
      throw Error(ErrorCode::ModelFormat, "inconsistent tree node");
    tree.nodes.push_back(nd);
  }
  return tree;
}

json params_to_json(const BoostParams& p) {
  return {{"n_estimators", p.n_estimators},
          {"learning_rate", p.learning_rate},
          {"max_depth", p.tree.max_depth},
          {"min_samples_leaf", p.tree.min_samples_leaf},
          {"feature_subsample", p.tree.feature_subsample},
          {"lambda", p.lambda},
          {"gamma", p.gamma},
          {"bootstrap", p.bootstrap}};
}

BoostParams params_from_json(const json& j) {
  BoostParams p;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.tree.max_depth = j.at("max_depth").get<int>();
  p.tree.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.tree.feature_subsample = j.at("feature_subsample").get<int>();
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  return p;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
  std::size_t fitted_width = std::visit(
      [](const auto& m) { return m.n_features; }, model.model);
  if (model.features.size() != fitted_width)
    throw Error(ErrorCode::InvalidArgument,
                "feature list does not match the fitted model width");
  json j;
  j["format_version"] = kModelFormatVersion;
  j["family"] = family_name(model.family);
  j["target"] = model.target;
  j["features"] = model.features;
  j["transform"] = {{"log_columns", model.log_columns},
                    {"epsilon", model.epsilon}};
  j["seed"] = model.seed;
  j["params"] = params_to_json(model.params);
  j["metrics"] = model.metrics;

  json payload;
  if (const auto* rf = std::get_if<ForestModel>(&model.model)) {
    payload["feature_subsample"] = rf->feature_subsample;
    json trees = json::array();
    for (const auto& t : rf->trees) trees.push_back(tree_to_json(t));
    payload["trees"] = std::move(trees);
    payload["tree_seeds"] = rf->bootstrap_seeds;
  } else if (const auto* gb = std::get_if<GbdtModel>(&model.model)) {
    payload["init"] = gb->init_value;
    json trees = json::array();
    for (const auto& t : gb->stages) trees.push_back(tree_to_json(t));
    payload["trees"] = std::move(trees);
  } else {
    const auto& ng = std::get<NGBoostModel>(model.model);
    payload["theta0"] = {ng.theta0.mu, ng.theta0.log_sigma};
    json stages = json::array();
    for (const auto& s : ng.stages)
      stages.push_back({{"rho", s.rho},
                        {"mu", tree_to_json(s.tree_mu)},
                        {"log_sigma", tree_to_json(s.tree_log_sigma)}});
    payload["stages"] = std::move(stages);
  }
  j["payload"] = std::move(payload);
  return j;
}

TrainedModel model_from_json(const json& j) {
  try {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
      throw Error(ErrorCode::ModelFormat, "missing format_version");
    int version = j["format_version"].get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorCode::ModelFormat,
                  "unsupported model format_version " + std::to_string(version));

    TrainedModel model;
    try {
      model.family = family_from_name(j.at("family").get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::ModelFormat, e.what());
    }
    model.target = j.at("target").get<std::string>();
    model.features = j.at("features").get<std::vector<std::string>>();
    if (model.features.empty())
      throw Error(ErrorCode::ModelFormat, "model has no features");
    const json& tr = j.at("transform");
    model.log_columns = tr.at("log_columns").get<std::vector<std::string>>();
    model.epsilon = tr.at("epsilon").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.params = params_from_json(j.at("params"));
    model.params.tree.seed = model.seed;
    model.metrics = j.at("metrics").get<std::map<std::string, double>>();

    const std::size_t p = model.features.size();
    const json& payload = j.at("payload");
    switch (model.family) {
      case ModelFamily::RandomForest: {
        ForestModel rf;
        rf.n_features = p;
        rf.feature_subsample = payload.at("feature_subsample").get<int>();
        for (const json& t : payload.at("trees"))
          rf.trees.push_back(tree_from_json(t, p));
        rf.bootstrap_seeds =
            payload.at("tree_seeds").get<std::vector<std::uint64_t>>();
        if (rf.trees.empty() || rf.bootstrap_seeds.size() != rf.trees.size())
          throw Error(ErrorCode::ModelFormat, "forest payload is inconsistent");
        model.model = std::move(rf);
        break;
      }
      case ModelFamily::Gbdt:
      case ModelFamily::SecondOrder: {
        GbdtModel gb;
        gb.n_features = p;
        gb.init_value = payload.at("init").get<double>();
        gb.learning_rate = model.params.learning_rate;
        gb.second_order = model.family == ModelFamily::SecondOrder;
        gb.lambda = model.params.lambda;
        gb.gamma = model.params.gamma;
        for (const json& t : payload.at("trees"))
          gb.stages.push_back(tree_from_json(t, p));
        if (gb.stages.empty())
          throw Error(ErrorCode::ModelFormat, "booster payload has no trees");
        model.model = std::move(gb);
        break;
      }
      case ModelFamily::NGBoost: {
        NGBoostModel ng;
        ng.n_features = p;
        ng.learning_rate = model.params.learning_rate;
        const json& theta0 = payload.at("theta0");
        if (!theta0.is_array() || theta0.size() != 2)
          throw Error(ErrorCode::ModelFormat, "theta0 must be [mu, log_sigma]");
        ng.theta0 = {theta0[0].get<double>(), theta0[1].get<double>()};
        for (const json& s : payload.at("stages")) {
          NGStage stage;
          stage.rho = s.at("rho").get<double>();
          stage.tree_mu = tree_from_json(s.at("mu"), p);
          stage.tree_log_sigma = tree_from_json(s.at("log_sigma"), p);
          ng.stages.push_back(std::move(stage));
        }
        if (ng.stages.empty())
          throw Error(ErrorCode::ModelFormat, "ngboost payload has no stages");
        model.model = std::move(ng);
        break;
      }
    }
    return model;
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ModelFormat, std::string("bad model file: ") + e.what());
  }
}

void save_model(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ModelFormat,
                std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace soniclog
