#include "mspi/learners/serialize.hpp"

#include "mspi/error.hpp"

namespace mspi {

using nlohmann::json;

json to_json(const StandardizationParams& p) {
  return {{"retained", p.retained}, {"dropped", p.dropped}, {"mean", p.mean}, {"sd", p.sd}};
}

json to_json(const LogitModel& m) {
  return {{"kind", "logit"},
          {"penalty", m.penalty == Penalty::l1 ? "l1" : "l2"},
          {"lambda", m.lambda},
          {"intercept", m.intercept},
          {"coef", m.coef},
          {"iterations", m.iterations},
          {"objective", m.objective},
          {"converged", m.converged},
          {"base_rate_fallback", m.base_rate_fallback}};
}

json to_json(const Tree& t) {
  json nodes = json::array();
  for (const TreeNode& n : t.nodes) {
    if (n.is_leaf())
      nodes.push_back({{"value", n.value}, {"samples", n.samples}});
    else
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"samples", n.samples}});
  }
  return {{"nodes", nodes}};
}

json to_json(const ForestModel& m) {
  json trees = json::array();
  for (const Tree& t : m.trees) trees.push_back(to_json(t));
  return {{"kind", "random_forest"},
          {"n_trees", m.params.n_trees},
          {"max_depth", m.params.max_depth},
          {"min_leaf", m.params.min_leaf},
          {"features_per_split", m.features_per_split},
          {"bootstrap", m.params.bootstrap},
          {"n_features", m.n_features},
          {"seed", m.seed},
          {"trees", trees}};
}

json to_json(const BoostModel& m) {
  json trees = json::array();
  for (const Tree& t : m.trees) trees.push_back(to_json(t));
  return {{"kind", "gradient_boosting"},
          {"f0", m.f0},
          {"n_stages", m.params.n_stages},
          {"shrinkage", m.params.shrinkage},
          {"max_depth", m.params.max_depth},
          {"min_leaf", m.params.min_leaf},
          {"n_features", m.n_features},
          {"train_loss", m.train_loss},
          {"trees", trees}};
}

json to_json(const CalibrationMap& m) {
  return {{"kind", "platt"},
          {"slope", m.slope},
          {"offset", m.offset},
          {"scale", m.scale == ScoreScale::probability ? "probability" : "log_odds"},
          {"fallback", m.fallback}};
}

LogitModel logit_from_json(const json& j) {
  try {
    LogitModel m;
    m.penalty = j.at("penalty").get<std::string>() == "l1" ? Penalty::l1 : Penalty::l2;
    m.lambda = j.at("lambda").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.coef = j.at("coef").get<std::vector<double>>();
    m.iterations = j.value("iterations", std::size_t{0});
    m.objective = j.value("objective", 0.0);
    m.converged = j.value("converged", true);
    m.base_rate_fallback = j.value("base_rate_fallback", false);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("logit model JSON: ") + e.what());
  }
}

Tree tree_from_json(const json& j) {
  try {
    Tree t;
    for (const auto& n : j.at("nodes")) {
      TreeNode node;
      node.samples = n.value("samples", std::size_t{0});
      if (n.contains("feature")) {
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
      } else {
        node.value = n.at("value").get<double>();
      }
      t.nodes.push_back(node);
    }
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("tree JSON: ") + e.what());
  }
}

CalibrationMap calibration_from_json(const json& j) {
  try {
    CalibrationMap m;
    m.slope = j.at("slope").get<double>();
    m.offset = j.at("offset").get<double>();
    m.scale = j.at("scale").get<std::string>() == "log_odds" ? ScoreScale::log_odds
                                                              : ScoreScale::probability;
    m.fallback = j.value("fallback", false);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("calibration JSON: ") + e.what());
  }
}

}  // namespace mspi
