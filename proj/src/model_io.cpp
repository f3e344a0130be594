#include <json.hpp>

#include "gm/errors.hpp"
#include "gm/learn.hpp"

namespace gm {

using nlohmann::json;

std::string model_to_json(const TrainedModel& model) {
  json j;
  j["kind"] = to_string(model.kind);
  j["seed"] = model.seed;
  j["standardized"] = model.standardized;
  j["standardizer"] = {{"mean", model.standardizer.mean},
                       {"stddev", model.standardizer.stddev}};
  j["coefficients"] = model.coefficients;
  j["intercept"] = model.intercept;
  j["decision_threshold"] = model.decision_threshold;
  j["iterations"] = model.iterations;
  j["gradient_max_norm"] = model.gradient_max_norm;
  j["objective_trace"] = model.objective_trace;
  json forest = json::array();
  for (const Tree& tree : model.forest) {
    json nodes = json::array();
    for (const TreeNode& node : tree.nodes) {
      nodes.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"prediction", node.prediction}});
    }
    forest.push_back(std::move(nodes));
  }
  j["forest"] = std::move(forest);
  return j.dump(2);
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("model JSON parse failure: ") + e.what());
  }
  try {
    TrainedModel model;
    model.kind = classifier_from_string(j.at("kind").get<std::string>());
    model.seed = j.at("seed").get<std::uint64_t>();
    model.standardized = j.at("standardized").get<bool>();
    model.standardizer.mean =
        j.at("standardizer").at("mean").get<std::vector<double>>();
    model.standardizer.stddev =
        j.at("standardizer").at("stddev").get<std::vector<double>>();
    model.coefficients = j.at("coefficients").get<std::vector<double>>();
    model.intercept = j.at("intercept").get<double>();
    model.decision_threshold = j.at("decision_threshold").get<double>();
    model.iterations = j.at("iterations").get<int>();
    model.gradient_max_norm = j.at("gradient_max_norm").get<double>();
    model.objective_trace =
        j.at("objective_trace").get<std::vector<double>>();
    for (const json& nodes : j.at("forest")) {
      Tree tree;
      for (const json& node : nodes) {
        TreeNode n;
        n.feature = node.at("feature").get<int>();
        n.threshold = node.at("threshold").get<double>();
        n.left = node.at("left").get<int>();
        n.right = node.at("right").get<int>();
        n.prediction = node.at("prediction").get<int>();
        tree.nodes.push_back(n);
      }
      model.forest.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model JSON missing or malformed field: ") +
                          e.what());
  }
}

}  // namespace gm
