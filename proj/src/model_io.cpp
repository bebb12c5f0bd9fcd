#include "dyscreen/model_io.hpp"

#include <fstream>
#include <sstream>

#include "dyscreen/error.hpp"

namespace dyscreen {

using nlohmann::json;

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, std::size_t i) {
  const auto& n = nodes[i];
  if (n.is_leaf()) return {{"leaf", n.value}};
  return {{"feature_index", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(nodes, static_cast<std::size_t>(n.left))},
          {"right", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

// preorder: parent, whole left subtree, whole right subtree (same order the builder emits)
std::int32_t node_from_json(const json& j, std::vector<TreeNode>& nodes, std::size_t feature_count) {
  const auto id = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  if (j.contains("leaf")) {
    nodes[static_cast<std::size_t>(id)].value = j.at("leaf").get<double>();
    return id;
  }
  const auto feature = j.at("feature_index").get<std::int64_t>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= feature_count)
    throw ModelFormatError("tree splits on feature " + std::to_string(feature) + ", variant has " +
                           std::to_string(feature_count));
  const double threshold = j.at("threshold").get<double>();
  const auto left = node_from_json(j.at("left"), nodes, feature_count);
  const auto right = node_from_json(j.at("right"), nodes, feature_count);
  auto& n = nodes[static_cast<std::size_t>(id)];
  n.feature = static_cast<std::int32_t>(feature);
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return id;
}

}  // namespace

json model_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t.nodes(), 0));
  json cfg = {{"n_trees", model.config.n_trees}, {"mtry", model.config.mtry}};
  cfg["max_depth"] = model.config.max_depth > 0 ? json(model.config.max_depth) : json(nullptr);
  cfg["min_node_weight"] = model.config.min_node_weight ? json(*model.config.min_node_weight) : json(nullptr);
  return {{"version", kModelFormatVersion},
          {"variant", model.variant.label()},
          {"threshold", model.threshold},
          {"seed", model.config.seed},
          {"train_config", std::move(cfg)},
          {"class_weights", {{"dys", model.weights.dys}, {"nodys", model.weights.nodys}}},
          {"trees", std::move(trees)}};
}

ForestModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("version")) throw ModelFormatError("model artifact has no version tag");
    const auto& version = doc.at("version");
    if (!version.is_number_integer() || version.get<std::int64_t>() != kModelFormatVersion)
      throw ModelFormatError("unsupported model artifact version " + version.dump() + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
    ForestModel m;
    m.variant = AgeVariant::parse(doc.at("variant").get<std::string>());
    m.threshold = doc.at("threshold").get<double>();
    if (!(m.threshold > 0.0 && m.threshold < 1.0)) throw ModelFormatError("threshold must lie strictly in (0, 1)");
    m.config.seed = doc.at("seed").get<std::uint64_t>();
    const auto& cfg = doc.at("train_config");
    m.config.n_trees = cfg.at("n_trees").get<int>();
    m.config.mtry = cfg.at("mtry").get<int>();
    m.config.max_depth = cfg.at("max_depth").is_null() ? 0 : cfg.at("max_depth").get<int>();
    if (!cfg.at("min_node_weight").is_null()) m.config.min_node_weight = cfg.at("min_node_weight").get<double>();
    m.weights.dys = doc.at("class_weights").at("dys").get<double>();
    m.weights.nodys = doc.at("class_weights").at("nodys").get<double>();
    for (const auto& t : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      node_from_json(t, nodes, m.variant.feature_count());
      m.trees.emplace_back(std::move(nodes));
    }
    if (m.trees.empty()) throw ModelFormatError("model artifact has no trees");
    if (m.trees.size() != static_cast<std::size_t>(m.config.n_trees))
      throw ModelFormatError("tree count does not match train_config.n_trees");
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model artifact: ") + e.what());
  } catch (const ModelFormatError&) {
    throw;
  } catch (const DataError& e) {
    throw ModelFormatError(e.what());
  }
}

std::string serialize_model(const ForestModel& model) { return model_to_json(model).dump(); }

ForestModel deserialize_model(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model payload is truncated or not JSON: ") + e.what());
  }
  return model_from_json(doc);
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

void save_model(const std::filesystem::path& path, const ForestModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  out << serialize_model(model);
}

}  // namespace dyscreen
