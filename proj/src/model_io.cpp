#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gcf/error.hpp"
#include "gcf/forest.hpp"

namespace gcf {
namespace {

using nlohmann::json;

std::string_view bandwidth_mode_name(BandwidthMode mode) {
  switch (mode) {
    case BandwidthMode::kFixed:
      return "fixed";
    case BandwidthMode::kRuleOfThumb:
      return "rot";
    case BandwidthMode::kCrossValidation:
      return "cv";
  }
  return "rot";
}

BandwidthMode parse_bandwidth_mode(const std::string& name) {
  if (name == "fixed") return BandwidthMode::kFixed;
  if (name == "rot") return BandwidthMode::kRuleOfThumb;
  if (name == "cv") return BandwidthMode::kCrossValidation;
  throw ModelFormatError("unknown bandwidth mode '" + name + "'");
}

json forest_params_to_json(const ForestParams& p) {
  return {{"num_trees", p.num_trees},
          {"min_node_size", p.min_node_size},
          {"mtry", p.mtry},
          {"bootstrap", p.bootstrap},
          {"seed", p.seed}};
}

ForestParams forest_params_from_json(const json& j) {
  ForestParams p;
  p.num_trees = j.at("num_trees").get<int>();
  p.min_node_size = j.at("min_node_size").get<int>();
  p.mtry = j.at("mtry").get<int>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

json params_to_json(const GcfParams& p) {
  json j;
  j["num_trees"] = p.num_trees;
  j["honesty_fraction"] = p.honesty_fraction;
  j["subsample_fraction"] = p.subsample_fraction;
  j["grid_size"] = p.grid_size;
  j["baseline"] = p.baseline ? json(*p.baseline) : json(nullptr);
  j["seed"] = p.seed;
  j["split"] = {{"metric", std::string(metric_name(p.split.metric))},
                {"zeta", p.split.zeta},
                {"min_node_size", p.split.min_node_size},
                {"min_info_gain", p.split.min_info_gain},
                {"mtry", p.split.mtry},
                {"threshold_cap", p.split.threshold_cap},
                {"large_node", p.split.large_node}};
  j["kernel_policy"] = {{"family", std::string(kernel_family_name(p.kernel.family))},
                        {"mode", std::string(bandwidth_mode_name(p.kernel.mode))},
                        {"bandwidth", p.kernel.bandwidth}};
  j["nuisance"] = forest_params_to_json(p.nuisance.forest);
  j["nuisance"]["density_floor"] = p.nuisance.density_floor;
  j["dr"] = {{"residual", std::string(dr_residual_name(p.dr.residual))},
             {"weights", std::string(dr_weights_name(p.dr.weights))}};
  return j;
}

GcfParams params_from_json(const json& j) {
  GcfParams p;
  p.num_trees = j.at("num_trees").get<int>();
  p.honesty_fraction = j.at("honesty_fraction").get<double>();
  p.subsample_fraction = j.at("subsample_fraction").get<double>();
  p.grid_size = j.at("grid_size").get<std::size_t>();
  if (!j.at("baseline").is_null()) p.baseline = j.at("baseline").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  const json& s = j.at("split");
  p.split.metric = parse_metric(s.at("metric").get<std::string>());
  p.split.zeta = s.at("zeta").get<double>();
  p.split.min_node_size = s.at("min_node_size").get<int>();
  p.split.min_info_gain = s.at("min_info_gain").get<double>();
  p.split.mtry = s.at("mtry").get<int>();
  p.split.threshold_cap = s.at("threshold_cap").get<int>();
  p.split.large_node = s.at("large_node").get<std::size_t>();
  const json& k = j.at("kernel_policy");
  p.kernel.family = parse_kernel_family(k.at("family").get<std::string>());
  p.kernel.mode = parse_bandwidth_mode(k.at("mode").get<std::string>());
  p.kernel.bandwidth = k.at("bandwidth").get<double>();
  p.nuisance.forest = forest_params_from_json(j.at("nuisance"));
  p.nuisance.density_floor = j.at("nuisance").at("density_floor").get<double>();
  p.dr.residual = parse_dr_residual(j.at("dr").at("residual").get<std::string>());
  p.dr.weights = parse_dr_weights(j.at("dr").at("weights").get<std::string>());
  return p;
}

json forest_to_json(const RegressionForest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees()) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.count});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"params", forest_params_to_json(forest.params())},
          {"num_features", forest.num_features()},
          {"trees", std::move(trees)}};
}

void check_children(int left, int right, std::size_t count) {
  if (left < 0 || right < 0 || static_cast<std::size_t>(left) >= count ||
      static_cast<std::size_t>(right) >= count) {
    throw ModelFormatError("tree node references a missing child");
  }
}

RegressionForest forest_from_json(const json& j) {
  const auto p = j.at("num_features").get<std::size_t>();
  std::vector<RegressionTree> trees;
  for (const json& jt : j.at("trees")) {
    std::vector<RegressionTree::Node> nodes;
    for (const json& jn : jt) {
      RegressionTree::Node n;
      n.feature = jn.at(0).get<int>();
      n.threshold = jn.at(1).get<double>();
      n.left = jn.at(2).get<int>();
      n.right = jn.at(3).get<int>();
      n.value = jn.at(4).get<double>();
      n.count = jn.at(5).get<int>();
      nodes.push_back(n);
    }
    if (nodes.empty()) throw ModelFormatError("empty regression tree");
    for (const auto& n : nodes) {
      if (n.feature >= 0) {
        if (static_cast<std::size_t>(n.feature) >= p) {
          throw ModelFormatError("regression tree splits on a missing feature");
        }
        check_children(n.left, n.right, nodes.size());
      }
    }
    trees.emplace_back(std::move(nodes));
  }
  if (trees.empty()) throw ModelFormatError("regression forest has no trees");
  return RegressionForest(forest_params_from_json(j.at("params")), p, std::move(trees));
}

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"members", n.members}, {"curve", n.curve}});
    } else {
      nodes.push_back({n.feature, n.threshold, n.left, n.right});
    }
  }
  return {{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j, std::size_t p, std::size_t g_count) {
  std::vector<TreeNode> nodes;
  for (const json& jn : j.at("nodes")) {
    TreeNode n;
    if (jn.is_object()) {
      n.members = jn.at("members").get<std::vector<std::size_t>>();
      n.curve = jn.at("curve").get<std::vector<double>>();
      if (n.curve.size() != g_count) {
        throw ModelFormatError("leaf curve length does not match the grid");
      }
    } else {
      n.feature = jn.at(0).get<int>();
      n.threshold = jn.at(1).get<double>();
      n.left = jn.at(2).get<int>();
      n.right = jn.at(3).get<int>();
      if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= p) {
        throw ModelFormatError("tree splits on a missing covariate");
      }
    }
    nodes.push_back(std::move(n));
  }
  if (nodes.empty()) throw ModelFormatError("empty tree");
  for (const auto& n : nodes) {
    if (!n.is_leaf()) check_children(n.left, n.right, nodes.size());
  }
  return Tree(std::move(nodes));
}

}  // namespace

std::string model_to_json(const GcfModel& model) {
  json j;
  j["format"] = "gcf-model";
  j["version"] = GcfModel::kFormatVersion;
  j["params"] = params_to_json(model.params());
  j["grid"] = {{"points", model.grid().points},
               {"baseline_index", model.grid().baseline_index}};
  j["kernel"] = {{"family", std::string(kernel_family_name(model.kernel().family()))},
                 {"bandwidth", model.kernel().bandwidth()}};
  j["t_range"] = {model.t_range().lo, model.t_range().hi};
  j["covariates"] = model.covariate_names();
  j["baseline_level"] = model.baseline_level();
  if (model.nuisances()) {
    const auto& nz = *model.nuisances();
    j["nuisances"] = {
        {"outcome", forest_to_json(nz.outcome_model().forest())},
        {"gps",
         {{"mean_forest", forest_to_json(nz.gps_model().mean_forest())},
          {"residual_sd", nz.gps_model().residual_sd()},
          {"density_floor", nz.gps_model().density_floor()}}}};
  } else {
    j["nuisances"] = nullptr;
  }
  json trees = json::array();
  for (const auto& tree : model.trees()) trees.push_back(tree_to_json(tree));
  j["trees"] = std::move(trees);
  return j.dump();
}

GcfModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "gcf-model") {
      throw ModelFormatError("not a gcf model file");
    }
    const auto version = j.at("version").get<std::string>();
    if (version != GcfModel::kFormatVersion) {
      throw VersionError("unsupported model format version '" + version +
                         "' (expected '" + GcfModel::kFormatVersion + "')");
    }
    GcfParams params = params_from_json(j.at("params"));
    TreatmentGrid grid;
    grid.points = j.at("grid").at("points").get<std::vector<double>>();
    grid.baseline_index = j.at("grid").at("baseline_index").get<std::size_t>();
    if (grid.points.size() < 2 || grid.baseline_index >= grid.points.size()) {
      throw ModelFormatError("invalid treatment grid");
    }
    const KernelSpec kernel(
        parse_kernel_family(j.at("kernel").at("family").get<std::string>()),
        j.at("kernel").at("bandwidth").get<double>());
    const TreatmentRange range{j.at("t_range").at(0).get<double>(),
                               j.at("t_range").at(1).get<double>()};
    auto names = j.at("covariates").get<std::vector<std::string>>();
    const double level = j.at("baseline_level").get<double>();

    std::optional<NuisancePair> nuisances;
    if (!j.at("nuisances").is_null()) {
      const json& nz = j.at("nuisances");
      const json& gps = nz.at("gps");
      nuisances.emplace(OutcomeModel(forest_from_json(nz.at("outcome"))),
                        GpsModel(forest_from_json(gps.at("mean_forest")),
                                 gps.at("residual_sd").get<double>(),
                                 gps.at("density_floor").get<double>()));
    }
    std::vector<Tree> trees;
    for (const json& jt : j.at("trees")) {
      trees.push_back(tree_from_json(jt, names.size(), grid.points.size()));
    }
    if (trees.empty()) throw ModelFormatError("model has no trees");
    return GcfModel(std::move(params), std::move(grid), kernel, range, std::move(names),
                    std::move(trees), std::move(nuisances), level);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const GcfModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model to '" + path.string() + "'");
  out << model_to_json(model) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

GcfModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace gcf
