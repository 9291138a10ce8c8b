#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gcf/csv.hpp"
#include "gcf/error.hpp"

namespace gcf::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "1", "base random seed"},
      {"threads", "0", "worker threads (0 = all cores)"},
      {"out_dir", ".", "directory for every output file"},
      // inputs
      {"data", "data.csv", "input dataset CSV (train, predict); evaluate reads outcomes from it for Qini, empty skips Qini"},
      {"truth", "truth.csv", "truth CSV for evaluate"},
      {"predictions", "predictions.csv", "predictions CSV for evaluate"},
      {"model", "model.json", "model file read by predict"},
      {"outcome", "y", "outcome column name"},
      {"treatment", "t", "treatment column name"},
      {"covariates", "", "comma-separated covariate columns; empty = all remaining"},
      // simulation
      {"n", "1000", "rows to simulate"},
      {"p_x", "50", "shared covariates"},
      {"p_u", "5", "outcome-only covariates"},
      {"p_z", "5", "treatment-only covariates"},
      {"kind", "poly", "dose-response kind: poly | sinus | exp"},
      {"noise", "uniform", "noise law: uniform | gaussian"},
      {"sparsity", "0.5", "probability a coefficient is zeroed"},
      {"randomized_test_treatments", "false", "redraw T uniformly on its range"},
      // forest
      {"num_trees", "500", "GCF trees"},
      {"honesty_fraction", "0.5", "share of rows used for structure"},
      {"subsample_fraction", "0.5", "per-tree subsample share of each half"},
      {"grid_size", "10", "treatment grid points"},
      {"baseline", "", "baseline treatment; empty = observed minimum"},
      {"metric", "d2", "curve distance: d1 | d2 | dinf"},
      {"zeta", "0", "treatment-variance regulariser weight"},
      {"min_node_size", "50", "minimum rows per child"},
      {"min_info_gain", "0", "minimum split gain"},
      {"mtry", "0", "features per tree (0 = ceil(sqrt(p)))"},
      {"threshold_cap", "32", "threshold candidates in large nodes"},
      {"kernel", "gaussian", "gaussian | uniform | epanechnikov | biweight | triweight"},
      {"bandwidth_mode", "rot", "rot | cv | fixed"},
      {"bandwidth", "0", "bandwidth when bandwidth_mode = fixed"},
      {"nuisance_trees", "100", "trees per nuisance forest"},
      {"nuisance_min_node_size", "5", "nuisance forest leaf size"},
      {"nuisance_mtry", "-1", "nuisance forest mtry (0 = max(1, p/3), -1 = all features)"},
      {"density_floor", "0.001", "lower bound on the propensity density"},
      {"dr_residual", "observed", "DR residual against the fit at: observed (T_i) | grid (t)"},
      {"dr_weights", "normalized", "DR weights: normalized | raw"},
      // benchmark
      {"reps", "20", "benchmark repetitions"},
      {"methods", "gcf,rf,global_dr,oracle", "benchmark methods"},
      {"n_test", "0", "test rows per rep (0 = n)"},
      {"rf_trees", "100", "trees in the RF baseline"},
      {"rf_min_node_size", "50", "RF baseline leaf size"},
      {"global_dr_grid", "50", "grid points for the global DR curve"},
      {"adrf_points", "10", "ADRF evaluation points"},
      {"adrf_lo", "1", "first ADRF point"},
      {"adrf_hi", "20", "last ADRF point"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& key : config_keys()) values_[key.name] = key.default_value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  parse(buffer.str(), path.string());
}

void RunConfig::parse(std::string_view text, const std::string& source_name) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    const std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source_name + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    try {
      set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    } catch (const ConfigError& e) {
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(std::string(trim(assignment.substr(0, eq))),
      std::string(trim(assignment.substr(eq + 1))));
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  return parse_number<double>(key, get(key));
}

long long RunConfig::get_int(const std::string& key) const {
  return parse_number<long long>(key, get(key));
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const long long v = get_int(key);
  if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

DgpConfig RunConfig::dgp() const {
  DgpConfig cfg;
  cfg.n = get_size("n");
  cfg.p_x = get_size("p_x");
  cfg.p_u = get_size("p_u");
  cfg.p_z = get_size("p_z");
  cfg.kind = parse_drf_kind(get("kind"));
  cfg.noise = parse_noise_kind(get("noise"));
  cfg.sparsity = get_double("sparsity");
  cfg.seed = get_u64("seed");
  cfg.randomized_test_treatments = get_bool("randomized_test_treatments");
  cfg.validate();
  return cfg;
}

GcfParams RunConfig::gcf() const {
  GcfParams p;
  p.num_trees = static_cast<int>(get_int("num_trees"));
  p.honesty_fraction = get_double("honesty_fraction");
  p.subsample_fraction = get_double("subsample_fraction");
  p.grid_size = get_size("grid_size");
  if (!get("baseline").empty()) p.baseline = get_double("baseline");
  p.split.metric = parse_metric(get("metric"));
  p.split.zeta = get_double("zeta");
  p.split.min_node_size = static_cast<int>(get_int("min_node_size"));
  p.split.min_info_gain = get_double("min_info_gain");
  p.split.mtry = static_cast<int>(get_int("mtry"));
  p.split.threshold_cap = static_cast<int>(get_int("threshold_cap"));
  p.kernel.family = parse_kernel_family(get("kernel"));
  const std::string& mode = get("bandwidth_mode");
  if (mode == "rot") {
    p.kernel.mode = BandwidthMode::kRuleOfThumb;
  } else if (mode == "cv") {
    p.kernel.mode = BandwidthMode::kCrossValidation;
  } else if (mode == "fixed") {
    p.kernel.mode = BandwidthMode::kFixed;
  } else {
    throw ConfigError("unknown bandwidth_mode '" + mode + "' (valid: rot, cv, fixed)");
  }
  p.kernel.bandwidth = get_double("bandwidth");
  p.nuisance.forest.num_trees = static_cast<int>(get_int("nuisance_trees"));
  p.nuisance.forest.min_node_size = static_cast<int>(get_int("nuisance_min_node_size"));
  p.nuisance.forest.mtry = static_cast<int>(get_int("nuisance_mtry"));
  p.nuisance.density_floor = get_double("density_floor");
  p.dr.residual = parse_dr_residual(get("dr_residual"));
  p.dr.weights = parse_dr_weights(get("dr_weights"));
  p.seed = get_u64("seed");
  p.validate();
  return p;
}

Schema RunConfig::schema() const {
  Schema s;
  s.outcome = get("outcome");
  s.treatment = get("treatment");
  s.covariates = split_list(get("covariates"));
  return s;
}

BenchmarkConfig RunConfig::benchmark() const {
  BenchmarkConfig cfg;
  cfg.dgp = dgp();
  cfg.gcf = gcf();
  cfg.reps = get_size("reps");
  cfg.methods.clear();
  for (const auto& name : split_list(get("methods"))) cfg.methods.push_back(parse_method(name));
  cfg.n_test = get_size("n_test");
  cfg.rf.num_trees = static_cast<int>(get_int("rf_trees"));
  cfg.rf.min_node_size = static_cast<int>(get_int("rf_min_node_size"));
  cfg.global_dr_grid = get_size("global_dr_grid");
  cfg.adrf_points = get_size("adrf_points");
  cfg.adrf_lo = get_double("adrf_lo");
  cfg.adrf_hi = get_double("adrf_hi");
  cfg.validate();
  return cfg;
}

}  // namespace gcf::cli
