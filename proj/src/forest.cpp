#include "gcf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "gcf/error.hpp"

namespace gcf {
namespace {

// Draws round(fraction * |pool|) rows without replacement, sorted.
std::vector<std::size_t> subsample(std::span<const std::size_t> pool,
                                   double fraction, std::mt19937_64& rng) {
  std::vector<std::size_t> rows(pool.begin(), pool.end());
  if (fraction >= 1.0 || rows.empty()) return rows;
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
  k = std::clamp<std::size_t>(k, 1, rows.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(k);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<std::size_t> draw_features(std::size_t p, int mtry, std::mt19937_64& rng) {
  std::vector<std::size_t> feats(p);
  std::iota(feats.begin(), feats.end(), std::size_t{0});
  const auto take = static_cast<std::size_t>(resolve_split_mtry(mtry, p));
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, p - 1);
    std::swap(feats[i], feats[pick(rng)]);
  }
  feats.resize(take);
  std::sort(feats.begin(), feats.end());
  return feats;
}

Tree grow_tree(const Dataset& data, const HonestSplit& split, const SplitContext& ctx,
               const GcfParams& params, std::size_t tree_index) {
  std::mt19937_64 rng(derive_seed(params.seed, tree_index));
  const auto features = draw_features(data.num_covariates(), params.split.mtry, rng);
  auto rows1 = subsample(split.omega1, params.subsample_fraction, rng);
  auto rows2 = subsample(split.omega2, params.subsample_fraction, rng);
  if (rows2.empty()) {
    throw TrainingError("estimation half is empty; cannot estimate leaf curves");
  }

  struct Pending {
    int node;
    std::vector<std::size_t> structure;
    std::vector<std::size_t> estimation;
  };
  std::vector<TreeNode> nodes(1);
  std::vector<Pending> stack;
  stack.push_back({0, std::move(rows1), std::move(rows2)});
  const auto min_size = static_cast<std::size_t>(params.split.min_node_size);

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    auto best = best_split(ctx, cur.structure, features, params.split, cur.estimation,
                           min_size, Exec::kSerial);
    if (!best) {
      auto& leaf = nodes[static_cast<std::size_t>(cur.node)];
      leaf.curve =
          node_cate(node_drf(*ctx.pseudo, cur.estimation), ctx.grid->baseline_index)
              .values;
      leaf.members = std::move(cur.estimation);
      continue;
    }
    std::vector<std::size_t> est_left;
    std::vector<std::size_t> est_right;
    for (std::size_t r : cur.estimation) {
      (data.x(r, best->feature) <= best->threshold ? est_left : est_right).push_back(r);
    }
    const int left = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    auto& node = nodes[static_cast<std::size_t>(cur.node)];
    node.feature = static_cast<int>(best->feature);
    node.threshold = best->threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, std::move(best->right), std::move(est_right)});
    stack.push_back({left, std::move(best->left), std::move(est_left)});
  }
  return Tree(std::move(nodes));
}

}  // namespace

void GcfParams::validate() const {
  if (num_trees < 1) throw ConfigError("num_trees must be >= 1");
  if (!(honesty_fraction > 0.0 && honesty_fraction < 1.0)) {
    throw ConfigError("honesty_fraction must lie in (0, 1)");
  }
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw ConfigError("subsample_fraction must lie in (0, 1]");
  }
  if (grid_size < 2) throw ConfigError("grid_size must be >= 2");
  if (kernel.mode == BandwidthMode::kFixed && !(kernel.bandwidth > 0.0)) {
    throw ConfigError("fixed bandwidth must be > 0");
  }
  if (!(nuisance.density_floor > 0.0)) throw ConfigError("density_floor must be > 0");
  split.validate();
}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  return nodes_[leaf_index(x)];
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& node = nodes_[id];
    id = static_cast<std::size_t>(
        x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                    : node.right);
  }
  return id;
}

int Tree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
    best = std::max(best, depth[i]);
  }
  return best;
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

GcfModel::GcfModel(GcfParams params, TreatmentGrid grid, KernelSpec kernel,
                   TreatmentRange range, std::vector<std::string> covariate_names,
                   std::vector<Tree> trees, std::optional<NuisancePair> nuisances,
                   double baseline_level)
    : params_(std::move(params)),
      grid_(std::move(grid)),
      kernel_(kernel),
      range_(range),
      names_(std::move(covariate_names)),
      trees_(std::move(trees)),
      nuisances_(std::move(nuisances)),
      baseline_level_(baseline_level) {}

KernelSpec resolve_kernel(const KernelPolicy& policy, const RowView& omega1) {
  if (policy.mode == BandwidthMode::kFixed) {
    return KernelSpec(policy.family, policy.bandwidth);
  }
  std::vector<double> t(omega1.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = omega1.t(i);
  const double rot = bandwidth_rot(t);
  if (policy.mode == BandwidthMode::kRuleOfThumb) return KernelSpec(policy.family, rot);
  std::vector<double> y(omega1.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = omega1.y(i);
  const std::vector<double> candidates{0.25 * rot, 0.5 * rot, rot, 2.0 * rot, 4.0 * rot};
  return KernelSpec(policy.family, bandwidth_cv(t, y, candidates, policy.family));
}

std::vector<Tree> grow_trees(const Dataset& data, const HonestSplit& split,
                             const Matrix& pseudo,
                             std::span<const double> treatment_variance,
                             const TreatmentGrid& grid, const GcfParams& params,
                             Exec exec) {
  params.validate();
  SplitContext ctx{&data, &pseudo, &grid, treatment_variance};
  const auto count = static_cast<std::size_t>(params.num_trees);
  std::vector<Tree> trees(count);
  const auto nt = static_cast<std::ptrdiff_t>(count);
  if (exec == Exec::kParallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < nt; ++b) {
      try {
        trees[static_cast<std::size_t>(b)] =
            grow_tree(data, split, ctx, params, static_cast<std::size_t>(b));
      } catch (...) {
#pragma omp critical(gcf_grow_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t b = 0; b < nt; ++b) {
      trees[static_cast<std::size_t>(b)] =
          grow_tree(data, split, ctx, params, static_cast<std::size_t>(b));
    }
  }
  return trees;
}

namespace {

std::vector<double> treatment_variances(const Dataset& data,
                                        const NuisanceModel& nuisance,
                                        const GcfParams& params) {
  std::vector<double> out;
  if (params.split.zeta == 0.0) return out;
  out.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = nuisance.treatment_variance(data.x(i));
  }
  return out;
}

double estimation_baseline(const Matrix& pseudo, const HonestSplit& split,
                           std::size_t baseline_index) {
  double sum = 0.0;
  for (std::size_t r : split.omega2) sum += pseudo(r, baseline_index);
  return sum / static_cast<double>(split.omega2.size());
}

GcfModel assemble(const Dataset& data, const HonestSplit& split,
                  const NuisanceModel& nuisance, const KernelSpec& kernel,
                  const GcfParams& params, std::optional<NuisancePair> stored,
                  Exec exec) {
  const double baseline = params.baseline.value_or(data.t_min());
  TreatmentGrid grid = treatment_grid(data, params.grid_size, baseline);
  const TreatmentRange range = data.t_range();
  const Matrix pseudo = pseudo_value_matrix(data, grid, nuisance, kernel, range, params.dr, exec);
  const auto tvar = treatment_variances(data, nuisance, params);
  auto trees = grow_trees(data, split, pseudo, tvar, grid, params, exec);
  const double level = estimation_baseline(pseudo, split, grid.baseline_index);
  return GcfModel(params, std::move(grid), kernel, range, data.covariate_names(),
                  std::move(trees), std::move(stored), level);
}

}  // namespace

GcfModel train(const Dataset& data, const HonestSplit& split,
               const NuisanceModel& nuisance, const KernelSpec& kernel,
               const GcfParams& params, Exec exec) {
  params.validate();
  if (!(data.t_max() > data.t_min())) {
    throw TrainingError("weak positivity violated: treatment has zero spread");
  }
  return assemble(data, split, nuisance, kernel, params, std::nullopt, exec);
}

GcfModel train(const Dataset& data, const GcfParams& params, Exec exec) {
  params.validate();
  if (!(data.t_max() > data.t_min())) {
    throw TrainingError("weak positivity violated: treatment has zero spread");
  }
  const HonestSplit split = honest_split(data, params.honesty_fraction, params.seed);
  const RowView omega1(data, split.omega1);
  NuisanceParams nuisance_params = params.nuisance;
  nuisance_params.forest.seed = derive_seed(params.seed, 0x6e75);
  NuisancePair nuisances = fit_nuisances(omega1, nuisance_params, exec);
  const KernelSpec kernel = resolve_kernel(params.kernel, omega1);
  return assemble(data, split, nuisances, kernel, params, nuisances, exec);
}

double interpolate_curve(const TreatmentGrid& grid, std::span<const double> values,
                         double t) {
  if (t < grid.front() || t > grid.back()) {
    throw RangeError("treatment " + std::to_string(t) + " outside the model range [" +
                     std::to_string(grid.front()) + ", " +
                     std::to_string(grid.back()) + "]");
  }
  const auto& pts = grid.points;
  const auto it = std::upper_bound(pts.begin(), pts.end(), t);
  if (it == pts.end()) return values.back();
  const auto hi = static_cast<std::size_t>(it - pts.begin());
  const std::size_t lo = hi - 1;
  if (t == pts[lo]) return values[lo];
  const double frac = (t - pts[lo]) / (pts[hi] - pts[lo]);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CateCurve predict_curve(const GcfModel& model, std::span<const double> x) {
  if (x.size() != model.num_covariates()) {
    throw InvalidArgumentError("expected " + std::to_string(model.num_covariates()) +
                               " covariates, got " + std::to_string(x.size()));
  }
  const std::size_t g_count = model.grid().size();
  CateCurve curve;
  curve.baseline_index = model.grid().baseline_index;
  curve.values.assign(g_count, 0.0);
  for (const auto& tree : model.trees()) {
    const auto& leaf = tree.leaf_for(x);
    for (std::size_t g = 0; g < g_count; ++g) curve.values[g] += leaf.curve[g];
  }
  const auto b = static_cast<double>(model.trees().size());
  for (double& v : curve.values) v /= b;
  curve.values[curve.baseline_index] = 0.0;
  return curve;
}

double predict_cate(const GcfModel& model, std::span<const double> x, double t) {
  const CateCurve curve = predict_curve(model, x);
  return interpolate_curve(model.grid(), curve.values, t);
}

std::vector<CateCurve> predict_curves(const GcfModel& model, MatrixView x, Exec exec) {
  std::vector<CateCurve> out(x.rows);
  const auto rows = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    out[static_cast<std::size_t>(i)] = predict_curve(model, x.row(static_cast<std::size_t>(i)));
  }
  return out;
}

void recompute_leaf_curves(GcfModel& model, const Dataset& training_data,
                           const KernelSpec& kernel, Exec exec) {
  if (!model.nuisances()) {
    throw InvalidArgumentError("model carries no nuisances; cannot recompute leaves");
  }
  const Matrix pseudo = pseudo_value_matrix(training_data, model.grid(),
                                            *model.nuisances(), kernel,
                                            model.t_range(), model.params().dr, exec);
  for (auto& tree : model.mutable_trees()) {
    for (auto& node : tree.mutable_nodes()) {
      if (!node.is_leaf()) continue;
      for (std::size_t r : node.members) {
        if (r >= training_data.size()) {
          throw InvalidArgumentError("leaf member outside the training data");
        }
      }
      node.curve =
          node_cate(node_drf(pseudo, node.members), model.grid().baseline_index).values;
    }
  }
  model.set_kernel(kernel);
}

}  // namespace gcf
