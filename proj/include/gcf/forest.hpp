#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcf/dataset.hpp"
#include "gcf/dr.hpp"
#include "gcf/kernel.hpp"
#include "gcf/matrix.hpp"
#include "gcf/nuisance.hpp"
#include "gcf/parallel.hpp"
#include "gcf/split.hpp"

namespace gcf {

enum class BandwidthMode { kFixed, kRuleOfThumb, kCrossValidation };

struct KernelPolicy {
  KernelFamily family = KernelFamily::kGaussian;
  BandwidthMode mode = BandwidthMode::kRuleOfThumb;
  double bandwidth = 0.0;  // used when mode == kFixed
};

struct GcfParams {
  int num_trees = 500;
  double honesty_fraction = 0.5;
  double subsample_fraction = 0.5;
  SplitConfig split;
  KernelPolicy kernel;
  std::size_t grid_size = 10;
  std::optional<double> baseline;  // default: observed t_min
  NuisanceParams nuisance;
  DrOptions dr;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // < 0 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::size_t> members;  // estimation-half rows (leaves only)
  std::vector<double> curve;         // leaf CATE on the grid (leaves only)

  bool is_leaf() const { return feature < 0; }
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const TreeNode& leaf_for(std::span<const double> x) const;
  std::size_t leaf_index(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }
  int depth() const;
  std::size_t num_leaves() const;

 private:
  std::vector<TreeNode> nodes_;
};

class GcfModel {
 public:
  static constexpr const char* kFormatVersion = "1";

  GcfModel() = default;
  GcfModel(GcfParams params, TreatmentGrid grid, KernelSpec kernel,
           TreatmentRange range, std::vector<std::string> covariate_names,
           std::vector<Tree> trees, std::optional<NuisancePair> nuisances,
           double baseline_level);

  const GcfParams& params() const { return params_; }
  const TreatmentGrid& grid() const { return grid_; }
  const KernelSpec& kernel() const { return kernel_; }
  void set_kernel(const KernelSpec& kernel) { kernel_ = kernel; }
  TreatmentRange t_range() const { return range_; }
  const std::vector<std::string>& covariate_names() const { return names_; }
  std::size_t num_covariates() const { return names_.size(); }
  const std::vector<Tree>& trees() const { return trees_; }
  std::vector<Tree>& mutable_trees() { return trees_; }
  const std::optional<NuisancePair>& nuisances() const { return nuisances_; }
  // Estimation-half mean of the pseudo-outcome at the baseline treatment; adds
  // back the outcome level that CATE curves difference out.
  double baseline_level() const { return baseline_level_; }

 private:
  GcfParams params_;
  TreatmentGrid grid_;
  KernelSpec kernel_;
  TreatmentRange range_;
  std::vector<std::string> names_;
  std::vector<Tree> trees_;
  std::optional<NuisancePair> nuisances_;
  double baseline_level_ = 0.0;
};

// Resolves the kernel bandwidth policy against the structure-half treatments
// (and outcomes, for cross-validation).
KernelSpec resolve_kernel(const KernelPolicy& policy, const RowView& omega1);

// Full training: honest split, nuisance fit on the structure half, then
// honest tree growth.
GcfModel train(const Dataset& data, const GcfParams& params,
               Exec exec = Exec::kParallel);

// Training with a caller-supplied split, nuisances and kernel. The returned
// model carries no nuisances and therefore cannot recompute leaf curves.
GcfModel train(const Dataset& data, const HonestSplit& split,
               const NuisanceModel& nuisance, const KernelSpec& kernel,
               const GcfParams& params, Exec exec = Exec::kParallel);

// Grows params.num_trees honest trees over a precomputed pseudo-value cache.
std::vector<Tree> grow_trees(const Dataset& data, const HonestSplit& split,
                             const Matrix& pseudo,
                             std::span<const double> treatment_variance,
                             const TreatmentGrid& grid, const GcfParams& params,
                             Exec exec = Exec::kParallel);

CateCurve predict_curve(const GcfModel& model, std::span<const double> x);
// Linear interpolation of predict_curve; exact at grid points.
double predict_cate(const GcfModel& model, std::span<const double> x, double t);
double interpolate_curve(const TreatmentGrid& grid, std::span<const double> values,
                         double t);
std::vector<CateCurve> predict_curves(const GcfModel& model, MatrixView x,
                                      Exec exec = Exec::kParallel);

// Recomputes every leaf curve from its stored estimation-half members under a
// different kernel, without regrowing structure. Needs the training data and a
// model that carries its nuisances.
void recompute_leaf_curves(GcfModel& model, const Dataset& training_data,
                           const KernelSpec& kernel, Exec exec = Exec::kParallel);

std::string model_to_json(const GcfModel& model);
GcfModel model_from_json(const std::string& text);
void save_model(const GcfModel& model, const std::filesystem::path& path);
GcfModel load_model(const std::filesystem::path& path);

}  // namespace gcf
