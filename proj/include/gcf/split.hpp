#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gcf/dataset.hpp"
#include "gcf/dr.hpp"
#include "gcf/matrix.hpp"
#include "gcf/parallel.hpp"

namespace gcf {

enum class Metric { kD1, kD2, kDInf };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

struct SplitConfig {
  Metric metric = Metric::kD2;
  double zeta = 0.0;
  int min_node_size = 50;
  double min_info_gain = 0.0;
  int mtry = 0;  // 0: ceil(sqrt(p))
  int threshold_cap = 32;
  std::size_t large_node = 256;

  void validate() const;
};

int resolve_split_mtry(int mtry, std::size_t num_features);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

// Trapezoidal L1 / squared-L2 integral over the grid, or the max over grid
// points, of |a - b|.
double curve_distance(std::span<const double> a, std::span<const double> b,
                      Metric metric, std::span<const double> grid_points);
double curve_distance(const CateCurve& a, const CateCurve& b, Metric metric,
                      const TreatmentGrid& grid);

// (n1 n2 / nP) * D(left, right) + zeta * sigma_pi.
double criterion(const CateCurve& left, const CateCurve& right, std::size_t n1,
                 std::size_t n2, std::size_t n_parent, double sigma_pi,
                 const SplitConfig& cfg, const TreatmentGrid& grid);

// Read-only inputs shared by every split search of one training run.
struct SplitContext {
  const Dataset* data = nullptr;
  const Matrix* pseudo = nullptr;             // rows x grid pseudo-values
  const TreatmentGrid* grid = nullptr;
  std::span<const double> treatment_variance;  // per row, may be empty if zeta == 0
};

// Candidate split thresholds for a sorted column: midpoints between
// consecutive distinct values, thinned to `cap` evenly spaced ones when the
// node holds more than `large_node` rows.
std::vector<double> candidate_thresholds(std::span<const double> sorted_values,
                                         const SplitConfig& cfg);

// Maximum-gain split of `node` over `features`. Children must hold at least
// min_node_size rows of `node` and, when `companion` is non-empty, at least
// `min_companion` rows of it too. Ties prefer the lower feature index, then
// the lower threshold. Returns nullopt when no candidate qualifies.
std::optional<Split> best_split(const SplitContext& ctx,
                                std::span<const std::size_t> node,
                                std::span<const std::size_t> features,
                                const SplitConfig& cfg,
                                std::span<const std::size_t> companion = {},
                                std::size_t min_companion = 0,
                                Exec exec = Exec::kParallel);

// Convenience form that builds the pseudo-value cache from the nuisances.
std::optional<Split> best_split(const Dataset& data,
                                std::span<const std::size_t> node,
                                std::span<const std::size_t> features,
                                const TreatmentGrid& grid,
                                const NuisanceModel& nuisance,
                                const KernelSpec& spec, TreatmentRange range,
                                const SplitConfig& cfg, DrOptions options = {});

}  // namespace gcf
