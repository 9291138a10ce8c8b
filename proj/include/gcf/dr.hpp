#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "gcf/dataset.hpp"
#include "gcf/kernel.hpp"
#include "gcf/matrix.hpp"
#include "gcf/nuisance.hpp"
#include "gcf/parallel.hpp"

namespace gcf {

// Dose-response estimate mu~(t) on the grid points.
struct DrfCurve {
  std::vector<double> values;
};

// CATE estimate theta(t) = mu~(t) - mu~(t0) on the grid points. The entry at
// baseline_index is exactly zero.
struct CateCurve {
  std::vector<double> values;
  std::size_t baseline_index = 0;
  double baseline_value = 0.0;
};

// Boundary-normalized kernel weight K_h(t_i - t) / mass(t) / pi(t | x).
double dr_weight(double kernel_value, double mass, double gps);

// Which fitted value the outcome residual is taken against: the fit at the
// sample's own treatment T_i, or the fit at the evaluation point t.
enum class DrResidual { kObserved, kGrid };
// Raw inverse-density weights, or weights rescaled per grid point so they
// average one over the rows being estimated on.
enum class DrWeights { kNormalized, kRaw };

struct DrOptions {
  DrResidual residual = DrResidual::kObserved;
  DrWeights weights = DrWeights::kNormalized;
};

std::string_view dr_residual_name(DrResidual residual);
DrResidual parse_dr_residual(std::string_view name);
std::string_view dr_weights_name(DrWeights weights);
DrWeights parse_dr_weights(std::string_view name);

// Per-sample CDRF pseudo-value with raw weight w_i(t):
//   mu(t, x_i) + w_i(t) * (y_i - mu(T_i, x_i))   observed residual
//   mu(t, x_i) + w_i(t) * (y_i - mu(t, x_i))     grid residual
double cdrf_pseudo(double t, const Sample& sample, const NuisanceModel& nuisance,
                   const KernelSpec& spec, TreatmentRange range,
                   DrResidual residual = DrResidual::kObserved);

// Pseudo-values for every dataset row at every grid point (rows x G). This
// is computed once per training run; node curves are then masked column
// means over it. Normalized weights are scaled over all dataset rows.
Matrix pseudo_value_matrix(const Dataset& data, const TreatmentGrid& grid,
                           const NuisanceModel& nuisance, const KernelSpec& spec,
                           TreatmentRange range, DrOptions options = {},
                           Exec exec = Exec::kParallel);

// Node DRF evaluated directly on the node rows; normalized weights are scaled
// over the node.
DrfCurve node_drf(const Dataset& data, std::span<const std::size_t> node,
                  const TreatmentGrid& grid, const NuisanceModel& nuisance,
                  const KernelSpec& spec, TreatmentRange range, DrOptions options = {});
// Node DRF from a precomputed pseudo-value matrix.
DrfCurve node_drf(const Matrix& pseudo, std::span<const std::size_t> node);

CateCurve node_cate(const DrfCurve& drf, std::size_t baseline_index);

// Closed-form derivative of the Gaussian Nadaraya-Watson fit at t.
double pdrf_gaussian(std::span<const double> treatments,
                     std::span<const double> outcomes, double t,
                     const KernelSpec& spec);

// Forward difference (f(t + delta) - f(t)) / delta.
double pdrf_numeric(const std::function<double(double)>& curve, double t,
                    double delta, TreatmentRange range);

// Nadaraya-Watson regression of outcomes on treatments evaluated at t.
double nadaraya_watson(std::span<const double> treatments,
                       std::span<const double> outcomes, double t,
                       const KernelSpec& spec);

}  // namespace gcf
