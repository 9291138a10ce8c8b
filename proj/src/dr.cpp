#include "gcf/dr.hpp"

#include <cmath>
#include <string>

#include "gcf/error.hpp"

namespace gcf {

double dr_weight(double kernel_value, double mass, double gps) {
  if (kernel_value == 0.0) return 0.0;
  return kernel_value / mass / gps;
}

std::string_view dr_residual_name(DrResidual residual) {
  return residual == DrResidual::kObserved ? "observed" : "grid";
}

DrResidual parse_dr_residual(std::string_view name) {
  if (name == "observed") return DrResidual::kObserved;
  if (name == "grid") return DrResidual::kGrid;
  throw ConfigError("unknown DR residual '" + std::string(name) + "' (valid: observed, grid)");
}

std::string_view dr_weights_name(DrWeights weights) {
  return weights == DrWeights::kNormalized ? "normalized" : "raw";
}

DrWeights parse_dr_weights(std::string_view name) {
  if (name == "normalized") return DrWeights::kNormalized;
  if (name == "raw") return DrWeights::kRaw;
  throw ConfigError("unknown DR weights '" + std::string(name) + "' (valid: normalized, raw)");
}

double cdrf_pseudo(double t, const Sample& sample, const NuisanceModel& nuisance,
                   const KernelSpec& spec, TreatmentRange range, DrResidual residual) {
  const double mu = nuisance.outcome(t, sample.x);
  const double k = spec.eval(sample.t - t);
  const double w =
      dr_weight(k, spec.boundary_mass(t, range.lo, range.hi), nuisance.gps(t, sample.x));
  const double fitted =
      residual == DrResidual::kObserved ? nuisance.outcome(sample.t, sample.x) : mu;
  return mu + w * (sample.y - fitted);
}

namespace {

// Plug-in values, weights and residuals for the given rows; the pseudo-value
// at (i, g) is mu(i, g) + scale[g] * w(i, g) * r(i, g).
struct DrParts {
  Matrix mu;
  Matrix weight;
  Matrix residual;
};

DrParts dr_parts(const Dataset& data, std::span<const std::size_t> rows,
                 const TreatmentGrid& grid, const NuisanceModel& nuisance,
                 const KernelSpec& spec, TreatmentRange range, DrResidual residual,
                 Exec exec) {
  const std::size_t n = rows.size();
  const std::size_t g_count = grid.size();
  DrParts parts{Matrix(n, g_count), Matrix(n, g_count), Matrix(n, g_count)};
  std::vector<double> mass(g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    mass[g] = spec.boundary_mass(grid.points[g], range.lo, range.hi);
  }

  auto fill_row = [&](std::size_t r, std::span<double> pi) {
    const std::size_t i = rows[r];
    const auto x = data.x(i);
    auto mu = parts.mu.row(r);
    auto w = parts.weight.row(r);
    auto res = parts.residual.row(r);
    nuisance.outcome_curve(grid.points, x, mu);
    nuisance.gps_curve(grid.points, x, pi);
    const double observed =
        residual == DrResidual::kObserved ? nuisance.outcome(data.t(i), x) : 0.0;
    for (std::size_t g = 0; g < g_count; ++g) {
      w[g] = dr_weight(spec.eval(data.t(i) - grid.points[g]), mass[g], pi[g]);
      res[g] = data.y(i) - (residual == DrResidual::kObserved ? observed : mu[g]);
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::kParallel) {
#pragma omp parallel
    {
      std::vector<double> pi(g_count);
#pragma omp for schedule(static)
      for (std::ptrdiff_t r = 0; r < count; ++r) fill_row(static_cast<std::size_t>(r), pi);
    }
  } else {
    std::vector<double> pi(g_count);
    for (std::ptrdiff_t r = 0; r < count; ++r) fill_row(static_cast<std::size_t>(r), pi);
  }
  return parts;
}

Matrix combine(const DrParts& parts, DrWeights weights) {
  const std::size_t n = parts.mu.rows;
  const std::size_t g_count = parts.mu.cols;
  std::vector<double> scale(g_count, 1.0);
  if (weights == DrWeights::kNormalized) {
    // serial sum keeps the result independent of the thread count
    std::vector<double> sum(g_count, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto w = parts.weight.row(r);
      for (std::size_t g = 0; g < g_count; ++g) sum[g] += w[g];
    }
    for (std::size_t g = 0; g < g_count; ++g) {
      if (sum[g] > 0.0) scale[g] = static_cast<double>(n) / sum[g];
    }
  }
  Matrix out(n, g_count);
  for (std::size_t r = 0; r < n; ++r) {
    const auto mu = parts.mu.row(r);
    const auto w = parts.weight.row(r);
    const auto res = parts.residual.row(r);
    auto row = out.row(r);
    for (std::size_t g = 0; g < g_count; ++g) {
      row[g] = mu[g] + scale[g] * w[g] * res[g];
    }
  }
  return out;
}

}  // namespace

Matrix pseudo_value_matrix(const Dataset& data, const TreatmentGrid& grid,
                           const NuisanceModel& nuisance, const KernelSpec& spec,
                           TreatmentRange range, DrOptions options, Exec exec) {
  std::vector<std::size_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return combine(
      dr_parts(data, rows, grid, nuisance, spec, range, options.residual, exec),
      options.weights);
}

DrfCurve node_drf(const Dataset& data, std::span<const std::size_t> node,
                  const TreatmentGrid& grid, const NuisanceModel& nuisance,
                  const KernelSpec& spec, TreatmentRange range, DrOptions options) {
  if (node.empty()) throw InvalidArgumentError("node_drf on an empty node");
  const Matrix pseudo =
      combine(dr_parts(data, node, grid, nuisance, spec, range, options.residual,
                       Exec::kSerial),
              options.weights);
  std::vector<std::size_t> all(node.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return node_drf(pseudo, all);
}

DrfCurve node_drf(const Matrix& pseudo, std::span<const std::size_t> node) {
  if (node.empty()) throw InvalidArgumentError("node_drf on an empty node");
  DrfCurve drf;
  drf.values.assign(pseudo.cols, 0.0);
  for (std::size_t i : node) {
    const auto row = pseudo.row(i);
    for (std::size_t g = 0; g < pseudo.cols; ++g) drf.values[g] += row[g];
  }
  for (double& v : drf.values) v /= static_cast<double>(node.size());
  return drf;
}

CateCurve node_cate(const DrfCurve& drf, std::size_t baseline_index) {
  if (baseline_index >= drf.values.size()) {
    throw InvalidArgumentError("baseline index outside the curve");
  }
  CateCurve cate;
  cate.baseline_index = baseline_index;
  cate.baseline_value = drf.values[baseline_index];
  cate.values.resize(drf.values.size());
  for (std::size_t g = 0; g < drf.values.size(); ++g) {
    cate.values[g] = drf.values[g] - cate.baseline_value;
  }
  cate.values[baseline_index] = 0.0;
  return cate;
}

double nadaraya_watson(std::span<const double> treatments,
                       std::span<const double> outcomes, double t,
                       const KernelSpec& spec) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    const double k = spec.eval(treatments[i] - t);
    num += k * outcomes[i];
    den += k;
  }
  if (!(den > 0.0)) throw RangeError("no kernel mass at t");
  return num / den;
}

double pdrf_gaussian(std::span<const double> treatments,
                     std::span<const double> outcomes, double t,
                     const KernelSpec& spec) {
  if (treatments.size() != outcomes.size()) {
    throw InvalidArgumentError("treatment and outcome lengths disagree");
  }
  // The quotient-rule expression in K'(T_i - t) is the derivative of the fit
  // with respect to -t, since d/dt K_h(T_i - t) = -K'_h(T_i - t).
  double k_sum = 0.0;
  double ky_sum = 0.0;
  double dk_sum = 0.0;
  double dky_sum = 0.0;
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    const double u = treatments[i] - t;
    const double k = spec.eval(u);
    const double dk = spec.deriv(u);
    k_sum += k;
    ky_sum += k * outcomes[i];
    dk_sum += dk;
    dky_sum += dk * outcomes[i];
  }
  if (!(k_sum > 0.0)) throw RangeError("pdrf: no kernel mass at t");
  const double phi = dky_sum / k_sum - ky_sum * dk_sum / (k_sum * k_sum);
  return -phi;
}

double pdrf_numeric(const std::function<double(double)>& curve, double t,
                    double delta, TreatmentRange range) {
  if (!(delta > 0.0)) throw ConfigError("pdrf step delta must be > 0");
  if (!range.contains(t) || !range.contains(t + delta)) {
    throw RangeError("pdrf: t + delta leaves the treatment range");
  }
  return (curve(t + delta) - curve(t)) / delta;
}

}  // namespace gcf
