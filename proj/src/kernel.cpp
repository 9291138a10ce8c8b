#include "gcf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gcf/error.hpp"

namespace gcf {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Standard (h = 1) kernel density.
double unit_kernel(KernelFamily family, double u) {
  if (family == KernelFamily::kGaussian) {
    return kInvSqrt2Pi * std::exp(-0.5 * u * u);
  }
  if (std::abs(u) > 1.0) return 0.0;
  const double q = 1.0 - u * u;
  switch (family) {
    case KernelFamily::kUniform:
      return 0.5;
    case KernelFamily::kEpanechnikov:
      return 0.75 * q;
    case KernelFamily::kBiweight:
      return 15.0 / 16.0 * q * q;
    case KernelFamily::kTriweight:
      return 35.0 / 32.0 * q * q * q;
    case KernelFamily::kGaussian:
      break;
  }
  return 0.0;
}

// Standard kernel CDF.
double unit_cdf(KernelFamily family, double u) {
  if (family == KernelFamily::kGaussian) {
    return 0.5 * std::erfc(-u / std::numbers::sqrt2);
  }
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double u2 = u * u;
  switch (family) {
    case KernelFamily::kUniform:
      return 0.5 * (u + 1.0);
    case KernelFamily::kEpanechnikov:
      return 0.5 + 0.75 * (u - u * u2 / 3.0);
    case KernelFamily::kBiweight:
      return 0.5 + 15.0 / 16.0 * (u - 2.0 * u * u2 / 3.0 + u * u2 * u2 / 5.0);
    case KernelFamily::kTriweight:
      return 0.5 + 35.0 / 32.0 *
                       (u - u * u2 + 3.0 * u * u2 * u2 / 5.0 -
                        u * u2 * u2 * u2 / 7.0);
    case KernelFamily::kGaussian:
      break;
  }
  return 0.0;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  // Linear interpolation between order statistics (type 7).
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "uniform") return KernelFamily::kUniform;
  if (name == "epanechnikov") return KernelFamily::kEpanechnikov;
  if (name == "biweight") return KernelFamily::kBiweight;
  if (name == "triweight") return KernelFamily::kTriweight;
  throw ConfigError("unknown kernel '" + std::string(name) +
                    "' (expected gaussian, uniform, epanechnikov, biweight, "
                    "triweight)");
}

std::string_view kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::kGaussian:
      return "gaussian";
    case KernelFamily::kUniform:
      return "uniform";
    case KernelFamily::kEpanechnikov:
      return "epanechnikov";
    case KernelFamily::kBiweight:
      return "biweight";
    case KernelFamily::kTriweight:
      return "triweight";
  }
  return "unknown";
}

KernelSpec::KernelSpec(KernelFamily family, double bandwidth)
    : family_(family), bandwidth_(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("kernel bandwidth must be positive and finite");
  }
}

double KernelSpec::eval(double u) const {
  return unit_kernel(family_, u / bandwidth_) / bandwidth_;
}

double KernelSpec::deriv(double u) const {
  if (family_ != KernelFamily::kGaussian) {
    throw UnsupportedError("kernel derivative is only available for the "
                           "gaussian family; use the numeric derivative");
  }
  const double z = u / bandwidth_;
  return -z * unit_kernel(family_, z) / (bandwidth_ * bandwidth_);
}

double KernelSpec::boundary_mass(double t, double t_min, double t_max) const {
  return unit_cdf(family_, (t_max - t) / bandwidth_) -
         unit_cdf(family_, (t_min - t) / bandwidth_);
}

double bandwidth_rot(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw ConfigError("rule-of-thumb bandwidth needs at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    throw TrainingError("degenerate bandwidth: values are constant");
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double robust = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 1.06 * robust * std::pow(static_cast<double>(n), -0.2);
}

double loo_nw_error(std::span<const double> values,
                    std::span<const double> targets, const KernelSpec& spec) {
  const std::size_t n = values.size();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = spec.eval(values[i] - values[j]);
      num += w * targets[j];
      den += w;
    }
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    const double r = targets[i] - num / den;
    err += r * r;
  }
  return err / static_cast<double>(n);
}

double bandwidth_cv(std::span<const double> values,
                    std::span<const double> targets,
                    std::span<const double> candidates, KernelFamily family) {
  if (candidates.empty()) throw ConfigError("no bandwidth candidates given");
  if (values.size() != targets.size() || values.size() < 3) {
    throw InvalidArgumentError(
        "bandwidth_cv needs equal-length inputs with at least 3 rows");
  }
  std::vector<double> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  double best_h = sorted.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double h : sorted) {
    const double err = loo_nw_error(values, targets, KernelSpec(family, h));
    if (err < best_err) {
      best_err = err;
      best_h = h;
    }
  }
  return best_h;
}

}  // namespace gcf
