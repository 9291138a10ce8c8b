#include "gcf/nuisance.hpp"

#include <algorithm>
#include <cmath>

#include "gcf/error.hpp"

namespace gcf {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace

double OutcomeModel::predict(double t, std::span<const double> x) const {
  const std::size_t p = x.size();
  // Small fixed buffer avoids a heap allocation per call for typical widths.
  if (p < 64) {
    double buf[64];
    std::copy(x.begin(), x.end(), buf);
    buf[p] = t;
    return forest_.predict(std::span<const double>(buf, p + 1));
  }
  std::vector<double> features(x.begin(), x.end());
  features.push_back(t);
  return forest_.predict(features);
}

GpsModel::GpsModel(RegressionForest mean_forest, double residual_sd,
                   double density_floor)
    : mean_forest_(std::move(mean_forest)),
      residual_sd_(residual_sd),
      density_floor_(density_floor) {
  if (!(residual_sd > 0.0)) throw DegenerateGpsError("GPS residual sd must be > 0");
  if (!(density_floor > 0.0)) throw ConfigError("density_floor must be > 0");
}

double GpsModel::density(double t, std::span<const double> x) const {
  return density_at_mean(t, mean(x));
}

double GpsModel::density_at_mean(double t, double mean) const {
  const double z = (t - mean) / residual_sd_;
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z) / residual_sd_;
  return std::max(density_floor_, pdf);
}

OutcomeModel fit_outcome(const RowView& omega1, const ForestParams& params,
                         Exec exec) {
  const std::size_t n = omega1.size();
  const std::size_t p = omega1.num_covariates();
  Matrix features(n, p + 1);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = omega1.x(i);
    std::copy(x.begin(), x.end(), features.row(i).begin());
    features(i, p) = omega1.t(i);
    targets[i] = omega1.y(i);
  }
  return OutcomeModel(fit_regression_forest(features.view(), targets, params, exec));
}

GpsModel fit_gps(const RowView& omega1, const ForestParams& params,
                 double density_floor, Exec exec) {
  if (!(density_floor > 0.0)) throw ConfigError("density_floor must be > 0");
  const std::size_t n = omega1.size();
  const std::size_t p = omega1.num_covariates();
  Matrix features(n, p);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = omega1.x(i);
    std::copy(x.begin(), x.end(), features.row(i).begin());
    targets[i] = omega1.t(i);
  }
  std::vector<double> oob;
  auto forest = fit_regression_forest(features.view(), targets, params, exec,
                                      params.bootstrap ? &oob : nullptr);
  if (!params.bootstrap) oob = forest.predict(features.view(), exec);

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += targets[i] - oob[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = targets[i] - oob[i] - mean;
    ss += r * r;
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  double scale = 0.0;
  for (double t : targets) scale = std::max(scale, std::abs(t));
  if (sd <= 1e-12 * (1.0 + scale)) {
    throw DegenerateGpsError(
        "treatment is a deterministic function of the covariates; positivity "
        "is violated");
  }
  return GpsModel(std::move(forest), std::max(sd, 1e-6), density_floor);
}

double gps_density(const GpsModel& model, double t, std::span<const double> x) {
  return model.density(t, x);
}

double gps_variance(const GpsModel& model, const Dataset& data,
                    std::span<const std::size_t> node) {
  if (node.empty()) throw InvalidArgumentError("gps_variance on an empty node");
  double sum = 0.0;
  for (std::size_t i : node) sum += model.conditional_variance(data.x(i));
  return sum / static_cast<double>(node.size());
}

NuisancePair fit_nuisances(const RowView& omega1, const NuisanceParams& params,
                           Exec exec) {
  ForestParams gps_params = params.forest;
  gps_params.seed = derive_seed(params.forest.seed, 0x6770);
  return NuisancePair(fit_outcome(omega1, params.forest, exec),
                      fit_gps(omega1, gps_params, params.density_floor, exec));
}

}  // namespace gcf
