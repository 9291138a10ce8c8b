#pragma once

#include <span>
#include <vector>

#include "gcf/dataset.hpp"
#include "gcf/parallel.hpp"
#include "gcf/regression_forest.hpp"

namespace gcf {

// The two pretrained nuisance functions the doubly-robust estimators consume:
// the conditional outcome mean mu(t, x) and the generalized propensity score
// pi(t | x). Implementations must be thread-safe for concurrent reads.
class NuisanceModel {
 public:
  virtual ~NuisanceModel() = default;
  virtual double outcome(double t, std::span<const double> x) const = 0;
  virtual double gps(double t, std::span<const double> x) const = 0;
  // Conditional treatment variance under the GPS at x.
  virtual double treatment_variance(std::span<const double> x) const = 0;

  // Batched evaluation over several treatment values at one x. The defaults
  // loop; concrete models override to reuse per-x work.
  virtual void outcome_curve(std::span<const double> ts,
                             std::span<const double> x,
                             std::span<double> out) const {
    for (std::size_t g = 0; g < ts.size(); ++g) out[g] = outcome(ts[g], x);
  }
  virtual void gps_curve(std::span<const double> ts, std::span<const double> x,
                         std::span<double> out) const {
    for (std::size_t g = 0; g < ts.size(); ++g) out[g] = gps(ts[g], x);
  }
};

// mu(t, x): regression forest on the features (x, t), treatment last.
class OutcomeModel {
 public:
  OutcomeModel() = default;
  explicit OutcomeModel(RegressionForest forest) : forest_(std::move(forest)) {}

  double predict(double t, std::span<const double> x) const;
  const RegressionForest& forest() const { return forest_; }

 private:
  RegressionForest forest_;
};

// pi(t | x) = max(p_min, N(t; m(x), sd^2)) with m a regression forest.
class GpsModel {
 public:
  GpsModel() = default;
  GpsModel(RegressionForest mean_forest, double residual_sd, double density_floor);

  double mean(std::span<const double> x) const { return mean_forest_.predict(x); }
  double density(double t, std::span<const double> x) const;
  // Density at t given a precomputed conditional mean.
  double density_at_mean(double t, double mean) const;
  // Variance of the (unfloored) conditional treatment density at x.
  double conditional_variance(std::span<const double>) const {
    return residual_sd_ * residual_sd_;
  }
  double residual_sd() const { return residual_sd_; }
  double density_floor() const { return density_floor_; }
  const RegressionForest& mean_forest() const { return mean_forest_; }

 private:
  RegressionForest mean_forest_;
  double residual_sd_ = 1.0;
  double density_floor_ = 1e-3;
};

struct NuisanceParams {
  ForestParams forest{.mtry = -1};
  double density_floor = 1e-3;
};

OutcomeModel fit_outcome(const RowView& omega1, const ForestParams& params,
                         Exec exec = Exec::kParallel);
GpsModel fit_gps(const RowView& omega1, const ForestParams& params,
                 double density_floor, Exec exec = Exec::kParallel);

double gps_density(const GpsModel& model, double t, std::span<const double> x);
// Node-level weak-positivity statistic: mean over the node of the GPS
// conditional variance. Constant (residual_sd^2) for the homoscedastic model.
double gps_variance(const GpsModel& model, const Dataset& data,
                    std::span<const std::size_t> node);

class NuisancePair final : public NuisanceModel {
 public:
  NuisancePair() = default;
  NuisancePair(OutcomeModel outcome, GpsModel gps)
      : outcome_(std::move(outcome)), gps_(std::move(gps)) {}

  double outcome(double t, std::span<const double> x) const override {
    return outcome_.predict(t, x);
  }
  double gps(double t, std::span<const double> x) const override {
    return gps_.density(t, x);
  }
  double treatment_variance(std::span<const double> x) const override {
    return gps_.conditional_variance(x);
  }
  void gps_curve(std::span<const double> ts, std::span<const double> x,
                 std::span<double> out) const override {
    const double m = gps_.mean(x);
    for (std::size_t g = 0; g < ts.size(); ++g) {
      out[g] = gps_.density_at_mean(ts[g], m);
    }
  }

  const OutcomeModel& outcome_model() const { return outcome_; }
  const GpsModel& gps_model() const { return gps_; }

 private:
  OutcomeModel outcome_;
  GpsModel gps_;
};

// Fits both nuisances on the structure half only.
NuisancePair fit_nuisances(const RowView& omega1, const NuisanceParams& params,
                           Exec exec = Exec::kParallel);

}  // namespace gcf
