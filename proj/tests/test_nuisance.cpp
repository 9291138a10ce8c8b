#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gcf/dgp.hpp"
#include "gcf/error.hpp"
#include "gcf/nuisance.hpp"
#include "test_util.hpp"

using namespace gcf;
using gcf::testing::iota_rows;
using gcf::testing::make_dataset;

namespace {

RegressionForest constant_forest(double value, std::size_t p) {
  RegressionTree::Node leaf;
  leaf.value = value;
  leaf.count = 1;
  ForestParams params;
  params.num_trees = 1;
  return RegressionForest(params, p, {RegressionTree({leaf})});
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }

}  // namespace

TEST(GpsDensity, NormalPdfAtMean) {
  const GpsModel m(constant_forest(0.0, 2), 1.0, 1e-3);
  const std::vector<double> x{0.3, -1.0};
  EXPECT_NEAR(gps_density(m, 0.0, x), 0.3989423, 1e-7);
  EXPECT_NEAR(gps_density(m, 1.5, x), normal_pdf(1.5), 1e-15);
}

TEST(GpsDensity, FloorBindsInTails) {
  const GpsModel m(constant_forest(0.0, 1), 1.0, 1e-3);
  const std::vector<double> x{0.0};
  EXPECT_EQ(gps_density(m, 10.0, x), 1e-3);
}

TEST(GpsDensity, DoublingSdHalvesPeak) {
  const std::vector<double> x{0.0};
  const GpsModel a(constant_forest(2.0, 1), 1.0, 1e-6);
  const GpsModel b(constant_forest(2.0, 1), 2.0, 1e-6);
  EXPECT_NEAR(gps_density(b, 2.0, x), 0.5 * gps_density(a, 2.0, x), 1e-15);
}

TEST(GpsDensity, FloorHoldsEverywhere) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t_dist(-50.0, 50.0);
  std::normal_distribution<double> x_dist;
  const GpsModel m(constant_forest(1.0, 3), 0.7, 0.01);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{x_dist(rng), x_dist(rng), x_dist(rng)};
    EXPECT_GE(gps_density(m, t_dist(rng), x), 0.01);
  }
}

TEST(GpsModel, ConstructorErrors) {
  EXPECT_THROW(GpsModel(constant_forest(0.0, 1), 0.0, 1e-3), DegenerateGpsError);
  EXPECT_THROW(GpsModel(constant_forest(0.0, 1), 1.0, 0.0), ConfigError);
}

TEST(FitGps, IndependentStandardNormalTreatment) {
  const Dataset d = make_dataset(
      2000, 3, 21, [](auto, auto& rng) { return std::normal_distribution<double>()(rng); },
      [](double t, auto, auto&) { return t; });
  ForestParams params;
  params.num_trees = 50;
  const GpsModel m = fit_gps(RowView(d, iota_rows(d.size())), params, 1e-3);
  EXPECT_NEAR(m.residual_sd(), 1.0, 0.1);
}

TEST(FitGps, DeterministicTreatmentIsDegenerate) {
  // x takes a few discrete values and t = 2 x exactly
  const std::size_t n = 200;
  std::vector<double> x(n);
  std::vector<double> t(n);
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(i % 4);
    t[i] = 2.0 * x[i];
  }
  const Dataset d({"x1"}, x, t, y);
  ForestParams params;
  params.num_trees = 20;
  EXPECT_THROW(fit_gps(RowView(d, iota_rows(n)), params, 1e-3), DegenerateGpsError);
}

TEST(GpsVariance, HomoscedasticConstant) {
  const Dataset d({"a"}, {0, 1, 2, 3}, {0, 1, 2, 3}, {0, 0, 0, 0});
  const GpsModel one(constant_forest(0.0, 1), 1.0, 1e-3);
  const GpsModel half(constant_forest(0.0, 1), 0.5, 1e-3);
  const std::vector<std::size_t> node_a{0, 1};
  const std::vector<std::size_t> node_b{2, 3, 1};
  EXPECT_DOUBLE_EQ(gps_variance(one, d, node_a), 1.0);
  EXPECT_DOUBLE_EQ(gps_variance(half, d, node_a), 0.25);
  EXPECT_DOUBLE_EQ(gps_variance(half, d, node_b), gps_variance(half, d, node_a));
  EXPECT_THROW(gps_variance(one, d, std::vector<std::size_t>{}), InvalidArgumentError);
}

TEST(FitOutcome, MemorizesWithDeepTrees) {
  const Dataset d = make_dataset(
      100, 2, 5, [](auto x, auto&) { return x[0]; },
      [](double t, auto x, auto&) { return 3 * t + x[1]; });
  ForestParams params;
  params.num_trees = 1;
  params.min_node_size = 1;
  params.bootstrap = false;
  params.mtry = -1;
  const OutcomeModel m = fit_outcome(RowView(d, iota_rows(d.size())), params);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(m.predict(d.t(i), d.x(i)), d.y(i), 1e-9);
  }
}

TEST(FitOutcome, IndependentOutcomeGivesMean) {
  const Dataset d = make_dataset(
      1000, 2, 6, [](auto x, auto&) { return x[0]; },
      [](double, auto, auto& rng) { return std::normal_distribution<double>(5.0, 1.0)(rng); });
  ForestParams params;
  params.num_trees = 100;
  params.min_node_size = 50;
  const OutcomeModel m = fit_outcome(RowView(d, iota_rows(d.size())), params);
  const std::vector<double> x{0.1, -0.2};
  EXPECT_NEAR(m.predict(0.0, x), 5.0, 0.3);
}

TEST(FitOutcome, PolynomialDgpBeatsVariance) {
  DgpConfig cfg;
  cfg.n = 1000;
  cfg.seed = 3;
  const SimData sim = generate(cfg);
  const Dataset& d = sim.dataset;
  const HonestSplit split = honest_split(d, 0.5, 1);
  const OutcomeModel m = fit_outcome(RowView(d, split.omega1), NuisanceParams{}.forest);
  double mean = 0.0;
  for (std::size_t i : split.omega2) mean += d.y(i);
  mean /= static_cast<double>(split.omega2.size());
  double mse = 0.0;
  double var = 0.0;
  for (std::size_t i : split.omega2) {
    mse += std::pow(m.predict(d.t(i), d.x(i)) - d.y(i), 2);
    var += std::pow(d.y(i) - mean, 2);
  }
  EXPECT_LT(mse, var);
}

TEST(FitNuisances, UsesOnlyViewRows) {
  // rows outside the view carry wild outcomes; a fit that saw them would move
  const std::size_t n = 200;
  std::vector<double> x(n);
  std::vector<double> t(n);
  std::vector<double> y(n);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = normal(rng);
    t[i] = normal(rng);
    y[i] = i < 100 ? 1.0 : 1e6;
    if (i < 100) inside.push_back(i);
  }
  const Dataset d({"x1"}, x, t, y);
  NuisanceParams params;
  params.forest.num_trees = 10;
  const NuisancePair pair = fit_nuisances(RowView(d, inside), params);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(pair.outcome(d.t(i), d.x(i)), 1.0);
}
