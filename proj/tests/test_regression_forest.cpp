#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gcf/error.hpp"
#include "gcf/matrix.hpp"
#include "gcf/regression_forest.hpp"

using namespace gcf;

namespace {

Matrix random_features(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(n, p);
  for (auto& v : m.data) v = normal(rng);
  return m;
}

}  // namespace

TEST(RegressionForest, ConstantTarget) {
  const Matrix x = random_features(60, 3, 1);
  const std::vector<double> y(60, 4.25);
  ForestParams params;
  params.num_trees = 10;
  const RegressionForest f = fit_regression_forest(x.view(), y, params);
  const Matrix probe = random_features(20, 3, 2);
  for (std::size_t i = 0; i < probe.rows; ++i) EXPECT_EQ(f.predict(probe.row(i)), 4.25);
}

TEST(RegressionForest, RootOnlyTreePredictsMean) {
  const std::size_t n = 40;
  const Matrix x = random_features(n, 2, 3);
  std::vector<double> y(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<double>(i);
    mean += y[i];
  }
  mean /= static_cast<double>(n);
  ForestParams params;
  params.num_trees = 1;
  params.min_node_size = static_cast<int>(n);
  params.bootstrap = false;
  const RegressionForest f = fit_regression_forest(x.view(), y, params);
  ASSERT_EQ(f.trees().size(), 1u);
  EXPECT_EQ(f.trees()[0].depth(), 0);
  EXPECT_NEAR(f.predict(x.row(0)), mean, 1e-12);
}

TEST(RegressionForest, LearnsSingleFeature) {
  const std::size_t n = 500;
  const Matrix x = random_features(n, 3, 4);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x(i, 0);
  ForestParams params;
  params.num_trees = 50;
  params.seed = 9;
  const RegressionForest f = fit_regression_forest(x.view(), y, params);
  const Matrix test = random_features(300, 3, 5);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < test.rows; ++i) mean += test(i, 0);
  mean /= static_cast<double>(test.rows);
  for (std::size_t i = 0; i < test.rows; ++i) {
    ss_res += std::pow(f.predict(test.row(i)) - test(i, 0), 2);
    ss_tot += std::pow(test(i, 0) - mean, 2);
  }
  EXPECT_GT(1.0 - ss_res / ss_tot, 0.8);
}

TEST(RegressionForest, SameSeedSamePredictions) {
  const Matrix x = random_features(200, 4, 6);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 1) * x(i, 2);
  ForestParams params;
  params.num_trees = 20;
  params.seed = 17;
  const RegressionForest a = fit_regression_forest(x.view(), y, params, Exec::kSerial);
  const RegressionForest b = fit_regression_forest(x.view(), y, params, Exec::kParallel);
  const Matrix probe = random_features(50, 4, 7);
  EXPECT_EQ(a.predict(probe.view(), Exec::kSerial), b.predict(probe.view(), Exec::kParallel));
}

TEST(RegressionForest, LeavesRespectMinNodeSize) {
  const Matrix x = random_features(300, 3, 8);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = std::sin(3 * x(i, 0)) + x(i, 1);
  ForestParams params;
  params.num_trees = 5;
  params.min_node_size = 7;
  const RegressionForest f = fit_regression_forest(x.view(), y, params);
  for (const auto& tree : f.trees()) {
    for (const auto& node : tree.nodes()) {
      if (node.feature < 0) EXPECT_GE(node.count, 7);
    }
  }
}

TEST(RegressionForest, OutOfBagPredictionsAvoidOwnRow) {
  const std::size_t n = 100;
  const Matrix x = random_features(n, 2, 10);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i % 2) * 100.0;
  ForestParams params;
  params.num_trees = 50;
  params.min_node_size = 1;
  std::vector<double> oob;
  const RegressionForest f = fit_regression_forest(x.view(), y, params, Exec::kParallel, &oob);
  ASSERT_EQ(oob.size(), n);
  // y is noise in x, so deep in-sample fits memorize while OOB ones cannot
  double in_sample = 0.0;
  double out_of_bag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    in_sample += std::abs(f.predict(x.row(i)) - y[i]);
    out_of_bag += std::abs(oob[i] - y[i]);
  }
  EXPECT_LT(in_sample, out_of_bag);
}

TEST(RegressionForest, Errors) {
  const Matrix x = random_features(4, 2, 11);
  const std::vector<double> y(4, 1.0);
  ForestParams params;
  params.min_node_size = 5;
  EXPECT_THROW(fit_regression_forest(x.view(), y, params), TrainingError);
  params.min_node_size = 1;
  const std::vector<double> short_y(3, 1.0);
  EXPECT_THROW(fit_regression_forest(x.view(), short_y, params), InvalidArgumentError);
  params.num_trees = 0;
  EXPECT_THROW(fit_regression_forest(x.view(), y, params), ConfigError);
}

TEST(RegressionForest, MtryResolution) {
  EXPECT_EQ(resolve_forest_mtry(0, 51), 17);
  EXPECT_EQ(resolve_forest_mtry(0, 2), 1);
  EXPECT_EQ(resolve_forest_mtry(-1, 51), 51);
  EXPECT_EQ(resolve_forest_mtry(80, 51), 51);
  EXPECT_EQ(resolve_forest_mtry(4, 51), 4);
}
