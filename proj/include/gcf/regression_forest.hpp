#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gcf/matrix.hpp"
#include "gcf/parallel.hpp"

namespace gcf {

struct ForestParams {
  int num_trees = 100;
  int min_node_size = 5;
  int mtry = 0;  // 0: max(1, floor(p / 3)); negative: all features
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

// Axis-aligned CART regression tree stored as a flat node array. A node with
// feature < 0 is a leaf; rows with x[feature] <= threshold go left.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int count = 0;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const;
  int depth() const;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

class RegressionForest {
 public:
  RegressionForest() = default;
  RegressionForest(ForestParams params, std::size_t num_features,
                   std::vector<RegressionTree> trees);

  // Mean over per-tree leaf means.
  double predict(std::span<const double> x) const;
  std::vector<double> predict(MatrixView features,
                              Exec exec = Exec::kParallel) const;

  const ForestParams& params() const { return params_; }
  std::size_t num_features() const { return num_features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  ForestParams params_;
  std::size_t num_features_ = 0;
  std::vector<RegressionTree> trees_;
};

// Fits a bootstrap CART forest with variance-reduction splits and per-node
// mtry feature sampling. Tree b draws from its own seed stream, so the result
// does not depend on thread scheduling. When `oob` is non-null it receives
// out-of-bag predictions (full-forest prediction for rows never left out).
RegressionForest fit_regression_forest(MatrixView features,
                                       std::span<const double> targets,
                                       const ForestParams& params,
                                       Exec exec = Exec::kParallel,
                                       std::vector<double>* oob = nullptr);

int resolve_forest_mtry(int mtry, std::size_t num_features);

}  // namespace gcf
