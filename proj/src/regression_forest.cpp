#include "gcf/regression_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <utility>

#include "gcf/error.hpp"

namespace gcf {
namespace {

class TreeBuilder {
 public:
  TreeBuilder(MatrixView x, std::span<const double> y, const ForestParams& params,
              int mtry, std::uint64_t seed)
      : x_(x), y_(y), params_(params), mtry_(mtry), rng_(seed) {}

  RegressionTree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    nodes_.clear();
    nodes_.emplace_back();
    struct Pending {
      int node;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<Pending> stack{{0, 0, samples_.size()}};
    while (!stack.empty()) {
      const Pending cur = stack.back();
      stack.pop_back();
      const auto split = find_split(cur.begin, cur.end);
      if (!split) {
        make_leaf(cur.node, cur.begin, cur.end);
        continue;
      }
      const auto mid_it = std::partition(
          samples_.begin() + static_cast<std::ptrdiff_t>(cur.begin),
          samples_.begin() + static_cast<std::ptrdiff_t>(cur.end),
          [&](std::size_t s) { return x_(s, split->first) <= split->second; });
      const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
      const int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      auto& node = nodes_[static_cast<std::size_t>(cur.node)];
      node.feature = static_cast<int>(split->first);
      node.threshold = split->second;
      node.left = left;
      node.right = left + 1;
      node.count = static_cast<int>(cur.end - cur.begin);
      stack.push_back({left + 1, mid, cur.end});
      stack.push_back({left, cur.begin, mid});
    }
    return RegressionTree(std::move(nodes_));
  }

 private:
  void make_leaf(int id, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[samples_[i]];
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.value = sum / static_cast<double>(end - begin);
    node.count = static_cast<int>(end - begin);
  }

  std::optional<std::pair<std::size_t, double>> find_split(std::size_t begin,
                                                           std::size_t end) {
    const std::size_t n = end - begin;
    const auto min_size = static_cast<std::size_t>(params_.min_node_size);
    if (n < 2 * min_size || n < 2) return std::nullopt;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[samples_[i]];
      sum += v;
      sum_sq += v * v;
    }
    const double parent_score = sum * sum / static_cast<double>(n);
    if (sum_sq - parent_score <= 1e-12 * (1.0 + sum_sq)) return std::nullopt;

    // Partial Fisher-Yates draw of mtry candidate features.
    features_.resize(x_.cols);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(mtry_), x_.cols);
    for (std::size_t k = 0; k < take; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, x_.cols - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }

    double best_score = parent_score;
    std::optional<std::pair<std::size_t, double>> best;
    buf_.resize(n);
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t f = features_[k];
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = samples_[begin + i];
        buf_[i] = {x_(s, f), y_[s]};
      }
      std::sort(buf_.begin(), buf_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (buf_.front().first == buf_.back().first) continue;
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += buf_[i].second;
        const std::size_t nl = i + 1;
        if (nl < min_size) continue;
        if (n - nl < min_size) break;
        if (buf_[i].first == buf_[i + 1].first) continue;
        const double right_sum = sum - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(n - nl);
        if (score > best_score * (1.0 + 1e-12) + 1e-12) {
          best_score = score;
          double thr = 0.5 * (buf_[i].first + buf_[i + 1].first);
          if (!(thr < buf_[i + 1].first)) thr = buf_[i].first;
          best = std::make_pair(f, thr);
        }
      }
    }
    return best;
  }

  MatrixView x_;
  std::span<const double> y_;
  const ForestParams& params_;
  int mtry_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> samples_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, double>> buf_;
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t id = 0;
  while (nodes_[id].feature >= 0) {
    const auto& node = nodes_[id];
    id = static_cast<std::size_t>(
        x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                    : node.right);
  }
  return nodes_[id].value;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> depth(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.feature >= 0) {
      depth[static_cast<std::size_t>(node.left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(node.right)] = depth[i] + 1;
    }
    best = std::max(best, depth[i]);
  }
  return best;
}

RegressionForest::RegressionForest(ForestParams params, std::size_t num_features,
                                   std::vector<RegressionTree> trees)
    : params_(params), num_features_(num_features), trees_(std::move(trees)) {}

double RegressionForest::predict(std::span<const double> x) const {
  if (x.size() != num_features_) {
    throw InvalidArgumentError("regression forest expects " +
                               std::to_string(num_features_) + " features, got " +
                               std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict(x);
  return sum / static_cast<double>(trees_.size());
}

std::vector<double> RegressionForest::predict(MatrixView features,
                                              Exec exec) const {
  std::vector<double> out(features.rows);
  const auto n = static_cast<std::ptrdiff_t>(features.rows);
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = predict(features.row(static_cast<std::size_t>(i)));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = predict(features.row(static_cast<std::size_t>(i)));
    }
  }
  return out;
}

int resolve_forest_mtry(int mtry, std::size_t num_features) {
  if (mtry < 0) return static_cast<int>(num_features);
  if (mtry > 0) return std::min<int>(mtry, static_cast<int>(num_features));
  return std::max(1, static_cast<int>(num_features) / 3);
}

RegressionForest fit_regression_forest(MatrixView features,
                                       std::span<const double> targets,
                                       const ForestParams& params, Exec exec,
                                       std::vector<double>* oob) {
  const std::size_t n = features.rows;
  if (targets.size() != n) {
    throw InvalidArgumentError("feature and target row counts disagree");
  }
  if (params.num_trees < 1) throw ConfigError("num_trees must be >= 1");
  if (params.min_node_size < 1) throw ConfigError("min_node_size must be >= 1");
  if (n < static_cast<std::size_t>(params.min_node_size) || n < 1) {
    throw TrainingError("regression forest needs at least min_node_size (" +
                        std::to_string(params.min_node_size) + ") rows, got " +
                        std::to_string(n));
  }
  const int mtry = resolve_forest_mtry(params.mtry, features.cols);
  const auto num_trees = static_cast<std::size_t>(params.num_trees);
  std::vector<RegressionTree> trees(num_trees);
  std::vector<std::vector<std::uint8_t>> in_bag(oob ? num_trees : 0);

  auto grow = [&](std::size_t b) {
    const std::uint64_t seed = derive_seed(params.seed, b);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> samples(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : samples) s = pick(rng);
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    if (oob) {
      in_bag[b].assign(n, 0);
      for (std::size_t s : samples) in_bag[b][s] = 1;
    }
    TreeBuilder builder(features, targets, params, mtry, rng());
    trees[b] = builder.build(std::move(samples));
  };

  const auto nt = static_cast<std::ptrdiff_t>(num_trees);
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < nt; ++b) grow(static_cast<std::size_t>(b));
  } else {
    for (std::ptrdiff_t b = 0; b < nt; ++b) grow(static_cast<std::size_t>(b));
  }

  RegressionForest forest(params, features.cols, std::move(trees));
  if (oob) {
    oob->assign(n, 0.0);
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const auto x = features.row(i);
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t b = 0; b < num_trees; ++b) {
        if (in_bag[b][i]) continue;
        sum += forest.trees()[b].predict(x);
        ++count;
      }
      (*oob)[i] = count > 0 ? sum / static_cast<double>(count) : forest.predict(x);
    }
  }
  return forest;
}

}  // namespace gcf
