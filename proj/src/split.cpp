#include "gcf/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gcf/error.hpp"

namespace gcf {
namespace {

struct Candidate {
  bool found = false;
  double gain = 0.0;
  double threshold = 0.0;
};

double midpoint(double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return mid < hi ? mid : lo;
}

// Searches one feature. `order` and the scratch buffers are per-thread.
Candidate search_feature(const SplitContext& ctx, std::span<const std::size_t> node,
                         std::size_t feature, const SplitConfig& cfg,
                         std::span<const std::size_t> companion,
                         std::size_t min_companion) {
  const Dataset& data = *ctx.data;
  const Matrix& pseudo = *ctx.pseudo;
  const std::size_t g_count = pseudo.cols;
  const std::size_t n = node.size();
  const std::size_t base = ctx.grid->baseline_index;
  const auto min_size = static_cast<std::size_t>(cfg.min_node_size);
  const bool use_var = cfg.zeta != 0.0 && !ctx.treatment_variance.empty();

  std::vector<std::size_t> order(node.begin(), node.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double xa = data.x(a, feature);
    const double xb = data.x(b, feature);
    return xa < xb || (xa == xb && a < b);
  });
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = data.x(order[i], feature);
  const std::vector<double> thresholds = candidate_thresholds(values, cfg);
  if (thresholds.empty()) return {};

  std::vector<double> comp_values;
  comp_values.reserve(companion.size());
  for (std::size_t r : companion) comp_values.push_back(data.x(r, feature));
  std::sort(comp_values.begin(), comp_values.end());

  std::vector<double> total(g_count, 0.0);
  double total_var = 0.0;
  for (std::size_t r : node) {
    const auto row = pseudo.row(r);
    for (std::size_t g = 0; g < g_count; ++g) total[g] += row[g];
    if (use_var) total_var += ctx.treatment_variance[r];
  }

  std::vector<double> left(g_count, 0.0);
  std::vector<double> lc(g_count);
  std::vector<double> rc(g_count);
  double left_var = 0.0;
  std::size_t k = 0;
  Candidate best;
  for (double thr : thresholds) {
    while (k < n && values[k] <= thr) {
      const auto row = pseudo.row(order[k]);
      for (std::size_t g = 0; g < g_count; ++g) left[g] += row[g];
      if (use_var) left_var += ctx.treatment_variance[order[k]];
      ++k;
    }
    const std::size_t nl = k;
    const std::size_t nr = n - k;
    if (nl < min_size || nr < min_size) continue;
    if (!companion.empty() || min_companion > 0) {
      const auto cl = static_cast<std::size_t>(
          std::upper_bound(comp_values.begin(), comp_values.end(), thr) -
          comp_values.begin());
      const std::size_t cr = comp_values.size() - cl;
      if (cl < min_companion || cr < min_companion) continue;
    }
    const double inv_l = 1.0 / static_cast<double>(nl);
    const double inv_r = 1.0 / static_cast<double>(nr);
    const double lb = left[base] * inv_l;
    const double rb = (total[base] - left[base]) * inv_r;
    for (std::size_t g = 0; g < g_count; ++g) {
      lc[g] = left[g] * inv_l - lb;
      rc[g] = (total[g] - left[g]) * inv_r - rb;
    }
    lc[base] = 0.0;
    rc[base] = 0.0;
    double gain = static_cast<double>(nl) * static_cast<double>(nr) /
                  static_cast<double>(n) *
                  curve_distance(lc, rc, cfg.metric, ctx.grid->points);
    if (use_var) {
      const double sigma = std::min(left_var * inv_l, (total_var - left_var) * inv_r);
      gain += cfg.zeta * sigma;
    }
    if (gain < cfg.min_info_gain) continue;
    if (!best.found || gain > best.gain) {
      best = {true, gain, thr};
    }
  }
  return best;
}

}  // namespace

Metric parse_metric(std::string_view name) {
  if (name == "d1") return Metric::kD1;
  if (name == "d2") return Metric::kD2;
  if (name == "dinf") return Metric::kDInf;
  throw ConfigError("unknown metric '" + std::string(name) +
                    "' (expected d1, d2, dinf)");
}

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kD1:
      return "d1";
    case Metric::kD2:
      return "d2";
    case Metric::kDInf:
      return "dinf";
  }
  return "d2";
}

void SplitConfig::validate() const {
  if (min_node_size < 1) throw ConfigError("min_node_size must be >= 1");
  if (!(zeta >= 0.0)) throw ConfigError("zeta must be >= 0");
  if (!(min_info_gain >= 0.0)) throw ConfigError("min_info_gain must be >= 0");
  if (mtry < 0) throw ConfigError("mtry must be >= 0");
  if (threshold_cap < 1) throw ConfigError("threshold_cap must be >= 1");
}

int resolve_split_mtry(int mtry, std::size_t num_features) {
  const int p = static_cast<int>(num_features);
  if (mtry > 0) return std::min(mtry, p);
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))));
}

double curve_distance(std::span<const double> a, std::span<const double> b,
                      Metric metric, std::span<const double> grid_points) {
  if (a.size() != b.size() || a.size() != grid_points.size()) {
    throw InvalidArgumentError("curve_distance: curves are on different grids");
  }
  const std::size_t g_count = a.size();
  if (metric == Metric::kDInf) {
    double m = 0.0;
    for (std::size_t g = 0; g < g_count; ++g) m = std::max(m, std::abs(a[g] - b[g]));
    return m;
  }
  auto integrand = [&](std::size_t g) {
    const double d = std::abs(a[g] - b[g]);
    return metric == Metric::kD1 ? d : d * d;
  };
  double sum = 0.0;
  double prev = integrand(0);
  for (std::size_t g = 1; g < g_count; ++g) {
    const double cur = integrand(g);
    sum += 0.5 * (prev + cur) * (grid_points[g] - grid_points[g - 1]);
    prev = cur;
  }
  return sum;
}

double curve_distance(const CateCurve& a, const CateCurve& b, Metric metric,
                      const TreatmentGrid& grid) {
  return curve_distance(a.values, b.values, metric, grid.points);
}

double criterion(const CateCurve& left, const CateCurve& right, std::size_t n1,
                 std::size_t n2, std::size_t n_parent, double sigma_pi,
                 const SplitConfig& cfg, const TreatmentGrid& grid) {
  if (n1 + n2 != n_parent || n1 == 0 || n2 == 0) {
    throw InvalidArgumentError("criterion: child counts must be positive and sum to the parent");
  }
  return static_cast<double>(n1) * static_cast<double>(n2) /
             static_cast<double>(n_parent) *
             curve_distance(left, right, cfg.metric, grid) +
         cfg.zeta * sigma_pi;
}

std::vector<double> candidate_thresholds(std::span<const double> sorted_values,
                                         const SplitConfig& cfg) {
  std::vector<double> all;
  for (std::size_t i = 0; i + 1 < sorted_values.size(); ++i) {
    if (sorted_values[i] < sorted_values[i + 1]) {
      all.push_back(midpoint(sorted_values[i], sorted_values[i + 1]));
    }
  }
  const auto cap = static_cast<std::size_t>(cfg.threshold_cap);
  if (sorted_values.size() <= cfg.large_node || all.size() <= cap) return all;
  std::vector<double> thinned;
  thinned.reserve(cap);
  const std::size_t m = all.size();
  for (std::size_t k = 0; k < cap; ++k) {
    const std::size_t idx = (k + 1) * m / (cap + 1);
    if (thinned.empty() || all[idx] > thinned.back()) thinned.push_back(all[idx]);
  }
  return thinned;
}

std::optional<Split> best_split(const SplitContext& ctx,
                                std::span<const std::size_t> node,
                                std::span<const std::size_t> features,
                                const SplitConfig& cfg,
                                std::span<const std::size_t> companion,
                                std::size_t min_companion, Exec exec) {
  const auto min_size = static_cast<std::size_t>(cfg.min_node_size);
  if (node.size() < 2 * min_size || node.size() < 2 || features.empty()) {
    return std::nullopt;
  }
  std::vector<std::size_t> feats(features.begin(), features.end());
  std::sort(feats.begin(), feats.end());
  feats.erase(std::unique(feats.begin(), feats.end()), feats.end());

  std::vector<Candidate> per_feature(feats.size());
  const auto nf = static_cast<std::ptrdiff_t>(feats.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t f = 0; f < nf; ++f) {
      const auto i = static_cast<std::size_t>(f);
      per_feature[i] = search_feature(ctx, node, feats[i], cfg, companion, min_companion);
    }
  } else {
    for (std::ptrdiff_t f = 0; f < nf; ++f) {
      const auto i = static_cast<std::size_t>(f);
      per_feature[i] = search_feature(ctx, node, feats[i], cfg, companion, min_companion);
    }
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    if (!per_feature[i].found) continue;
    if (!best || per_feature[i].gain > per_feature[*best].gain) best = i;
  }
  if (!best) return std::nullopt;

  Split split;
  split.feature = feats[*best];
  split.threshold = per_feature[*best].threshold;
  split.gain = per_feature[*best].gain;
  for (std::size_t r : node) {
    (ctx.data->x(r, split.feature) <= split.threshold ? split.left : split.right)
        .push_back(r);
  }
  return split;
}

std::optional<Split> best_split(const Dataset& data,
                                std::span<const std::size_t> node,
                                std::span<const std::size_t> features,
                                const TreatmentGrid& grid,
                                const NuisanceModel& nuisance,
                                const KernelSpec& spec, TreatmentRange range,
                                const SplitConfig& cfg, DrOptions options) {
  const Matrix pseudo = pseudo_value_matrix(data, grid, nuisance, spec, range, options);
  std::vector<double> tvar;
  if (cfg.zeta != 0.0) {
    tvar.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      tvar[i] = nuisance.treatment_variance(data.x(i));
    }
  }
  SplitContext ctx{&data, &pseudo, &grid, tvar};
  return best_split(ctx, node, features, cfg);
}

}  // namespace gcf
