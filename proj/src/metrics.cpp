#include "gcf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gcf/error.hpp"

namespace gcf {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw InvalidArgumentError("length mismatch: " + std::to_string(a) + " vs " +
                               std::to_string(b));
  }
  if (a == 0) throw InvalidArgumentError("metric over an empty vector");
}

}  // namespace

double pehe(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred.size(), truth.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred.size(), truth.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

std::vector<double> adrf_curve(const OutcomeEvaluator& evaluator, const Dataset& data,
                               std::span<const double> points) {
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t g = 0; g < points.size(); ++g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) sum += evaluator(points[g], data.x(i));
    out[g] = sum / static_cast<double>(data.size());
  }
  return out;
}

std::vector<double> qini_curve(std::span<const double> scores,
                               std::span<const double> outcomes,
                               const std::vector<bool>& treated) {
  const std::size_t n = scores.size();
  check_lengths(n, outcomes.size());
  check_lengths(n, treated.size());
  const auto n_treated = static_cast<std::size_t>(std::count(treated.begin(), treated.end(), true));
  if (n_treated == 0 || n_treated == n) {
    throw InvalidArgumentError("qini needs non-empty treated and control groups");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<double> curve(n + 1, 0.0);
  double y_t = 0.0;
  double y_c = 0.0;
  double n_t = 0.0;
  double n_c = 0.0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    while (end < n && scores[order[end]] == scores[order[k]]) {
      const std::size_t i = order[end];
      if (treated[i]) {
        y_t += outcomes[i];
        n_t += 1.0;
      } else {
        y_c += outcomes[i];
        n_c += 1.0;
      }
      ++end;
    }
    const double g_end = y_t - (n_c > 0.0 ? y_c * n_t / n_c : 0.0);
    const double g_start = curve[k];
    for (std::size_t j = k + 1; j <= end; ++j) {
      const double frac = static_cast<double>(j - k) / static_cast<double>(end - k);
      curve[j] = g_start + frac * (g_end - g_start);
    }
    curve[end] = g_end;
    k = end;
  }
  return curve;
}

double qini(std::span<const double> scores, std::span<const double> outcomes,
            const std::vector<bool>& treated) {
  const std::vector<double> curve = qini_curve(scores, outcomes, treated);
  const std::size_t n = scores.size();
  const double total = curve[n];
  if (total == 0.0) {
    throw InvalidArgumentError("qini: total incremental gain is zero");
  }
  double area = 0.0;
  for (std::size_t k = 1; k <= n; ++k) area += 0.5 * (curve[k - 1] + curve[k]);
  const double half = static_cast<double>(n) / 2.0;
  return (area - total * half) / (std::abs(total) * half);
}

}  // namespace gcf
