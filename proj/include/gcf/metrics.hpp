#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gcf/dataset.hpp"

namespace gcf {

// Mean absolute error between predicted and true effects.
double pehe(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);

using OutcomeEvaluator = std::function<double(double t, std::span<const double> x)>;

// For each t in `points`, the mean over dataset rows of evaluator(t, x_i).
std::vector<double> adrf_curve(const OutcomeEvaluator& evaluator, const Dataset& data,
                               std::span<const double> points);

// Cumulative incremental gain g(k) = Y_T(k) - Y_C(k) N_T(k) / N_C(k) over the
// rows ranked by descending score, for k = 0..n. Tied scores form one block
// and the curve is linear inside it.
std::vector<double> qini_curve(std::span<const double> scores,
                               std::span<const double> outcomes,
                               const std::vector<bool>& treated);

// (area under g - area under the random-targeting diagonal) / (|g(n)| n / 2),
// with trapezoidal areas over k in [0, n].
double qini(std::span<const double> scores, std::span<const double> outcomes,
            const std::vector<bool>& treated);

}  // namespace gcf
