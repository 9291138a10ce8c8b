#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcf/dgp.hpp"
#include "gcf/dr.hpp"
#include "gcf/forest.hpp"
#include "gcf/regression_forest.hpp"

namespace gcf {

// Plain regression forest on (x, t) -> y; CATE is the prediction difference
// against the baseline treatment.
class RfBaseline {
 public:
  RfBaseline(RegressionForest forest, double baseline)
      : forest_(std::move(forest)), baseline_(baseline) {}

  double outcome(double t, std::span<const double> x) const;
  double cate(std::span<const double> x, double t) const;
  double baseline() const { return baseline_; }

 private:
  RegressionForest forest_;
  double baseline_;
};

RfBaseline baseline_rf(const Dataset& data, const TreatmentGrid& grid,
                       const ForestParams& params, Exec exec = Exec::kParallel);

// Kernel doubly-robust ADRF over the whole sample (no tree).
DrfCurve baseline_global_dr(const Dataset& data, const TreatmentGrid& grid,
                            const NuisanceModel& nuisance, const KernelSpec& spec,
                            DrOptions options = {});

enum class Method { kGcf, kRf, kGlobalDr, kOracle };
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

struct BenchmarkConfig {
  DgpConfig dgp;
  std::size_t reps = 20;
  std::vector<Method> methods{Method::kGcf, Method::kRf, Method::kGlobalDr,
                              Method::kOracle};
  GcfParams gcf;
  ForestParams rf;
  std::size_t n_test = 0;  // 0: same as dgp.n
  std::size_t global_dr_grid = 50;
  std::size_t adrf_points = 10;
  double adrf_lo = 1.0;
  double adrf_hi = 20.0;

  void validate() const;
};

struct MethodResult {
  Method method = Method::kGcf;
  std::vector<double> pehe;               // per rep
  std::vector<double> rmse;               // per rep
  std::vector<std::vector<double>> adrf;  // per rep, per ADRF point
};

struct BenchmarkReport {
  std::vector<std::uint64_t> rep_seeds;
  std::vector<double> adrf_points;
  std::vector<double> adrf_truth;  // population ADRF, mu(t) + 0.2 t
  std::vector<MethodResult> results;

  const MethodResult& result(Method method) const;
};

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // NaN for a single rep
};
Summary summarize(std::span<const double> values);
// Linear-interpolation quantile (type 7).
double quantile(std::vector<double> values, double p);

// One rep: draws a population from `seed`, a training sample and a test
// sample whose treatments are uniform on the training range, fits every
// method and scores PEHE / RMSE on the test rows.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, Exec exec = Exec::kParallel);

// method,metric,mean,se,reps
void write_report_csv(const BenchmarkReport& report, std::ostream& out);
// method,t,truth,median,q025,q975
void write_adrf_csv(const BenchmarkReport& report, std::ostream& out);

// Integrated absolute error of a curve against the truth (trapezoid).
double integrated_abs_error(std::span<const double> points,
                            std::span<const double> curve,
                            std::span<const double> truth);

}  // namespace gcf
