#include "gcf/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <random>

#include "gcf/csv.hpp"
#include "gcf/error.hpp"
#include "gcf/metrics.hpp"

namespace gcf {
namespace {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

double clamp_to(const TreatmentRange& r, double t) { return std::clamp(t, r.lo, r.hi); }

struct RepOutput {
  std::vector<double> pehe;
  std::vector<double> rmse;
  std::vector<std::vector<double>> adrf;
};

RepOutput run_rep(const BenchmarkConfig& cfg, std::uint64_t seed,
                  const std::vector<double>& adrf_points, Exec exec) {
  DgpConfig dgp_cfg = cfg.dgp;
  dgp_cfg.seed = seed;
  std::mt19937_64 rng(seed);
  const Dgp dgp = Dgp::draw(dgp_cfg, rng);
  const SimData train_sim = sample_population(dgp, dgp_cfg.n, rng);
  const Dataset& train_data = train_sim.dataset;
  const TreatmentRange range = train_data.t_range();
  const std::size_t n_test = cfg.n_test > 0 ? cfg.n_test : dgp_cfg.n;
  const SimData test_sim = sample_population(dgp, n_test, rng, &range);
  const Dataset& test = test_sim.dataset;

  const double t0 = cfg.gcf.baseline.value_or(train_data.t_min());
  std::vector<double> truth(n_test);
  for (std::size_t i = 0; i < n_test; ++i) truth[i] = test_sim.true_cate(i, test.t(i), t0);

  RepOutput out;
  std::vector<double> pred(n_test);
  for (Method method : cfg.methods) {
    std::vector<double> adrf(adrf_points.size());
    switch (method) {
      case Method::kGcf: {
        GcfParams params = cfg.gcf;
        params.seed = seed;
        const GcfModel model = train(train_data, params, exec);
        std::vector<CateCurve> curves(n_test);
        for (std::size_t i = 0; i < n_test; ++i) curves[i] = predict_curve(model, test.x(i));
        for (std::size_t i = 0; i < n_test; ++i) {
          pred[i] = interpolate_curve(model.grid(), curves[i].values, test.t(i));
        }
        for (std::size_t g = 0; g < adrf_points.size(); ++g) {
          const double t = clamp_to(model.t_range(), adrf_points[g]);
          double sum = 0.0;
          for (const auto& c : curves) sum += interpolate_curve(model.grid(), c.values, t);
          adrf[g] = sum / static_cast<double>(n_test) + model.baseline_level();
        }
        break;
      }
      case Method::kRf: {
        TreatmentGrid grid = treatment_grid(train_data, 2, t0);
        ForestParams params = cfg.rf;
        params.seed = derive_seed(seed, 0x7266);
        const RfBaseline rf = baseline_rf(train_data, grid, params, exec);
        for (std::size_t i = 0; i < n_test; ++i) pred[i] = rf.cate(test.x(i), test.t(i));
        adrf = adrf_curve([&](double t, std::span<const double> x) { return rf.outcome(t, x); },
                          test, adrf_points);
        break;
      }
      case Method::kGlobalDr: {
        const std::vector<std::size_t> all = [&] {
          std::vector<std::size_t> v(train_data.size());
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
          return v;
        }();
        const RowView view(train_data, all);
        NuisanceParams np = cfg.gcf.nuisance;
        np.forest.seed = derive_seed(seed, 0x6472);
        const NuisancePair nuisances = fit_nuisances(view, np, exec);
        KernelPolicy policy = cfg.gcf.kernel;
        const KernelSpec spec = resolve_kernel(policy, view);
        const TreatmentGrid grid = treatment_grid(train_data, cfg.global_dr_grid, t0);
        const DrfCurve drf = baseline_global_dr(train_data, grid, nuisances, spec, cfg.gcf.dr);
        const double base = interpolate_curve(grid, drf.values, t0);
        for (std::size_t i = 0; i < n_test; ++i) {
          pred[i] = interpolate_curve(grid, drf.values, test.t(i)) - base;
        }
        for (std::size_t g = 0; g < adrf_points.size(); ++g) {
          adrf[g] = interpolate_curve(grid, drf.values, clamp_to(range, adrf_points[g]));
        }
        break;
      }
      case Method::kOracle: {
        pred = truth;
        for (std::size_t g = 0; g < adrf_points.size(); ++g) {
          adrf[g] = test_sim.adrf_truth(adrf_points[g]);
        }
        break;
      }
    }
    out.pehe.push_back(pehe(pred, truth));
    out.rmse.push_back(rmse(pred, truth));
    out.adrf.push_back(std::move(adrf));
  }
  return out;
}

}  // namespace

double RfBaseline::outcome(double t, std::span<const double> x) const {
  std::vector<double> features(x.begin(), x.end());
  features.push_back(t);
  return forest_.predict(features);
}

double RfBaseline::cate(std::span<const double> x, double t) const {
  return outcome(t, x) - outcome(baseline_, x);
}

RfBaseline baseline_rf(const Dataset& data, const TreatmentGrid& grid,
                       const ForestParams& params, Exec exec) {
  const std::size_t n = data.size();
  const std::size_t p = data.num_covariates();
  Matrix features(n, p + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.x(i);
    std::copy(x.begin(), x.end(), features.row(i).begin());
    features(i, p) = data.t(i);
  }
  return RfBaseline(fit_regression_forest(features.view(), data.outcomes(), params, exec),
                    grid.baseline());
}

DrfCurve baseline_global_dr(const Dataset& data, const TreatmentGrid& grid,
                            const NuisanceModel& nuisance, const KernelSpec& spec,
                            DrOptions options) {
  const Matrix pseudo = pseudo_value_matrix(data, grid, nuisance, spec, data.t_range(), options);
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return node_drf(pseudo, all);
}

Method parse_method(std::string_view name) {
  if (name == "gcf") return Method::kGcf;
  if (name == "rf") return Method::kRf;
  if (name == "global_dr") return Method::kGlobalDr;
  if (name == "oracle") return Method::kOracle;
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (valid methods: gcf, rf, global_dr, oracle)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kGcf:
      return "gcf";
    case Method::kRf:
      return "rf";
    case Method::kGlobalDr:
      return "global_dr";
    case Method::kOracle:
      return "oracle";
  }
  return "gcf";
}

void BenchmarkConfig::validate() const {
  dgp.validate();
  gcf.validate();
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (methods.empty()) throw ConfigError("no benchmark methods selected");
  if (adrf_points < 2) throw ConfigError("adrf_points must be >= 2");
  if (!(adrf_lo < adrf_hi)) throw ConfigError("adrf_lo must be < adrf_hi");
  if (global_dr_grid < 2) throw ConfigError("global_dr_grid must be >= 2");
}

const MethodResult& BenchmarkReport::result(Method method) const {
  for (const auto& r : results) {
    if (r.method == method) return r;
  }
  throw InvalidArgumentError("method '" + std::string(method_name(method)) +
                             "' is not part of this report");
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() < 2) {
    s.se = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return s;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgumentError("quantile of an empty vector");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, Exec exec) {
  cfg.validate();
  BenchmarkReport report;
  report.adrf_points = linspace(cfg.adrf_lo, cfg.adrf_hi, cfg.adrf_points);
  for (double t : report.adrf_points) {
    report.adrf_truth.push_back(population_adrf(cfg.dgp.kind, t));
  }
  for (std::size_t r = 0; r < cfg.reps; ++r) report.rep_seeds.push_back(cfg.dgp.seed + r);

  std::vector<RepOutput> reps(cfg.reps);
  std::vector<std::string> failures(cfg.reps);
  std::vector<ErrorKind> failure_kind(cfg.reps, ErrorKind::kTraining);
  const auto count = static_cast<std::ptrdiff_t>(cfg.reps);
  // Reps run in parallel with serial kernels inside; each rep owns its seed.
  const Exec inner = exec == Exec::kParallel && cfg.reps > 1 ? Exec::kSerial : exec;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel && cfg.reps > 1)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const auto i = static_cast<std::size_t>(r);
    try {
      reps[i] = run_rep(cfg, report.rep_seeds[i], report.adrf_points, inner);
    } catch (const Error& e) {
      failures[i] = e.what();
      failure_kind[i] = e.kind();
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < cfg.reps; ++i) {
    if (!failures[i].empty()) {
      throw Error(failure_kind[i], "benchmark rep " + std::to_string(i) + " (seed " +
                                       std::to_string(report.rep_seeds[i]) +
                                       ") failed: " + failures[i]);
    }
  }

  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodResult result;
    result.method = cfg.methods[m];
    for (const auto& rep : reps) {
      result.pehe.push_back(rep.pehe[m]);
      result.rmse.push_back(rep.rmse[m]);
      result.adrf.push_back(rep.adrf[m]);
    }
    report.results.push_back(std::move(result));
  }
  return report;
}

void write_report_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "method,metric,mean,se,reps\n";
  for (const auto& r : report.results) {
    for (const auto& [metric, values] :
         {std::pair<const char*, const std::vector<double>*>{"pehe", &r.pehe},
          std::pair<const char*, const std::vector<double>*>{"rmse", &r.rmse}}) {
      const Summary s = summarize(*values);
      out << method_name(r.method) << ',' << metric << ',' << format_double(s.mean) << ','
          << (std::isnan(s.se) ? std::string() : format_double(s.se)) << ','
          << values->size() << '\n';
    }
  }
}

void write_adrf_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "method,t,truth,median,q025,q975\n";
  for (const auto& r : report.results) {
    for (std::size_t g = 0; g < report.adrf_points.size(); ++g) {
      std::vector<double> column;
      for (const auto& rep : r.adrf) column.push_back(rep[g]);
      out << method_name(r.method) << ',' << format_double(report.adrf_points[g]) << ','
          << format_double(report.adrf_truth[g]) << ','
          << format_double(quantile(column, 0.5)) << ','
          << format_double(quantile(column, 0.025)) << ','
          << format_double(quantile(column, 0.975)) << '\n';
    }
  }
}

double integrated_abs_error(std::span<const double> points,
                            std::span<const double> curve,
                            std::span<const double> truth) {
  double sum = 0.0;
  for (std::size_t g = 1; g < points.size(); ++g) {
    sum += 0.5 *
           (std::abs(curve[g - 1] - truth[g - 1]) + std::abs(curve[g] - truth[g])) *
           (points[g] - points[g - 1]);
  }
  return sum;
}

}  // namespace gcf
