#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gcf/benchmark.hpp"
#include "gcf/dgp.hpp"
#include "gcf/error.hpp"
#include "gcf/metrics.hpp"
#include "test_util.hpp"

using namespace gcf;
using gcf::testing::FunctionNuisance;
using gcf::testing::iota_rows;
using gcf::testing::make_dataset;

namespace {

// Incremental gain of the first k rows of `order`, recomputed from scratch.
double prefix_gain(const std::vector<std::size_t>& order, std::size_t k,
                   const std::vector<double>& y, const std::vector<bool>& treated) {
  double yt = 0, yc = 0, nt = 0, nc = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = order[j];
    if (treated[i]) {
      yt += y[i];
      nt += 1;
    } else {
      yc += y[i];
      nc += 1;
    }
  }
  return yt - (nc > 0 ? yc * nt / nc : 0.0);
}

// Brute force for distinct scores: rank, recompute every prefix, trapezoid.
double qini_oracle(const std::vector<double>& s, const std::vector<double>& y,
                   const std::vector<bool>& treated) {
  const std::size_t n = s.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = prefix_gain(order, k, y, treated);
  double area = 0;
  for (std::size_t k = 1; k <= n; ++k) area += (g[k - 1] + g[k]) / 2;
  return (area - g[n] * n / 2.0) / (std::abs(g[n]) * n / 2.0);
}

BenchmarkConfig tiny_benchmark() {
  BenchmarkConfig cfg;
  cfg.dgp.n = 200;
  cfg.dgp.p_x = 6;
  cfg.dgp.p_u = 2;
  cfg.dgp.p_z = 2;
  cfg.dgp.seed = 3;
  cfg.reps = 2;
  cfg.gcf.num_trees = 5;
  cfg.gcf.split.min_node_size = 20;
  cfg.gcf.nuisance.forest.num_trees = 10;
  cfg.rf.num_trees = 10;
  cfg.n_test = 100;
  cfg.global_dr_grid = 10;
  return cfg;
}

}  // namespace

TEST(DrfValue, Examples) {
  EXPECT_NEAR(drf_value(DrfKind::kPoly, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(drf_value(DrfKind::kExp, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(drf_value(DrfKind::kPoly, 5.0), -10.0, 1e-12);
  EXPECT_NEAR(drf_value(DrfKind::kSinus, 0.0), 0.0, 1e-12);
}

TEST(DrfValue, MatchesHandDerivedFormulas) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    // poly expanded: 0.2 t^2 - 2 t + 5 - t - 5 = 0.2 t^2 - 3 t
    EXPECT_NEAR(drf_value(DrfKind::kPoly, t), 0.2 * t * t - 3.0 * t, 1e-9);
    // exp: log((t + 0.1 + e^t) / (11 (t + 0.1)))
    EXPECT_NEAR(drf_value(DrfKind::kExp, t),
                std::log((t + 0.1 + std::exp(t)) / (11.0 * (t + 0.1))), 1e-9);
    EXPECT_NEAR(drf_value(DrfKind::kSinus, t), 5.0 * std::sin(t) + t, 1e-12);
    EXPECT_NEAR(population_adrf(DrfKind::kPoly, t), 0.2 * t * t - 2.8 * t, 1e-9);
  }
}

TEST(Beta23Pdf, ModeAndSupport) {
  EXPECT_NEAR(beta23_pdf(1.0 / 3.0), 16.0 / 9.0, 1e-12);
  EXPECT_GT(beta23_pdf(1.0 / 3.0), beta23_pdf(0.33));
  EXPECT_GT(beta23_pdf(1.0 / 3.0), beta23_pdf(0.34));
  EXPECT_EQ(beta23_pdf(-0.1), 0.0);
  EXPECT_EQ(beta23_pdf(0.0), 0.0);
  EXPECT_EQ(beta23_pdf(1.0), 0.0);
  // integrates to one (midpoint rule)
  double total = 0.0;
  for (int i = 0; i < 100000; ++i) total += beta23_pdf((i + 0.5) / 100000.0) / 100000.0;
  EXPECT_NEAR(total, 1.0, 1e-8);
}

TEST(Generate, DeterministicPerSeed) {
  DgpConfig cfg;
  cfg.n = 300;
  cfg.seed = 42;
  const SimData a = generate(cfg);
  const SimData b = generate(cfg);
  EXPECT_TRUE(std::equal(a.dataset.covariates().begin(), a.dataset.covariates().end(),
                         b.dataset.covariates().begin()));
  EXPECT_TRUE(std::equal(a.dataset.treatments().begin(), a.dataset.treatments().end(),
                         b.dataset.treatments().begin()));
  EXPECT_TRUE(std::equal(a.dataset.outcomes().begin(), a.dataset.outcomes().end(),
                         b.dataset.outcomes().begin()));
  cfg.seed = 43;
  const SimData c = generate(cfg);
  EXPECT_NE(a.dataset.y(0), c.dataset.y(0));
}

TEST(Generate, ShapesAndTruthAtBaseline) {
  DgpConfig cfg;
  cfg.n = 500;
  cfg.seed = 2;
  const SimData s = generate(cfg);
  EXPECT_EQ(s.dataset.size(), 500u);
  EXPECT_EQ(s.dataset.num_covariates(), 50u);
  EXPECT_EQ(s.baseline, s.dataset.t_min());
  for (std::size_t i = 0; i < s.dataset.size(); ++i) {
    EXPECT_EQ(s.true_cate(i, s.baseline), 0.0);
    EXPECT_EQ(s.true_cate(i, 3.0, 3.0), 0.0);
    const auto x = s.dataset.x(i);
    EXPECT_NEAR(s.modifier[i], 0.2 * (x[0] * x[0] + x[3]), 1e-12);
    // uniform noise on [-1, 1] around the structural mean
    EXPECT_LE(std::abs(s.dataset.y(i) - s.true_outcome(i, s.dataset.t(i))), 1.0);
    // treatment stays within the link's range plus noise
    EXPECT_LE(s.dataset.t(i), 20.0 * 16.0 / 9.0 + 1.0);
  }
}

TEST(Generate, ExpKindIsFinite) {
  DgpConfig cfg;
  cfg.n = 1000;
  cfg.kind = DrfKind::kExp;
  cfg.seed = 5;
  const SimData s = generate(cfg);
  for (double y : s.dataset.outcomes()) EXPECT_TRUE(std::isfinite(y));
  EXPECT_GE(s.dataset.t_min(), 0.0);
}

TEST(Generate, RandomizedTestTreatmentsStayInRange) {
  DgpConfig cfg;
  cfg.n = 400;
  cfg.seed = 6;
  const SimData observed = generate(cfg);
  cfg.randomized_test_treatments = true;
  const SimData randomized = generate(cfg);
  EXPECT_GE(randomized.dataset.t_min(), observed.dataset.t_min());
  EXPECT_LE(randomized.dataset.t_max(), observed.dataset.t_max());
  for (std::size_t i = 0; i < randomized.dataset.size(); ++i) {
    EXPECT_LE(std::abs(randomized.dataset.y(i) -
                       randomized.true_outcome(i, randomized.dataset.t(i))),
              1.0);
  }
}

TEST(DgpConfig, Validation) {
  DgpConfig cfg;
  cfg.n = 1;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = {};
  cfg.p_x = 3;
  EXPECT_THROW(generate(cfg), ConfigError);
  EXPECT_THROW(parse_drf_kind("foo"), ConfigError);
  EXPECT_EQ(parse_drf_kind("sinus"), DrfKind::kSinus);
}

TEST(Metrics, PeheAndRmseExamples) {
  const std::vector<double> truth{0.0, 0.0};
  EXPECT_EQ(pehe(truth, truth), 0.0);
  EXPECT_EQ(rmse(truth, truth), 0.0);
  EXPECT_DOUBLE_EQ(pehe(std::vector<double>{1.0, -3.0}, truth), 2.0);
  EXPECT_NEAR(rmse(std::vector<double>{1.0, -3.0}, truth), 2.2360680, 1e-7);
  EXPECT_EQ(pehe(std::vector<double>{7.0}, std::vector<double>{0.0}), 7.0);
  EXPECT_DOUBLE_EQ(rmse(std::vector<double>{-2.5, 0.5, 1.5}, std::vector<double>{0.0, 3.0, 4.0}),
                   2.5);
  EXPECT_THROW(pehe(std::vector<double>{1.0}, truth), InvalidArgumentError);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), InvalidArgumentError);
}

TEST(Metrics, MaeNeverExceedsRms) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(1 + trial % 17);
    std::vector<double> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng);
    }
    EXPECT_LE(pehe(a, b), rmse(a, b) * (1 + 1e-12));
  }
}

TEST(Metrics, AdrfCurveOfConstantEvaluator) {
  const Dataset d = make_dataset(50, 2, 1, [](auto, auto&) { return 1.0; },
                                 [](double, auto, auto&) { return 0.0; });
  const std::vector<double> pts{0.0, 1.0, 2.0};
  const auto c = adrf_curve([](double, auto) { return 4.5; }, d, pts);
  EXPECT_EQ(c, (std::vector<double>{4.5, 4.5, 4.5}));
}

TEST(Metrics, AdrfCurveOfOracleMatchesTruth) {
  DgpConfig cfg;
  cfg.n = 300;
  cfg.seed = 4;
  const SimData s = generate(cfg);
  // row index recovered from the covariate pointer
  const double* base = s.dataset.covariates().data();
  const std::size_t p = s.dataset.num_covariates();
  const auto oracle = [&](double t, std::span<const double> x) {
    return s.true_outcome(static_cast<std::size_t>(x.data() - base) / p, t);
  };
  const std::vector<double> pts{1.0, 5.0, 12.0};
  const auto c = adrf_curve(oracle, s.dataset, pts);
  for (std::size_t g = 0; g < pts.size(); ++g) EXPECT_NEAR(c[g], s.adrf_truth(pts[g]), 1e-9);
}

TEST(Qini, HandInstance) {
  const std::vector<double> score{8, 7, 6, 5, 4, 3, 2, 1};
  const std::vector<bool> treated{true, false, true, false, true, false, true, false};
  const std::vector<double> y{10, 0, 8, 1, 2, 2, 1, 1};
  // g = 0, 10, 10, 18, 17, 18.5, 17, 17, 17; area 116; diagonal 68
  const auto curve = qini_curve(score, y, treated);
  const std::vector<double> expected_curve{0, 10, 10, 18, 17, 18.5, 17, 17, 17};
  for (std::size_t k = 0; k < curve.size(); ++k) EXPECT_NEAR(curve[k], expected_curve[k], 1e-12);
  EXPECT_NEAR(qini(score, y, treated), 48.0 / 68.0, 1e-12);
  std::vector<double> negated(score.size());
  for (std::size_t i = 0; i < score.size(); ++i) negated[i] = -score[i];
  EXPECT_NEAR(qini(negated, y, treated), -134.0 / 204.0, 1e-12);
}

TEST(Qini, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  int checked = 0;
  for (std::size_t n = 2; n <= 12; ++n) {
    std::vector<double> s(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = normal(rng);
      y[i] = normal(rng) + 1.0;
    }
    // every treatment assignment with both groups present
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<bool> treated(n);
      for (std::size_t i = 0; i < n; ++i) treated[i] = (mask >> i) & 1u;
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), std::size_t{0});
      if (prefix_gain(all, n, y, treated) == 0.0) continue;
      ASSERT_NEAR(qini(s, y, treated), qini_oracle(s, y, treated), 1e-9)
          << "n=" << n << " mask=" << mask;
      ++checked;
    }
  }
  EXPECT_GT(checked, 8000);
}

TEST(Qini, TiesAreInterpolatedBetweenBlockEnds) {
  const std::vector<double> s{3, 3, 3, 1, 1, 0};
  const std::vector<bool> treated{true, false, true, false, true, false};
  const std::vector<double> y{4, 1, 2, 0, 5, 1};
  const auto curve = qini_curve(s, y, treated);
  // block ends at k = 3 and 5 take the exact prefix gain
  const std::vector<std::size_t> order{0, 1, 2, 3, 4, 5};
  EXPECT_NEAR(curve[3], prefix_gain(order, 3, y, treated), 1e-12);
  EXPECT_NEAR(curve[5], prefix_gain(order, 5, y, treated), 1e-12);
  EXPECT_NEAR(curve[6], prefix_gain(order, 6, y, treated), 1e-12);
  EXPECT_NEAR(curve[1], curve[3] / 3.0, 1e-12);
  EXPECT_NEAR(curve[4], 0.5 * (curve[3] + curve[5]), 1e-12);
  // order inside a block does not matter
  const std::vector<double> s2{3, 3, 3, 1, 1, 0};
  const std::vector<bool> t2{false, true, true, true, false, false};
  const std::vector<double> y2{1, 4, 2, 5, 0, 1};
  EXPECT_NEAR(qini(s, y, treated), qini(s2, y2, t2), 1e-12);
}

TEST(Qini, EqualScoresIsRandomTargeting) {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(1.0, 1.0);
  const std::size_t n = 10000;
  std::vector<double> s(n, 0.0);
  std::vector<double> y(n);
  std::vector<bool> treated(n);
  for (std::size_t i = 0; i < n; ++i) {
    treated[i] = coin(rng);
    y[i] = normal(rng) + (treated[i] ? 1.0 : 0.0);
  }
  EXPECT_NEAR(qini(s, y, treated), 0.0, 0.02);
  // shuffled scores approximate the same diagonal
  for (std::size_t i = 0; i < n; ++i) s[i] = normal(rng);
  EXPECT_NEAR(qini(s, y, treated), 0.0, 0.05);
}

TEST(Qini, Errors) {
  const std::vector<double> s{1, 2};
  const std::vector<double> y{1, 2};
  EXPECT_THROW(qini(s, y, {true, true}), InvalidArgumentError);
  EXPECT_THROW(qini(s, y, {true}), InvalidArgumentError);
  // zero total gain has no normalization
  EXPECT_THROW(qini(s, std::vector<double>{1, 1}, {true, false}), InvalidArgumentError);
}

TEST(Summary, MeanSeAndQuantile) {
  const std::vector<double> v{1, 2, 3};
  const Summary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_NEAR(s.se, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_TRUE(std::isnan(summarize(std::vector<double>{4.0}).se));
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.025), 1.075);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({5}, 0.3), 5.0);
}

TEST(Summary, IntegratedAbsError) {
  const std::vector<double> pts{0, 1, 2};
  EXPECT_DOUBLE_EQ(integrated_abs_error(pts, std::vector<double>{0, 1, 2},
                                        std::vector<double>{0, 0, 0}),
                   2.0);
  EXPECT_DOUBLE_EQ(integrated_abs_error(pts, std::vector<double>{1, 1, 1},
                                        std::vector<double>{1, 1, 1}),
                   0.0);
}

TEST(BaselineRf, ConstantOutcomeHasZeroCate) {
  const Dataset d = make_dataset(300, 3, 1, [](auto x, auto&) { return 2.0 + x[0]; },
                                 [](double, auto, auto&) { return 3.0; });
  const TreatmentGrid grid = treatment_grid(d, 5, d.t_min());
  const RfBaseline rf = baseline_rf(d, grid, ForestParams{.num_trees = 20});
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(rf.cate(d.x(i), d.t(i)), 0.0);
    EXPECT_EQ(rf.outcome(d.t(i), d.x(i)), 3.0);
  }
}

TEST(BaselineRf, IdentityOutcomeRecoversShift) {
  const Dataset d = make_dataset(
      3000, 2, 2,
      [](auto, auto& rng) { return std::uniform_real_distribution<double>(0.0, 10.0)(rng); },
      [](double t, auto, auto&) { return t; });
  const TreatmentGrid grid = treatment_grid(d, 5, d.t_min());
  ForestParams params{.num_trees = 50, .min_node_size = 5, .mtry = -1, .seed = 3};
  const RfBaseline rf = baseline_rf(d, grid, params);
  EXPECT_EQ(rf.baseline(), grid.baseline());
  for (double t : {2.0, 5.0, 8.0}) {
    EXPECT_NEAR(rf.cate(d.x(0), t), t - grid.baseline(), 0.5);
  }
  const RfBaseline again = baseline_rf(d, grid, params);
  EXPECT_EQ(again.cate(d.x(1), 4.0), rf.cate(d.x(1), 4.0));
}

TEST(BaselineGlobalDr, EqualsRootNodeDrf) {
  const Dataset d = make_dataset(
      400, 2, 3, [](auto x, auto& rng) { return 4 + x[0] + std::normal_distribution<double>()(rng); },
      [](double t, auto x, auto& rng) { return t * x[1] + std::normal_distribution<double>()(rng); });
  const FunctionNuisance nuisance([](double t, auto x) { return 0.8 * t * x[1]; },
                                  [](double, auto) { return 0.2; });
  const TreatmentGrid grid = treatment_grid(d, 7, d.t_min());
  const KernelSpec spec(KernelFamily::kGaussian, 0.6);
  for (DrOptions o : {DrOptions{}, DrOptions{DrResidual::kGrid, DrWeights::kRaw}}) {
    const DrfCurve global = baseline_global_dr(d, grid, nuisance, spec, o);
    const DrfCurve root = node_drf(d, iota_rows(d.size()), grid, nuisance, spec, d.t_range(), o);
    for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_NEAR(global.values[g], root.values[g], 1e-10);
  }
}

TEST(BaselineGlobalDr, NoiselessOracleOutcomeIsExact) {
  const auto mu = [](double t, std::span<const double> x) { return std::sin(t) + t * x[0]; };
  const Dataset d = make_dataset(
      500, 2, 4, [](auto x, auto& rng) { return 3 + x[1] + std::normal_distribution<double>()(rng); },
      [&](double t, auto x, auto&) { return mu(t, x); });
  const FunctionNuisance nuisance(mu, [](double, auto) { return 0.01; });
  const TreatmentGrid grid = treatment_grid(d, 9, d.t_min());
  const DrfCurve c = baseline_global_dr(d, grid, nuisance, KernelSpec(KernelFamily::kGaussian, 0.4));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double truth = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) truth += mu(grid.points[g], d.x(i));
    EXPECT_NEAR(c.values[g], truth / static_cast<double>(d.size()), 1e-9);
  }
}

TEST(Method, Parsing) {
  EXPECT_EQ(parse_method("global_dr"), Method::kGlobalDr);
  EXPECT_EQ(method_name(Method::kOracle), "oracle");
  try {
    parse_method("cf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("gcf"), std::string::npos);
  }
}

TEST(RunBenchmark, SmallRunShapes) {
  BenchmarkConfig cfg = tiny_benchmark();
  const BenchmarkReport r = run_benchmark(cfg);
  ASSERT_EQ(r.rep_seeds.size(), 2u);
  EXPECT_EQ(r.rep_seeds[0], 3u);
  EXPECT_EQ(r.rep_seeds[1], 4u);
  EXPECT_EQ(r.adrf_points.size(), 10u);
  EXPECT_DOUBLE_EQ(r.adrf_points.front(), 1.0);
  EXPECT_DOUBLE_EQ(r.adrf_points.back(), 20.0);
  for (std::size_t k = 0; k < r.adrf_points.size(); ++k) {
    EXPECT_NEAR(r.adrf_truth[k], population_adrf(DrfKind::kPoly, r.adrf_points[k]), 1e-12);
  }
  ASSERT_EQ(r.results.size(), 4u);
  for (const MethodResult& m : r.results) {
    EXPECT_EQ(m.pehe.size(), 2u);
    EXPECT_EQ(m.adrf.size(), 2u);
    for (double v : m.pehe) EXPECT_TRUE(std::isfinite(v));
  }
  for (double v : r.result(Method::kOracle).pehe) EXPECT_EQ(v, 0.0);
  for (double v : r.result(Method::kOracle).rmse) EXPECT_EQ(v, 0.0);

  std::ostringstream report;
  write_report_csv(r, report);
  EXPECT_EQ(report.str().substr(0, report.str().find('\n')), "method,metric,mean,se,reps");
  std::ostringstream adrf;
  write_adrf_csv(r, adrf);
  EXPECT_EQ(adrf.str().substr(0, adrf.str().find('\n')), "method,t,truth,median,q025,q975");

  // same config, same numbers, regardless of execution mode
  const BenchmarkReport serial = run_benchmark(cfg, Exec::kSerial);
  EXPECT_EQ(serial.result(Method::kGcf).pehe, r.result(Method::kGcf).pehe);
  EXPECT_EQ(serial.result(Method::kRf).rmse, r.result(Method::kRf).rmse);
}

TEST(RunBenchmark, SingleRepLeavesSeEmpty) {
  BenchmarkConfig cfg = tiny_benchmark();
  cfg.reps = 1;
  cfg.methods = {Method::kOracle};
  const BenchmarkReport r = run_benchmark(cfg);
  std::ostringstream out;
  write_report_csv(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind("oracle,", 0), 0u);
    EXPECT_NE(line.find(",,1"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 2);
}

TEST(RunBenchmark, ConfigValidation) {
  BenchmarkConfig cfg = tiny_benchmark();
  cfg.reps = 0;
  EXPECT_THROW(run_benchmark(cfg), ConfigError);
  cfg = tiny_benchmark();
  cfg.methods.clear();
  EXPECT_THROW(run_benchmark(cfg), ConfigError);
}
