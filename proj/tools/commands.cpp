#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "gcf/csv.hpp"
#include "gcf/error.hpp"
#include "gcf/metrics.hpp"

namespace gcf::cli {
namespace {

namespace fs = std::filesystem;

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

constexpr const char* kThetaPrefix = "theta_";

}  // namespace

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const DgpConfig dgp = cfg.dgp();
  const SimData sim = generate(dgp);
  const fs::path dir = prepare_out_dir(cfg);
  write_csv(sim.dataset, dir / "data.csv");

  const fs::path truth_path = dir / "truth.csv";
  std::ofstream out = open_output(truth_path);
  out << "row_id,t,theta\n";
  for (std::size_t i = 0; i < sim.dataset.size(); ++i) {
    const double t = sim.dataset.t(i);
    out << i << ',' << format_double(t) << ',' << format_double(sim.true_cate(i, t)) << '\n';
  }
  finish(out, truth_path);
  log << "simulate: " << sim.dataset.size() << " rows, kind " << drf_kind_name(dgp.kind)
      << ", t in [" << format_double(sim.dataset.t_min()) << ", "
      << format_double(sim.dataset.t_max()) << "]\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const fs::path data_path = cfg.get("data");
  if (!fs::exists(data_path)) throw IoError("input file '" + data_path.string() + "' not found");
  const Dataset data = load_csv(data_path, cfg.schema());
  const GcfParams params = cfg.gcf();
  const GcfModel model = train(data, params);

  const fs::path dir = prepare_out_dir(cfg);
  save_model(model, dir / "model.json");

  int depth_min = 0;
  int depth_max = 0;
  double depth_sum = 0.0;
  double leaves_sum = 0.0;
  for (std::size_t b = 0; b < model.trees().size(); ++b) {
    const int d = model.trees()[b].depth();
    depth_min = b == 0 ? d : std::min(depth_min, d);
    depth_max = std::max(depth_max, d);
    depth_sum += d;
    leaves_sum += static_cast<double>(model.trees()[b].num_leaves());
  }
  const auto trees = static_cast<double>(model.trees().size());

  const fs::path summary_path = dir / "train_summary.csv";
  std::ofstream out = open_output(summary_path);
  out << "key,value\n"
      << "rows," << data.size() << '\n'
      << "covariates," << data.num_covariates() << '\n'
      << "trees," << model.trees().size() << '\n'
      << "depth_min," << depth_min << '\n'
      << "depth_mean," << format_double(depth_sum / trees) << '\n'
      << "depth_max," << depth_max << '\n'
      << "leaves_mean," << format_double(leaves_sum / trees) << '\n'
      << "t_min," << format_double(model.t_range().lo) << '\n'
      << "t_max," << format_double(model.t_range().hi) << '\n'
      << "baseline," << format_double(model.grid().baseline()) << '\n'
      << "kernel," << kernel_family_name(model.kernel().family()) << '\n'
      << "bandwidth," << format_double(model.kernel().bandwidth()) << '\n';
  finish(out, summary_path);
  log << "train: " << model.trees().size() << " trees, depth " << depth_min << ".." << depth_max
      << ", t in [" << format_double(model.t_range().lo) << ", "
      << format_double(model.t_range().hi) << "]\n";
}

void cmd_predict(const RunConfig& cfg, std::ostream& log) {
  const GcfModel model = load_model(cfg.get("model"));
  const CsvTable table = read_csv_table(cfg.get("data"));
  std::vector<std::size_t> columns;
  for (const auto& name : model.covariate_names()) columns.push_back(table.require(name));
  const auto t_col = table.find(cfg.get("treatment"));

  const TreatmentGrid& grid = model.grid();
  const fs::path dir = prepare_out_dir(cfg);
  const fs::path path = dir / "predictions.csv";
  std::ofstream out = open_output(path);
  out << "row_id";
  if (t_col) out << ",t,theta_at_t";
  for (double t : grid.points) out << ',' << kThetaPrefix << format_double(t);
  out << '\n';

  const TreatmentRange range = model.t_range();
  std::vector<double> x(columns.size());
  for (std::size_t i = 0; i < table.num_rows(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) x[j] = table.at(i, columns[j]);
    const CateCurve curve = predict_curve(model, x);
    out << i;
    if (t_col) {
      const double t = table.at(i, *t_col);
      const double theta = interpolate_curve(grid, curve.values, std::clamp(t, range.lo, range.hi));
      out << ',' << format_double(t) << ',' << format_double(theta);
    }
    for (double v : curve.values) out << ',' << format_double(v);
    out << '\n';
  }
  finish(out, path);
  log << "predict: " << table.num_rows() << " rows, " << grid.size() << " grid points\n";
}

void cmd_benchmark(const RunConfig& cfg, std::ostream& log) {
  const BenchmarkConfig bench = cfg.benchmark();
  const fs::path dir = prepare_out_dir(cfg);
  for (std::size_t r = 0; r < bench.reps; ++r) {
    log << "benchmark: rep " << r << " seed " << bench.dgp.seed + r << '\n';
  }
  const BenchmarkReport report = run_benchmark(bench);

  const fs::path report_path = dir / "report.csv";
  std::ofstream report_out = open_output(report_path);
  write_report_csv(report, report_out);
  finish(report_out, report_path);

  const fs::path adrf_path = dir / "adrf.csv";
  std::ofstream adrf_out = open_output(adrf_path);
  write_adrf_csv(report, adrf_out);
  finish(adrf_out, adrf_path);

  const fs::path seeds_path = dir / "seeds.csv";
  std::ofstream seeds_out = open_output(seeds_path);
  seeds_out << "rep,seed\n";
  for (std::size_t r = 0; r < report.rep_seeds.size(); ++r) {
    seeds_out << r << ',' << report.rep_seeds[r] << '\n';
  }
  finish(seeds_out, seeds_path);

  for (const auto& result : report.results) {
    const Summary s = summarize(result.pehe);
    log << "benchmark: " << method_name(result.method) << " mean PEHE "
        << format_double(s.mean) << '\n';
  }
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const CsvTable pred = read_csv_table(cfg.get("predictions"));
  const CsvTable truth = read_csv_table(cfg.get("truth"));
  if (pred.num_rows() != truth.num_rows()) {
    throw InvalidArgumentError("predictions have " + std::to_string(pred.num_rows()) +
                               " rows but truth has " + std::to_string(truth.num_rows()));
  }
  const std::vector<double> theta_hat = pred.column(pred.require("theta_at_t"));
  const std::vector<double> theta = truth.column(truth.require("theta"));
  const auto pred_ids = pred.column(pred.require("row_id"));
  const auto truth_ids = truth.column(truth.require("row_id"));
  if (pred_ids != truth_ids) throw InvalidArgumentError("row_id columns do not match");

  const fs::path dir = prepare_out_dir(cfg);
  const fs::path path = dir / "metrics.csv";
  std::ofstream out = open_output(path);
  out << "metric,threshold,value\n";
  out << "pehe,," << format_double(pehe(theta_hat, theta)) << '\n';
  out << "rmse,," << format_double(rmse(theta_hat, theta)) << '\n';

  // Qini per treatment threshold tau: treated = T >= tau, scored by the
  // predicted effect at tau. Needs outcomes from the dataset.
  std::size_t thresholds = 0;
  if (!cfg.get("data").empty()) {
    const CsvTable data = read_csv_table(cfg.get("data"));
    if (data.num_rows() != pred.num_rows()) {
      throw InvalidArgumentError("data has " + std::to_string(data.num_rows()) +
                                 " rows but predictions have " +
                                 std::to_string(pred.num_rows()));
    }
    const auto y = data.column(data.require(cfg.get("outcome")));
    const auto t = data.column(data.require(cfg.get("treatment")));
    const std::string prefix = kThetaPrefix;
    std::vector<std::size_t> grid_cols;
    for (std::size_t c = 0; c < pred.num_columns(); ++c) {
      if (pred.header[c].rfind(prefix, 0) == 0 && pred.header[c] != "theta_at_t") {
        grid_cols.push_back(c);
      }
    }
    // interior grid points only: the ends leave one arm empty
    for (std::size_t k = 1; k + 1 < grid_cols.size(); ++k) {
      const std::string label = pred.header[grid_cols[k]].substr(prefix.size());
      const double tau = std::stod(label);
      std::vector<bool> treated(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) treated[i] = t[i] >= tau;
      const auto scores = pred.column(grid_cols[k]);
      out << "qini," << label << ',' << format_double(qini(scores, y, treated)) << '\n';
      ++thresholds;
    }
  }
  finish(out, path);
  log << "evaluate: " << pred.num_rows() << " rows, " << thresholds << " qini thresholds\n";
}

}  // namespace gcf::cli
