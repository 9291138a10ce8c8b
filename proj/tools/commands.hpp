#pragma once

#include <iosfwd>

#include "config.hpp"

namespace gcf::cli {

// Each command writes its files under cfg.out_dir() and throws gcf::Error on
// failure. `log` receives progress lines.

// data.csv and truth.csv (row_id,t,theta).
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
// model.json and train_summary.csv.
void cmd_train(const RunConfig& cfg, std::ostream& log);
// predictions.csv (row_id,t,theta_at_t,theta_<grid t>...).
void cmd_predict(const RunConfig& cfg, std::ostream& log);
// report.csv, adrf.csv and seeds.csv.
void cmd_benchmark(const RunConfig& cfg, std::ostream& log);
// metrics.csv (metric,threshold,value).
void cmd_evaluate(const RunConfig& cfg, std::ostream& log);

}  // namespace gcf::cli
