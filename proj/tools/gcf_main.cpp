#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "gcf/error.hpp"
#include "gcf/parallel.hpp"

namespace {

using Command = void (*)(const gcf::cli::RunConfig&, std::ostream&);

int run(const Command command, const std::string& config_path,
        const std::vector<std::string>& overrides, const std::string& seed,
        const std::string& threads, const std::string& out_dir) {
  gcf::cli::RunConfig cfg;
  if (!config_path.empty()) cfg.load_file(config_path);
  for (const auto& o : overrides) cfg.apply_override(o);
  if (!seed.empty()) cfg.set("seed", seed);
  if (!threads.empty()) cfg.set("threads", threads);
  if (!out_dir.empty()) cfg.set("out_dir", out_dir);
  gcf::set_num_threads(static_cast<int>(cfg.get_int("threads")));
  command(cfg, std::cerr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized causal forest for continuous treatments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string threads;
  std::string out_dir;
  Command command = nullptr;

  const std::vector<std::pair<const char*, Command>> commands = {
      {"simulate", gcf::cli::cmd_simulate},   {"train", gcf::cli::cmd_train},
      {"predict", gcf::cli::cmd_predict},     {"benchmark", gcf::cli::cmd_benchmark},
      {"evaluate", gcf::cli::cmd_evaluate},
  };
  const std::vector<std::string> help = {
      "Write a synthetic dataset and its true effects",
      "Fit a forest and write the model file",
      "Predict effect curves for every row of a CSV",
      "Repeat simulate/fit/score and summarise per method",
      "Score predictions against a truth file",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--set", overrides, "override one key (key=value), repeatable");
    sub->add_option("--seed", seed, "base random seed");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->callback([&command, fn = commands[i].second] { command = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "gcf: error: " << e.what() << '\n';
    return static_cast<int>(gcf::ErrorKind::kConfig);
  }

  try {
    return run(command, config_path, overrides, seed, threads, out_dir);
  } catch (const gcf::Error& e) {
    std::cerr << "gcf: error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gcf: error: " << e.what() << '\n';
    return 1;
  }
}
