#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gcf/benchmark.hpp"
#include "gcf/dataset.hpp"
#include "gcf/dgp.hpp"
#include "gcf/forest.hpp"

namespace gcf::cli {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every recognised key with its default. Commands read the subset they need.
const std::vector<ConfigKey>& config_keys();

// Flat key=value settings. Lines starting with '#' and blank lines are
// ignored; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  void load_file(const std::filesystem::path& path);
  void parse(std::string_view text, const std::string& source_name);
  void set(const std::string& key, const std::string& value);
  // "key=value"
  void apply_override(std::string_view assignment);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::filesystem::path out_dir() const { return get("out_dir"); }

  DgpConfig dgp() const;
  GcfParams gcf() const;
  Schema schema() const;
  BenchmarkConfig benchmark() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gcf::cli
