#include "gcf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "gcf/csv.hpp"
#include "gcf/error.hpp"

namespace gcf {

Dataset::Dataset(std::vector<std::string> covariate_names, std::vector<double> x,
                 std::vector<double> t, std::vector<double> y,
                 std::string outcome_name, std::string treatment_name)
    : names_(std::move(covariate_names)),
      x_(std::move(x)),
      t_(std::move(t)),
      y_(std::move(y)),
      outcome_name_(std::move(outcome_name)),
      treatment_name_(std::move(treatment_name)) {
  if (t_.empty()) throw EmptyDatasetError("dataset has no rows");
  if (names_.empty()) throw SchemaError("dataset needs at least one covariate");
  if (y_.size() != t_.size() || x_.size() != t_.size() * names_.size()) {
    throw InvalidArgumentError("dataset column lengths disagree");
  }
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(y_[i])) {
      throw ParseError("non-finite treatment or outcome at row " +
                       std::to_string(i + 1));
    }
  }
  for (double v : x_) {
    if (!std::isfinite(v)) throw ParseError("non-finite covariate value");
  }
  const auto [lo, hi] = std::minmax_element(t_.begin(), t_.end());
  t_min_ = *lo;
  t_max_ = *hi;
}

Sample Dataset::sample(std::size_t row) const {
  const auto xs = x(row);
  return Sample{{xs.begin(), xs.end()}, t_[row], y_[row]};
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const std::size_t p = names_.size();
  std::vector<double> x;
  std::vector<double> t;
  std::vector<double> y;
  x.reserve(rows.size() * p);
  t.reserve(rows.size());
  y.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto xs = this->x(r);
    x.insert(x.end(), xs.begin(), xs.end());
    t.push_back(t_[r]);
    y.push_back(y_[r]);
  }
  return Dataset(names_, std::move(x), std::move(t), std::move(y),
                 outcome_name_, treatment_name_);
}

RowView::RowView(const Dataset& data, std::vector<std::size_t> rows)
    : data_(&data), rows_(std::move(rows)) {
  for (std::size_t r : rows_) {
    if (r >= data.size()) throw InvalidArgumentError("row view index out of range");
  }
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  const CsvTable table = read_csv_table(path);
  const std::size_t y_col = table.require(schema.outcome);
  const std::size_t t_col = table.require(schema.treatment);
  if (y_col == t_col) {
    throw SchemaError("outcome and treatment name the same column");
  }

  std::vector<std::size_t> x_cols;
  std::vector<std::string> names;
  if (schema.covariates.empty()) {
    for (std::size_t c = 0; c < table.num_columns(); ++c) {
      if (c == y_col || c == t_col) continue;
      x_cols.push_back(c);
      names.push_back(table.header[c]);
    }
  } else {
    for (const auto& name : schema.covariates) {
      x_cols.push_back(table.require(name));
      names.push_back(name);
    }
  }
  if (x_cols.empty()) throw SchemaError("no covariate columns");

  const std::size_t n = table.num_rows();
  std::vector<double> x;
  x.reserve(n * x_cols.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c : x_cols) x.push_back(table.at(r, c));
  }
  return Dataset(std::move(names), std::move(x), table.column(t_col),
                 table.column(y_col), schema.outcome, schema.treatment);
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << data.outcome_name() << ',' << data.treatment_name();
  for (const auto& name : data.covariate_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(data.y(i)) << ',' << format_double(data.t(i));
    for (double v : data.x(i)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

HonestSplit honest_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("honesty fraction must lie in (0, 1)");
  }
  if (n < 2) throw ConfigError("honest split needs at least 2 rows");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);

  HonestSplit split;
  split.fraction = fraction;
  split.omega1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  split.omega2.assign(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());
  std::sort(split.omega1.begin(), split.omega1.end());
  std::sort(split.omega2.begin(), split.omega2.end());
  return split;
}

HonestSplit honest_split(const Dataset& data, double fraction,
                         std::uint64_t seed) {
  return honest_split(data.size(), fraction, seed);
}

TreatmentGrid treatment_grid(double t_min, double t_max, std::size_t g,
                             double baseline) {
  if (g < 2) throw ConfigError("treatment grid needs at least 2 points");
  if (!(t_min < t_max)) {
    throw ConfigError("treatment range is degenerate (t_min == t_max)");
  }
  if (baseline < t_min || baseline > t_max) {
    throw ConfigError("baseline treatment lies outside the observed range");
  }
  TreatmentGrid grid;
  grid.points.resize(g);
  const double step = (t_max - t_min) / static_cast<double>(g - 1);
  for (std::size_t i = 0; i < g; ++i) {
    grid.points[i] = t_min + step * static_cast<double>(i);
  }
  grid.points.back() = t_max;

  std::size_t best = 0;
  for (std::size_t i = 1; i < g; ++i) {
    if (std::abs(grid.points[i] - baseline) <
        std::abs(grid.points[best] - baseline)) {
      best = i;
    }
  }
  grid.baseline_index = best;
  return grid;
}

TreatmentGrid treatment_grid(const Dataset& data, std::size_t g,
                             double baseline) {
  return treatment_grid(data.t_min(), data.t_max(), g, baseline);
}

}  // namespace gcf
