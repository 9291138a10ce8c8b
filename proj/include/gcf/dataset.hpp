#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gcf {

struct TreatmentRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double t) const { return t >= lo && t <= hi; }
};

struct Sample {
  std::vector<double> x;
  double t = 0.0;
  double y = 0.0;
};

// Which CSV columns hold the outcome, the treatment and the covariates.
// An empty covariate list means "all remaining columns" in file order.
struct Schema {
  std::string outcome = "y";
  std::string treatment = "t";
  std::vector<std::string> covariates;
};

// Immutable columnar store of (X, T, Y). Covariates are row-major.
class Dataset {
 public:
  Dataset(std::vector<std::string> covariate_names, std::vector<double> x,
          std::vector<double> t, std::vector<double> y,
          std::string outcome_name = "y", std::string treatment_name = "t");

  std::size_t size() const { return t_.size(); }
  std::size_t num_covariates() const { return names_.size(); }

  std::span<const double> x(std::size_t row) const {
    return {x_.data() + row * names_.size(), names_.size()};
  }
  double x(std::size_t row, std::size_t col) const {
    return x_[row * names_.size() + col];
  }
  double t(std::size_t row) const { return t_[row]; }
  double y(std::size_t row) const { return y_[row]; }
  std::span<const double> treatments() const { return t_; }
  std::span<const double> outcomes() const { return y_; }
  std::span<const double> covariates() const { return x_; }

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  TreatmentRange t_range() const { return {t_min_, t_max_}; }

  const std::vector<std::string>& covariate_names() const { return names_; }
  const std::string& outcome_name() const { return outcome_name_; }
  const std::string& treatment_name() const { return treatment_name_; }

  Sample sample(std::size_t row) const;
  // Copies the given rows, in order, into a new dataset.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> x_;
  std::vector<double> t_;
  std::vector<double> y_;
  std::string outcome_name_;
  std::string treatment_name_;
  double t_min_ = 0.0;
  double t_max_ = 0.0;
};

// Read-only view restricted to a fixed set of rows. Nuisance fitting only
// receives one of these, so it cannot address rows outside the view.
class RowView {
 public:
  RowView(const Dataset& data, std::vector<std::size_t> rows);

  std::size_t size() const { return rows_.size(); }
  std::size_t num_covariates() const { return data_->num_covariates(); }
  std::span<const double> x(std::size_t i) const { return data_->x(rows_[i]); }
  double t(std::size_t i) const { return data_->t(rows_[i]); }
  double y(std::size_t i) const { return data_->y(rows_[i]); }

 private:
  const Dataset* data_;
  std::vector<std::size_t> rows_;
};

Dataset load_csv(const std::filesystem::path& path, const Schema& schema = {});
// Writes outcome, treatment, then covariates using round-trip formatting.
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct HonestSplit {
  std::vector<std::size_t> omega1;  // structure half, sorted
  std::vector<std::size_t> omega2;  // estimation half, sorted
  double fraction = 0.5;
};

HonestSplit honest_split(const Dataset& data, double fraction,
                         std::uint64_t seed);
HonestSplit honest_split(std::size_t n, double fraction, std::uint64_t seed);

struct TreatmentGrid {
  std::vector<double> points;
  std::size_t baseline_index = 0;

  std::size_t size() const { return points.size(); }
  double baseline() const { return points[baseline_index]; }
  double front() const { return points.front(); }
  double back() const { return points.back(); }
};

TreatmentGrid treatment_grid(double t_min, double t_max, std::size_t g,
                             double baseline);
TreatmentGrid treatment_grid(const Dataset& data, std::size_t g,
                             double baseline);

}  // namespace gcf
