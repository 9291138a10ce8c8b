#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "gcf/dataset.hpp"

namespace gcf {

enum class DrfKind { kPoly, kExp, kSinus };
enum class NoiseKind { kUniform, kGaussian };

DrfKind parse_drf_kind(std::string_view name);
std::string_view drf_kind_name(DrfKind kind);
NoiseKind parse_noise_kind(std::string_view name);
std::string_view noise_kind_name(NoiseKind kind);

// Population dose-response curves:
//   poly:  0.2 (t - 5)^2 - t - 5
//   exp:   log(1 + exp(t) / (t + 0.1)) - log(11)     (t >= 0)
//   sinus: 5 sin(t) + t
double drf_value(DrfKind kind, double t);

// Beta(2, 3) density on [0, 1]: 12 q (1 - q)^2.
double beta23_pdf(double q);

struct DgpConfig {
  std::size_t n = 1000;
  std::size_t p_x = 50;
  std::size_t p_u = 5;
  std::size_t p_z = 5;
  DrfKind kind = DrfKind::kPoly;
  NoiseKind noise = NoiseKind::kUniform;
  double sparsity = 0.5;  // probability that a coefficient is zeroed
  std::uint64_t seed = 0;
  bool randomized_test_treatments = false;

  void validate() const;
};

// Coefficients of one synthetic population:
//   Y = mu(T) + 0.2 (X1^2 + X4) T + X b_x + U b_u + eps
//   T = 20 * Beta23pdf(sigmoid(X b*_x + Z b_z)) + nu
// X1 and X4 are the first and fourth confounders (columns 0 and 3). For the
// exp curve, whose formula needs t >= 0, negative treatments are reflected.
class Dgp {
 public:
  static Dgp draw(const DgpConfig& cfg, std::mt19937_64& rng);

  const DgpConfig& config() const { return cfg_; }
  double effect_modifier(std::span<const double> x) const;
  // E[Y | T = t, X = x, U = u] without the additive noise.
  double conditional_mean(double t, std::span<const double> x,
                          std::span<const double> u) const;
  double treatment_index(std::span<const double> x, std::span<const double> z) const;
  double treatment_mean(std::span<const double> x, std::span<const double> z) const;
  double draw_noise(std::mt19937_64& rng) const;
  double finalize_treatment(double t) const;

  std::span<const double> beta_x() const { return beta_x_; }
  std::span<const double> beta_x_star() const { return beta_x_star_; }
  std::span<const double> beta_u() const { return beta_u_; }
  std::span<const double> beta_z() const { return beta_z_; }

 private:
  DgpConfig cfg_;
  std::vector<double> beta_x_;
  std::vector<double> beta_x_star_;
  std::vector<double> beta_u_;
  std::vector<double> beta_z_;
};

// One generated sample with its ground truth. Only X, T and Y enter the
// dataset; U is kept for the oracle.
struct SimData {
  Dataset dataset;
  Dgp dgp;
  std::vector<double> u;       // row-major n x p_u
  std::vector<double> level;   // X b_x + U b_u per row
  std::vector<double> modifier;  // 0.2 (X1^2 + X4) per row
  double baseline = 0.0;       // t0 for the CATE truth; defaults to t_min

  // theta_i(t) = mu(t) - mu(t0) + modifier_i (t - t0)
  double true_cate(std::size_t row, double t) const;
  double true_cate(std::size_t row, double t, double t0) const;
  // E[Y | T = t, row], noise-free.
  double true_outcome(std::size_t row, double t) const;
  // Mean over rows of true_outcome(row, t).
  double adrf_truth(double t) const;
};

SimData generate(const DgpConfig& cfg);

// Samples `n` rows from an existing population. When `treatment_range` is
// given, treatments are drawn uniformly on it instead of from the treatment
// equation (the outcome is regenerated accordingly).
SimData sample_population(const Dgp& dgp, std::size_t n, std::mt19937_64& rng,
                          const TreatmentRange* treatment_range = nullptr);

// Population ADRF: mu(t) + 0.2 t, since E[X1^2 + X4] = 1 and the linear
// terms have mean zero.
double population_adrf(DrfKind kind, double t);

}  // namespace gcf
