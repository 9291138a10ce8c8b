#include "gcf/dgp.hpp"

#include <cmath>
#include <string>

#include "gcf/error.hpp"

namespace gcf {
namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> draw_coefficients(std::size_t p, double sparsity,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::bernoulli_distribution zero(sparsity);
  std::vector<double> beta(p);
  for (auto& b : beta) {
    const double v = coef(rng);
    b = zero(rng) ? 0.0 : v;
  }
  return beta;
}

std::vector<std::string> covariate_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  return names;
}

}  // namespace

DrfKind parse_drf_kind(std::string_view name) {
  if (name == "poly") return DrfKind::kPoly;
  if (name == "exp") return DrfKind::kExp;
  if (name == "sinus") return DrfKind::kSinus;
  throw ConfigError("unknown DRF kind '" + std::string(name) +
                    "' (valid kinds: poly, exp, sinus)");
}

std::string_view drf_kind_name(DrfKind kind) {
  switch (kind) {
    case DrfKind::kPoly:
      return "poly";
    case DrfKind::kExp:
      return "exp";
    case DrfKind::kSinus:
      return "sinus";
  }
  return "poly";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "uniform") return NoiseKind::kUniform;
  if (name == "gaussian") return NoiseKind::kGaussian;
  throw ConfigError("unknown noise kind '" + std::string(name) +
                    "' (valid kinds: uniform, gaussian)");
}

std::string_view noise_kind_name(NoiseKind kind) {
  return kind == NoiseKind::kUniform ? "uniform" : "gaussian";
}

double drf_value(DrfKind kind, double t) {
  switch (kind) {
    case DrfKind::kPoly:
      return 0.2 * (t - 5.0) * (t - 5.0) - t - 5.0;
    case DrfKind::kExp:
      return std::log(1.0 + std::exp(t) / (t + 0.1)) - std::log(11.0);
    case DrfKind::kSinus:
      return 5.0 * std::sin(t) + t;
  }
  return 0.0;
}

double beta23_pdf(double q) {
  if (q < 0.0 || q > 1.0) return 0.0;
  return 12.0 * q * (1.0 - q) * (1.0 - q);
}

double population_adrf(DrfKind kind, double t) { return drf_value(kind, t) + 0.2 * t; }

void DgpConfig::validate() const {
  if (n < 2) throw ConfigError("n must be >= 2");
  if (p_x < 4) throw ConfigError("p_x must be >= 4 (the effect modifier uses X4)");
  if (p_u < 1 || p_z < 1) throw ConfigError("p_u and p_z must be >= 1");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must lie in [0, 1)");
}

Dgp Dgp::draw(const DgpConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  Dgp dgp;
  dgp.cfg_ = cfg;
  dgp.beta_x_ = draw_coefficients(cfg.p_x, cfg.sparsity, rng);
  dgp.beta_x_star_ = draw_coefficients(cfg.p_x, cfg.sparsity, rng);
  dgp.beta_u_ = draw_coefficients(cfg.p_u, cfg.sparsity, rng);
  dgp.beta_z_ = draw_coefficients(cfg.p_z, cfg.sparsity, rng);
  return dgp;
}

double Dgp::effect_modifier(std::span<const double> x) const {
  return 0.2 * (x[0] * x[0] + x[3]);
}

double Dgp::conditional_mean(double t, std::span<const double> x,
                             std::span<const double> u) const {
  return drf_value(cfg_.kind, t) + effect_modifier(x) * t + dot(x, beta_x_) +
         dot(u, beta_u_);
}

double Dgp::treatment_index(std::span<const double> x, std::span<const double> z) const {
  return dot(x, beta_x_star_) + dot(z, beta_z_);
}

double Dgp::treatment_mean(std::span<const double> x, std::span<const double> z) const {
  return 20.0 * beta23_pdf(sigmoid(treatment_index(x, z)));
}

double Dgp::draw_noise(std::mt19937_64& rng) const {
  if (cfg_.noise == NoiseKind::kUniform) {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

double Dgp::finalize_treatment(double t) const {
  return cfg_.kind == DrfKind::kExp ? std::abs(t) : t;
}

double SimData::true_cate(std::size_t row, double t) const {
  return true_cate(row, t, baseline);
}

double SimData::true_cate(std::size_t row, double t, double t0) const {
  const DrfKind kind = dgp.config().kind;
  return drf_value(kind, t) - drf_value(kind, t0) + modifier[row] * (t - t0);
}

double SimData::true_outcome(std::size_t row, double t) const {
  return drf_value(dgp.config().kind, t) + modifier[row] * t + level[row];
}

double SimData::adrf_truth(double t) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < level.size(); ++i) sum += true_outcome(i, t);
  return sum / static_cast<double>(level.size());
}

SimData sample_population(const Dgp& dgp, std::size_t n, std::mt19937_64& rng,
                          const TreatmentRange* treatment_range) {
  const DgpConfig& cfg = dgp.config();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n * cfg.p_x);
  std::vector<double> u(n * cfg.p_u);
  std::vector<double> z(cfg.p_z);
  std::vector<double> t(n);
  std::vector<double> y(n);
  std::vector<double> level(n);
  std::vector<double> modifier(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<double> xi(x.data() + i * cfg.p_x, cfg.p_x);
    const std::span<double> ui(u.data() + i * cfg.p_u, cfg.p_u);
    for (auto& v : xi) v = normal(rng);
    for (auto& v : ui) v = normal(rng);
    for (auto& v : z) v = normal(rng);
    const double nu = dgp.draw_noise(rng);
    const double eps = dgp.draw_noise(rng);
    if (treatment_range) {
      t[i] = std::uniform_real_distribution<double>(treatment_range->lo,
                                                    treatment_range->hi)(rng);
    } else {
      t[i] = dgp.finalize_treatment(dgp.treatment_mean(xi, z) + nu);
    }
    level[i] = dot(xi, dgp.beta_x()) + dot(ui, dgp.beta_u());
    modifier[i] = dgp.effect_modifier(xi);
    y[i] = dgp.conditional_mean(t[i], xi, ui) + eps;
  }
  Dataset data(covariate_names(cfg.p_x), std::move(x), std::move(t), std::move(y));
  const double t0 = data.t_min();
  return SimData{std::move(data), dgp,          std::move(u),
                 std::move(level), std::move(modifier), t0};
}

SimData generate(const DgpConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const Dgp dgp = Dgp::draw(cfg, rng);
  SimData sim = sample_population(dgp, cfg.n, rng);
  if (!cfg.randomized_test_treatments) return sim;

  const TreatmentRange observed = sim.dataset.t_range();
  std::vector<double> x(sim.dataset.covariates().begin(), sim.dataset.covariates().end());
  std::vector<double> t(cfg.n);
  std::vector<double> y(cfg.n);
  std::uniform_real_distribution<double> draw_t(observed.lo, observed.hi);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    t[i] = draw_t(rng);
    const std::span<const double> ui(sim.u.data() + i * cfg.p_u, cfg.p_u);
    y[i] = dgp.conditional_mean(t[i], sim.dataset.x(i), ui) + dgp.draw_noise(rng);
  }
  Dataset data(sim.dataset.covariate_names(), std::move(x), std::move(t), std::move(y));
  sim.dataset = std::move(data);
  sim.baseline = observed.lo;
  return sim;
}

}  // namespace gcf
