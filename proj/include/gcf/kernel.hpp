#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gcf {

enum class KernelFamily { kGaussian, kUniform, kEpanechnikov, kBiweight, kTriweight };

KernelFamily parse_kernel_family(std::string_view name);
std::string_view kernel_family_name(KernelFamily family);

// Second-order symmetric kernel k scaled by bandwidth h:
//   K_h(u) = k(u / h) / h.
class KernelSpec {
 public:
  KernelSpec() = default;
  KernelSpec(KernelFamily family, double bandwidth);

  KernelFamily family() const { return family_; }
  double bandwidth() const { return bandwidth_; }
  bool compact() const { return family_ != KernelFamily::kGaussian; }

  double eval(double u) const;
  // d/du K_h(u). Only the Gaussian family is exposed; other families throw
  // UnsupportedError and must use the numeric derivative route.
  double deriv(double u) const;
  // Integral of K_h(s - t) over s in [t_min, t_max].
  double boundary_mass(double t, double t_min, double t_max) const;

 private:
  KernelFamily family_ = KernelFamily::kGaussian;
  double bandwidth_ = 1.0;
};

// Silverman rule of thumb: 1.06 * min(sd, IQR / 1.34) * n^(-1/5).
double bandwidth_rot(std::span<const double> values);

// Candidate minimizing the leave-one-out squared error of the
// Nadaraya-Watson regression of targets on values. Ties go to the smaller h.
double bandwidth_cv(std::span<const double> values,
                    std::span<const double> targets,
                    std::span<const double> candidates,
                    KernelFamily family = KernelFamily::kGaussian);

// Leave-one-out squared error used by bandwidth_cv, exposed for inspection.
double loo_nw_error(std::span<const double> values,
                    std::span<const double> targets, const KernelSpec& spec);

}  // namespace gcf
