#pragma once

#include <numbers>
#include <utility>

namespace stabcert {

inline constexpr double kPi = std::numbers::pi;

/// Radial partition of unity (chi0, chi1) on the unit ball together with the
/// positive weight h used by the long-range correction.
///
/// chi1 is 1 on [0, plateau], falls off as a quarter cosine on
/// (plateau, 1 - sigma] and vanishes beyond; chi0 = sqrt(1 - chi1^2).
/// The weight is h(t) = (1 - t^2)^(-h_exponent) on [0, 1).
class CutoffProfile {
 public:
  /// Default shape: plateau = 1 - 2 sigma, h_exponent = 0.5.
  explicit CutoffProfile(double sigma);
  CutoffProfile(double sigma, double plateau, double h_exponent);

  /// Degenerate profile with chi1 == 0 and chi0 == 1 everywhere.
  static CutoffProfile trivial(double sigma, double h_exponent = 0.5);

  double sigma() const { return sigma_; }
  double plateau() const { return plateau_; }
  double h_exponent() const { return h_exponent_; }
  bool degenerate() const { return degenerate_; }

  /// Width of the cosine transition, 1 - sigma - plateau.
  double transition_width() const { return 1.0 - sigma_ - plateau_; }
  /// Outer edge of supp chi1.
  double support_radius() const { return 1.0 - sigma_; }

  /// Common Lipschitz constant of chi0 and chi1 (pi / (2 width)); 0 when the
  /// transition is degenerate and chi1 vanishes identically.
  double lipschitz() const;

  double chi1(double t) const;
  double chi0(double t) const;
  /// Weight h(t); +inf for t >= 1.
  double h(double t) const;

  /// Radii where the profile has kinks, in increasing order.
  std::pair<double, double> kinks() const { return {plateau_, support_radius()}; }

 private:
  double sigma_;
  double plateau_;
  double h_exponent_;
  bool degenerate_ = false;
};

/// Two points in 3-space described by their radii and the cosine of the angle
/// between them.
struct KernelPoint {
  double r = 0.0;
  double s = 0.0;
  double u = 1.0;

  double distance_squared() const;
  double distance() const;
};

/// Distance below which the kernel switches to the near-diagonal rule.
inline constexpr double kNearDiagonal = 1e-8;

/// Sum over j of (chi_j(r) - chi_j(s))^2.
double cutoff_mismatch(double r, double s, const CutoffProfile& profile);

/// L(x, y) = (2 pi^2 |x-y|^4)^-1 sum_j (chi_j(x) - chi_j(y))^2.
double localization_kernel(const KernelPoint& p, const CutoffProfile& profile);
/// Same kernel from radii and a separately computed distance |x-y|.
double localization_kernel(double r, double s, double distance, const CutoffProfile& profile);

struct KernelSplit {
  double short_range = 0.0;
  double long_range = 0.0;
};

/// long_range = L 1_B(x) 1_B(y) 1_{|x-y|<sigma}; short_range = L - long_range.
KernelSplit kernel_split(const KernelPoint& p, const CutoffProfile& profile);

/// exp(-t|p|)(x, y) = t / (pi^2 (d^2 + t^2)^2).
double heat_kernel_free(double t, double d);

/// Density eta_t(s) with exp(-t|xi|) = int_0^inf eta_t(s) exp(-s |xi|^2) ds,
/// i.e. eta_t(s) = t / (2 sqrt(pi)) s^(-3/2) exp(-t^2 / (4 s)).
double subordination_weight(double t, double s);

/// Gaussian heat kernel exp(s Delta)(x, y) = (4 pi s)^(-3/2) exp(-d^2 / (4 s)).
double gaussian_kernel(double s, double d);

/// One-center potential profile, piecewise as written (no continuity at lambda).
double ftilde(double t, double z, double lambda);

}  // namespace stabcert
