#include "stabcert/kernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stabcert {

CutoffProfile::CutoffProfile(double sigma) : CutoffProfile(sigma, 1.0 - 2.0 * sigma, 0.5) {}

CutoffProfile::CutoffProfile(double sigma, double plateau, double h_exponent)
    : sigma_(sigma), plateau_(plateau), h_exponent_(h_exponent) {
  if (!(sigma > 0.0 && sigma < 1.0 / 3.0)) {
    throw std::invalid_argument("cutoff profile: sigma must lie in (0, 1/3), got " +
                                std::to_string(sigma));
  }
  // small slack so that plateau = 1 - 2 sigma computed in floating point is accepted
  if (!(plateau >= 0.0 && plateau <= 1.0 - 2.0 * sigma + 1e-12)) {
    throw std::invalid_argument("cutoff profile: plateau must lie in [0, 1 - 2 sigma], got " +
                                std::to_string(plateau));
  }
  if (!(h_exponent >= 0.0 && h_exponent < 1.0)) {
    throw std::invalid_argument("cutoff profile: h_exponent must lie in [0, 1), got " +
                                std::to_string(h_exponent));
  }
}

CutoffProfile CutoffProfile::trivial(double sigma, double h_exponent) {
  CutoffProfile p(sigma, 0.0, h_exponent);
  p.degenerate_ = true;
  return p;
}

double CutoffProfile::lipschitz() const {
  if (degenerate_) return 0.0;
  return kPi / (2.0 * transition_width());
}

double CutoffProfile::chi1(double t) const {
  if (t < 0.0) throw std::domain_error("chi1: negative radius");
  if (degenerate_) return 0.0;
  if (t <= plateau_) return 1.0;
  if (t >= support_radius()) return 0.0;
  return std::cos(kPi * (t - plateau_) / (2.0 * transition_width()));
}

double CutoffProfile::chi0(double t) const {
  if (t < 0.0) throw std::domain_error("chi0: negative radius");
  if (degenerate_) return 1.0;
  if (t <= plateau_) return 0.0;
  if (t >= support_radius()) return 1.0;
  // sin is the exact complement of the cosine branch and avoids sqrt(1 - c^2) cancellation
  return std::sin(kPi * (t - plateau_) / (2.0 * transition_width()));
}

double CutoffProfile::h(double t) const {
  if (t >= 1.0) return std::numeric_limits<double>::infinity();
  if (h_exponent_ == 0.0) return 1.0;
  return std::pow((1.0 - t) * (1.0 + t), -h_exponent_);
}

double KernelPoint::distance_squared() const {
  // (r - s)^2 + 2 r s (1 - u) keeps full precision near the diagonal
  const double d2 = (r - s) * (r - s) + 2.0 * r * s * (1.0 - u);
  return d2 > 0.0 ? d2 : 0.0;
}

double KernelPoint::distance() const { return std::sqrt(distance_squared()); }

double cutoff_mismatch(double r, double s, const CutoffProfile& profile) {
  const double d0 = profile.chi0(r) - profile.chi0(s);
  const double d1 = profile.chi1(r) - profile.chi1(s);
  return d0 * d0 + d1 * d1;
}

double localization_kernel(const KernelPoint& p, const CutoffProfile& profile) {
  return localization_kernel(p.r, p.s, p.distance(), profile);
}

double localization_kernel(double r, double s, double d, const CutoffProfile& profile) {
  const double mismatch = cutoff_mismatch(r, s, profile);
  if (mismatch == 0.0) return 0.0;
  if (d < kNearDiagonal) {
    const double lip = profile.lipschitz();
    return lip * lip / (2.0 * kPi * kPi * kNearDiagonal * kNearDiagonal);
  }
  const double d2 = d * d;
  return mismatch / (2.0 * kPi * kPi * d2 * d2);
}

KernelSplit kernel_split(const KernelPoint& p, const CutoffProfile& profile) {
  const double full = localization_kernel(p, profile);
  const bool near = p.r < 1.0 && p.s < 1.0 && p.distance() < profile.sigma();
  return near ? KernelSplit{0.0, full} : KernelSplit{full, 0.0};
}

double heat_kernel_free(double t, double d) {
  if (!(t > 0.0)) throw std::domain_error("heat_kernel_free: t must be positive");
  if (d < 0.0) throw std::domain_error("heat_kernel_free: negative distance");
  const double q = d * d + t * t;
  return t / (kPi * kPi * q * q);
}

double subordination_weight(double t, double s) {
  if (!(t > 0.0)) throw std::domain_error("subordination_weight: t must be positive");
  if (s <= 0.0) return 0.0;
  return t / (2.0 * std::sqrt(kPi)) * std::pow(s, -1.5) * std::exp(-t * t / (4.0 * s));
}

double gaussian_kernel(double s, double d) {
  if (!(s > 0.0)) throw std::domain_error("gaussian_kernel: s must be positive");
  return std::pow(4.0 * kPi * s, -1.5) * std::exp(-d * d / (4.0 * s));
}

double ftilde(double t, double z, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("ftilde: lambda must lie in (0, 1)");
  }
  if (!(z > 0.0)) throw std::invalid_argument("ftilde: z must be positive");
  if (t < 0.0) throw std::domain_error("ftilde: negative radius");
  if (t <= lambda) return 0.5 / ((1.0 - t) * (1.0 + t));
  return (std::sqrt(2.0 * z) + 0.5) / t;
}

}  // namespace stabcert
