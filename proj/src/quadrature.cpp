#include "stabcert/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stabcert/detail/gauss_kronrod.hpp"
#include "stabcert/kernel.hpp"

namespace stabcert {

using detail::GkOptions;
using detail::Sample;

namespace {

constexpr double kDiagonalFloor = 1e-6;

GkOptions options_from(const QuadratureConfig& cfg) {
  return GkOptions{cfg.abs_tol, cfg.rel_tol, cfg.max_evaluations, 0.0};
}

// Inner levels of nested integrals run tighter so that their accumulated error
// stays below the outer target.
QuadratureConfig inner_config(const QuadratureConfig& cfg, double outer_measure) {
  QuadratureConfig inner = cfg;
  inner.rel_tol = cfg.rel_tol / 10.0;
  inner.abs_tol = cfg.abs_tol / (10.0 * std::max(1.0, outer_measure));
  return inner;
}

QuadratureResult to_result(const detail::GkResult<double>& r) {
  return QuadratureResult{r.value, r.error, std::max<std::size_t>(r.evals, 1),
                          r.converged ? QuadratureStatus::converged
                                      : QuadratureStatus::tolerance_not_reached};
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("quad.abs_tol must be positive");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("quad.rel_tol must be positive");
  if (max_evaluations < 1000) throw std::invalid_argument("quad.max_evaluations must be at least 1000");
  if (!(tail_cut > 0.0)) throw std::invalid_argument("quad.tail_cut must be positive");
}

QuadratureConfig QuadratureConfig::loosened(double factor) const {
  QuadratureConfig c = *this;
  c.abs_tol *= factor;
  c.rel_tol *= factor;
  return c;
}

QuadratureResult integrate_1d(const Integrand1D& f, double a, double b, const QuadratureConfig& cfg,
                              std::span<const double> breakpoints) {
  cfg.validate();
  if (std::isinf(b)) {
    throw std::invalid_argument("integrate_1d: infinite upper limit requires a TailBound");
  }
  if (!(b >= a)) throw std::invalid_argument("integrate_1d: requires a <= b");
  if (a == b) return QuadratureResult{0.0, 0.0, 1, QuadratureStatus::converged};
  const auto cuts = detail::make_cuts(a, b, breakpoints);
  auto g = [&](double x) { return Sample<double>{f(x), 0.0, 1}; };
  return to_result(detail::adaptive_gk<double>(g, cuts, 0.0, options_from(cfg)));
}

QuadratureResult integrate_1d(const Integrand1D& f, double a, const TailBound& tail,
                              const QuadratureConfig& cfg, std::span<const double> breakpoints) {
  cfg.validate();
  if (!tail.majorant) throw std::invalid_argument("integrate_1d: TailBound needs a majorant");
  double cut = std::max(cfg.tail_cut, a);
  if (tail.exact) {
    QuadratureResult r = integrate_1d(f, a, cut, cfg, breakpoints);
    r.value += tail.majorant(cut);
    return r;
  }
  int doublings = 0;
  while (tail.majorant(cut) >= cfg.abs_tol / 10.0) {
    if (++doublings > 200) throw std::runtime_error("integrate_1d: tail majorant does not decay");
    cut = 2.0 * std::max(cut, 1.0);
  }
  QuadratureResult r = integrate_1d(f, a, cut, cfg, breakpoints);
  r.error_bound += tail.majorant(cut);
  return r;
}

namespace {

QuadratureResult pair_radial_impl(const std::function<Sample<double>(double, double)>& inner,
                                  const QuadratureConfig& cfg, const PairRadialDomain& domain) {
  cfg.validate();
  const double r_max = domain.r_max > 0.0 ? domain.r_max : cfg.tail_cut;
  const double s_max = domain.s_max > 0.0 ? domain.s_max : cfg.tail_cut;
  const auto r_cuts = detail::make_cuts(0.0, r_max, domain.radial_breaks);
  const QuadratureConfig mid_cfg = inner_config(cfg, r_max);
  GkOptions mid_opt = options_from(mid_cfg);
  mid_opt.min_width = kDiagonalFloor;

  auto outer = [&](double r) {
    std::vector<double> s_breaks = domain.radial_breaks;
    s_breaks.push_back(r);
    for (double d : domain.diagonal_offsets) {
      s_breaks.push_back(r - d);
      s_breaks.push_back(r + d);
    }
    const auto s_cuts = detail::make_cuts(0.0, s_max, s_breaks);
    auto mid = [&](double s) {
      Sample<double> v = inner(r, s);
      v.value *= r * r * s * s;
      v.error *= r * r * s * s;
      return v;
    };
    const auto res = detail::adaptive_gk<double>(mid, s_cuts, 0.0, mid_opt);
    return Sample<double>{res.value, res.error, res.evals};
  };
  auto res = detail::adaptive_gk<double>(outer, r_cuts, 0.0, options_from(cfg));
  const double factor = 8.0 * kPi * kPi;
  QuadratureResult out = to_result(res);
  out.value = factor * out.value + domain.tail_value;
  out.error_bound = factor * out.error_bound + domain.tail_error;
  return out;
}

}  // namespace

QuadratureResult integrate_pair_radial(const PairIntegrand& f, const QuadratureConfig& cfg,
                                       const PairRadialDomain& domain) {
  const double r_max = domain.r_max > 0.0 ? domain.r_max : cfg.tail_cut;
  const QuadratureConfig u_cfg = inner_config(inner_config(cfg, r_max), r_max);
  GkOptions u_opt = options_from(u_cfg);
  u_opt.min_width = kDiagonalFloor;
  auto angular = [&](double r, double s) {
    std::vector<double> ub;
    if (domain.u_breaks) ub = domain.u_breaks(r, s);
    const auto u_cuts = detail::make_cuts(-1.0, 1.0, ub);
    auto g = [&](double u) { return Sample<double>{f(r, s, u), 0.0, 1}; };
    const auto res = detail::adaptive_gk<double>(g, u_cuts, 0.0, u_opt);
    return Sample<double>{res.value, res.error, res.evals};
  };
  return pair_radial_impl(angular, cfg, domain);
}

QuadratureResult integrate_pair_radial_reduced(const std::function<double(double, double)>& g,
                                               const QuadratureConfig& cfg,
                                               const PairRadialDomain& domain) {
  auto angular = [&](double r, double s) { return Sample<double>{g(r, s), 0.0, 1}; };
  return pair_radial_impl(angular, cfg, domain);
}

QuadratureResult integrate_ball_relative(const BallIntegrand& f, const Point3& center_x, double radius,
                                         const QuadratureConfig& cfg, const BallRelativeOptions& options) {
  cfg.validate();
  if (!(radius > 0.0)) throw std::invalid_argument("integrate_ball_relative: radius must be positive");
  const double rx = std::sqrt(center_x[0] * center_x[0] + center_x[1] * center_x[1] +
                              center_x[2] * center_x[2]);
  if (rx >= 1.0) return QuadratureResult{0.0, 0.0, 1, QuadratureStatus::converged};

  // Local frame: e3 along x (any frame at the origin), e1 and e2 orthonormal to it.
  Point3 e3{0.0, 0.0, 1.0};
  if (rx > 0.0) e3 = {center_x[0] / rx, center_x[1] / rx, center_x[2] / rx};
  Point3 e1 = std::fabs(e3[0]) < 0.9 ? Point3{1.0, 0.0, 0.0} : Point3{0.0, 1.0, 0.0};
  {
    const double d = e1[0] * e3[0] + e1[1] * e3[1] + e1[2] * e3[2];
    for (int k = 0; k < 3; ++k) e1[k] -= d * e3[k];
    const double n = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (int k = 0; k < 3; ++k) e1[k] /= n;
  }
  const Point3 e2{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2],
                  e3[0] * e1[1] - e3[1] * e1[0]};

  auto y_at = [&](double rho, double c, double phi) {
    const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double w1 = sn * std::cos(phi);
    const double w2 = sn * std::sin(phi);
    Point3 y;
    for (int k = 0; k < 3; ++k) y[k] = center_x[k] + rho * (w1 * e1[k] + w2 * e2[k] + c * e3[k]);
    return y;
  };

  // rho breakpoints: where the c-range or a radial break surface changes topology
  std::vector<double> rho_breaks{1.0 - rx, 1.0 + rx};
  for (double b : options.radial_breaks) {
    rho_breaks.push_back(std::fabs(b - rx));
    rho_breaks.push_back(b + rx);
  }
  const auto rho_cuts = detail::make_cuts(0.0, radius, rho_breaks);
  const QuadratureConfig c_cfg = inner_config(cfg, radius);
  const QuadratureConfig phi_cfg = inner_config(c_cfg, 2.0);

  auto over_rho = [&](double rho) {
    // |y| < 1 <=> c < (1 - rx^2 - rho^2) / (2 rx rho)
    double c_hi = 1.0;
    std::vector<double> c_breaks;
    if (rx > 0.0) {
      c_hi = std::min(1.0, (1.0 - rx * rx - rho * rho) / (2.0 * rx * rho));
      for (double b : options.radial_breaks) {
        c_breaks.push_back((b * b - rx * rx - rho * rho) / (2.0 * rx * rho));
      }
    } else if (rho >= 1.0) {
      c_hi = -1.0;
    }
    if (c_hi <= -1.0) return Sample<double>{0.0, 0.0, 1};
    const auto c_cuts = detail::make_cuts(-1.0, c_hi, c_breaks);
    auto over_c = [&](double c) {
      if (options.axisymmetric) {
        return Sample<double>{2.0 * kPi * f(center_x, y_at(rho, c, 0.0)), 0.0, 1};
      }
      auto over_phi = [&](double phi) { return Sample<double>{f(center_x, y_at(rho, c, phi)), 0.0, 1}; };
      const double phi_cuts[] = {0.0, kPi, 2.0 * kPi};
      const auto r = detail::adaptive_gk<double>(over_phi, phi_cuts, 0.0, options_from(phi_cfg));
      return Sample<double>{r.value, r.error, r.evals};
    };
    const auto r = detail::adaptive_gk<double>(over_c, c_cuts, 0.0, options_from(c_cfg));
    return Sample<double>{rho * rho * r.value, rho * rho * r.error, r.evals};
  };
  return to_result(detail::adaptive_gk<double>(over_rho, rho_cuts, 0.0, options_from(cfg)));
}

}  // namespace stabcert
