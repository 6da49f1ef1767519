#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stabcert {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t max_evaluations = 20'000'000;
  /// Radius beyond which an analytic tail replaces sampling on semi-infinite ranges.
  double tail_cut = 50.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  QuadratureConfig loosened(double factor) const;
};

enum class QuadratureStatus { converged, tolerance_not_reached };

/// Value with an adaptive (heuristic, not interval-rigorous) error estimate.
struct QuadratureResult {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t evaluations = 0;
  QuadratureStatus status = QuadratureStatus::converged;

  bool converged() const { return status == QuadratureStatus::converged; }
};

using Integrand1D = std::function<double(double)>;

/// Analytic treatment of [R, inf) for semi-infinite integrals. `majorant(R)`
/// bounds |int_R^inf f|. When `exact` is set, majorant(R) is the tail itself and
/// is added to the value at R = tail_cut; otherwise R is pushed out until the
/// majorant drops below abs_tol / 10 and the majorant is charged to the error.
struct TailBound {
  std::function<double(double)> majorant;
  bool exact = false;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b] with optional
/// interior breakpoints where f has kinks, jumps or integrable singularities.
QuadratureResult integrate_1d(const Integrand1D& f, double a, double b, const QuadratureConfig& cfg,
                              std::span<const double> breakpoints = {});

/// Semi-infinite range [a, inf): sampled up to the tail radius, analytic beyond.
QuadratureResult integrate_1d(const Integrand1D& f, double a, const TailBound& tail,
                              const QuadratureConfig& cfg,
                              std::span<const double> breakpoints = {});

/// Integrand of two radial variables and the cosine of the angle between the points.
using PairIntegrand = std::function<double(double r, double s, double u)>;

struct PairRadialDomain {
  /// Radial cut-offs; non-positive means cfg.tail_cut.
  double r_max = 0.0;
  double s_max = 0.0;
  /// Radii where the integrand has kinks or jumps (both variables).
  std::vector<double> radial_breaks;
  /// Extra s split points at r - d and r + d for each listed d.
  std::vector<double> diagonal_offsets;
  /// Optional interior u split points for given (r, s), e.g. surfaces |x-y| = const.
  std::function<std::vector<double>(double r, double s)> u_breaks;
  /// Optional tail contribution beyond the radial cut-offs, added to value and error.
  double tail_value = 0.0;
  double tail_error = 0.0;
};

/// int int F(x, y) dx dy for F depending on (|x|, |y|, cos angle), via
/// 8 pi^2 int int int F r^2 s^2 du ds dr. Cells abutting the diagonal r = s,
/// u = 1 are refined down to a floor width of 1e-6.
QuadratureResult integrate_pair_radial(const PairIntegrand& f, const QuadratureConfig& cfg,
                                       const PairRadialDomain& domain = {});

/// Same reduction, but the caller supplies the exact angular integral
/// g(r, s) = int_{-1}^{1} F(r, s, u) du.
QuadratureResult integrate_pair_radial_reduced(const std::function<double(double, double)>& g,
                                               const QuadratureConfig& cfg,
                                               const PairRadialDomain& domain = {});

using Point3 = std::array<double, 3>;
using BallIntegrand = std::function<double(const Point3& x, const Point3& y)>;

struct BallRelativeOptions {
  /// f(x, y) depends on y only through |y| and the angle to x.
  bool axisymmetric = false;
  /// Values of |y| where f has kinks or jumps.
  std::vector<double> radial_breaks;
};

/// int over {|y| < 1} intersected with {|x - y| < radius} of f(x, y) dy, in
/// spherical coordinates centred at x so an |x-y|^-2 singularity is absorbed
/// into the volume element.
QuadratureResult integrate_ball_relative(const BallIntegrand& f, const Point3& center_x,
                                         double radius, const QuadratureConfig& cfg,
                                         const BallRelativeOptions& options = {});

}  // namespace stabcert
