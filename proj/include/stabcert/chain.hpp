#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stabcert/kernel.hpp"
#include "stabcert/quadrature.hpp"

namespace stabcert {

/// Scalar knobs of the one-center chain. The nuclear charge is always derived
/// from the coupling through alpha * z = 2 / pi.
struct ChainParams {
  double sigma = 0.3;
  double eps = 0.2077;
  double lambda = 0.97;
  double alpha = 1.0 / 66.5;
  int q = 1;

  double z() const;
  /// q * alpha. F-tilde terms are evaluated at this coupling, which bounds
  /// their value at alpha since they are nondecreasing in the coupling.
  double coupling() const { return q * alpha; }
  void validate() const;

  bool operator==(const ChainParams&) const = default;
};

struct Overrides {
  std::optional<double> omega_over_eps;
  std::optional<double> theta_sup;
  std::optional<double> j_value;

  bool any() const { return omega_over_eps || theta_sup || j_value; }
  bool all() const { return omega_over_eps && theta_sup && j_value; }
};

/// Grid density for sup searches over the radius.
struct SupSearch {
  int grid_points = 200;
  double golden_tol = 1e-7;
};

inline constexpr double kBallConstant = 8.4411;
inline constexpr double kJPrefactor = 0.0258;
/// 1 / (2 pi^2), the right-hand side of the stability criterion.
inline constexpr double kCriterion = 1.0 / (2.0 * kPi * kPi);

// ---- individual chain quantities ------------------------------------------

/// Half the squared Hilbert-Schmidt norm of the short-range kernel.
QuadratureResult omega(const CutoffProfile& profile, const QuadratureConfig& cfg);

/// h(x)^-1 times the integral of L h over the sigma-ball around x inside B.
QuadratureResult theta(double x_radius, const CutoffProfile& profile, const QuadratureConfig& cfg);

struct SupResult {
  double value = 0.0;
  double argmax = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// sup of theta over [0, 1): grid scan plus golden-section refinement.
SupResult theta_sup(const CutoffProfile& profile, const QuadratureConfig& cfg, const SupSearch& search = {});

/// eps on B_{1-sigma} plus theta, zero outside the closed unit ball.
double u_eps_star(double x_radius, const ChainParams& params, const CutoffProfile& profile,
                  const QuadratureConfig& cfg);

/// kappa * F-tilde(t) with z = 2 / (pi kappa); zero at kappa = 0.
double coupled_ftilde(double kappa, double t, double lambda);

/// sup of F-tilde over [0, 1 - sigma] at nuclear charge z.
double ftilde_sup(double z, double lambda, double sigma);
/// sup of kappa * F-tilde over [0, 1 - sigma]; finite at kappa = 0.
double coupled_ftilde_sup(double kappa, double lambda, double sigma);

/// (1 - sigma)(kappa * Fmax + u_max), unrounded.
double c_constant_raw(double sigma, double kappa_ftilde_max, double u_max);
/// Rounded up at the fourth decimal.
double round_up_4(double x);
double c_constant(double sigma, double kappa_ftilde_max, double u_max);

double a_tilde(double omega_over_eps, double c_value, double sigma);

/// Which bracket terms enter J; all on by default.
struct JTerms {
  bool coulomb = true;
  bool ftilde = true;
  bool u_eps = true;
};

/// 0.0258 * 4 pi * int_{1-3 sigma}^inf [2/(pi r) + kappa F(r) + U(r)]^4 r^2 dr with
/// kappa = q alpha and an exact r^-2 tail.
QuadratureResult j_integral(const ChainParams& params, const CutoffProfile& profile, const QuadratureConfig& cfg,
                            const JTerms& terms = {});

/// J as a polynomial in (eps, kappa, sqrt(4 kappa / pi) + kappa / 2). The profile
/// enters only through the 35 radial moments, integrated once.
class JMoments {
 public:
  JMoments(const CutoffProfile& profile, double lambda, const QuadratureConfig& cfg);

  double evaluate(double eps, double kappa) const;
  double error_bound(double eps, double kappa) const;
  bool converged() const { return converged_; }
  std::size_t evaluations() const { return evals_; }

 private:
  std::vector<std::array<int, 4>> powers_;
  std::vector<double> moments_;
  std::vector<double> multinomial_;
  double error_ = 0.0;
  std::size_t evals_ = 0;
  bool converged_ = true;
};

double stability_margin(int q, double alpha, double a_tilde_value, double j_value);

/// (3/32) e^3 m: non-magnetic Riesz coefficient to magnetic one.
double transfer_constant(double m);

// ---- assembled chain ------------------------------------------------------

struct ChainErrors {
  double omega = 0.0;
  double theta_sup = 0.0;
  double j = 0.0;

  bool operator==(const ChainErrors&) const = default;
};

struct OverrideFlags {
  bool omega_over_eps = false;
  bool theta_sup = false;
  bool j_value = false;

  bool operator==(const OverrideFlags&) const = default;
};

struct ConstantsReport {
  ChainParams params;
  double omega = 0.0;
  double omega_over_eps = 0.0;
  double theta_sup = 0.0;
  double theta_argmax = 0.0;
  double u_eps_max = 0.0;
  /// sup of F-tilde on [0, 1 - sigma] at z = 2 / (pi q alpha); infinite at alpha = 0 when lambda < 1 - sigma.
  double ftilde_max = 0.0;
  double c_raw = 0.0;
  double c_value = 0.0;
  double a_tilde = 0.0;
  double j_value = 0.0;
  double margin = 0.0;
  bool stable = false;
  std::optional<double> alpha_c;
  bool alpha_c_certified = false;
  double alpha_c_margin = 0.0;
  ChainErrors errors;
  OverrideFlags overridden;
  bool converged = true;
  std::size_t evaluations = 0;

  bool operator==(const ConstantsReport&) const = default;
};

/// Profile- and lambda-dependent pieces of the chain, computed once; eps, alpha
/// and q may then vary cheaply. Overridden quantities are never computed.
class ChainModel {
 public:
  ChainModel(const CutoffProfile& profile, double lambda, const Overrides& overrides, const QuadratureConfig& cfg,
             const SupSearch& search = {});

  const CutoffProfile& profile() const { return profile_; }
  double lambda() const { return lambda_; }

  double omega_over_eps(double eps) const;
  double u_max(double eps) const;
  double j(double eps, double kappa) const;

  /// Criterion with the unrounded C; continuous and decreasing in alpha.
  double margin(const ChainParams& p) const;
  /// Report at p.alpha with C rounded up at four decimals, as named constants are.
  ConstantsReport report(const ChainParams& p) const;

 private:
  CutoffProfile profile_;
  double lambda_;
  Overrides overrides_;
  QuadratureResult omega_;
  SupResult theta_;
  std::optional<JMoments> moments_;
};

struct AlphaSolution {
  double alpha_c = 0.0;
  double margin = 0.0;
  bool certified = false;
  int iterations = 0;
};

inline constexpr double kAlphaCeiling = 0.25;

/// Largest alpha in (0, 1/4] with nonnegative margin, by bisection to relative
/// tolerance rel_tol. Not certified when even a vanishing coupling fails.
AlphaSolution solve_alpha_c(const ChainModel& model, ChainParams p, double rel_tol = 1e-6);

AlphaSolution solve_alpha_c(int q, const CutoffProfile& profile, const ChainParams& base, const Overrides& overrides,
                            const QuadratureConfig& cfg, const SupSearch& search = {});

/// Full chain at p, optionally with the critical coupling for p.q.
ConstantsReport compute_chain(const ChainParams& p, const CutoffProfile& profile, const Overrides& overrides,
                              const QuadratureConfig& cfg, bool solve, const SupSearch& search = {});

// ---- parameter search -----------------------------------------------------

/// Search coordinates, in order: sigma, eps, lambda, plateau, h exponent.
inline constexpr std::size_t kSearchDims = 5;
using SearchPoint = std::array<double, kSearchDims>;

struct OptimizeOptions {
  SearchPoint start{0.3, 0.2077, 0.97, 0.4, 0.5};
  /// Coordinates left free; the others stay at their start value.
  std::array<bool, kSearchDims> free{true, true, true, true, true};
  SearchPoint step{0.02, 0.03, 0.01, 0.05, 0.1};
  int q = 1;
  int max_evaluations = 120;
  double x_tol = 1e-5;
  double f_tol = 1e-9;
  Overrides overrides;
  SupSearch search;
};

struct OptimizeResult {
  ChainParams params;
  CutoffProfile profile{0.3};
  ConstantsReport report;
  double start_alpha_c = 0.0;
  int evaluations = 0;
  bool certified = false;
};

/// Nelder-Mead on alpha_c over the free coordinates. Deterministic; the start
/// point is a simplex vertex, so the result is never worse than the start.
OptimizeResult optimize_parameters(const OptimizeOptions& options, const QuadratureConfig& cfg);

}  // namespace stabcert
