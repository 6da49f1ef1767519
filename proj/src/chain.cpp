#include "stabcert/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "stabcert/detail/gauss_kronrod.hpp"
#include "stabcert/parallel.hpp"

namespace stabcert {

double ChainParams::z() const { return 2.0 / (kPi * alpha); }

void ChainParams::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0 / 3.0)) throw std::invalid_argument("chain.sigma must lie in (0, 1/3)");
  if (!(eps > 0.0)) throw std::invalid_argument("chain.eps must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("chain.lambda must lie in (0, 1)");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("chain.alpha must be nonnegative");
  if (q < 1) throw std::invalid_argument("chain.q must be at least 1");
}

// ---- Omega ----------------------------------------------------------------

QuadratureResult omega(const CutoffProfile& profile, const QuadratureConfig& cfg) {
  cfg.validate();
  if (profile.degenerate()) return QuadratureResult{0.0, 0.0, 1, QuadratureStatus::converged};
  const double sigma = profile.sigma();
  const double sigma2 = sigma * sigma;
  const double pi4 = kPi * kPi * kPi * kPi;

  // The mismatch depends on (r, s) only and the short-range indicator only on
  // |x-y|, so the u-integral of L^2 is done exactly in w = |x-y|^2:
  // int d^-8 du = (1 / 2rs) int w^-4 dw over the admissible w range.
  auto g = [&](double r, double s) {
    if (r <= 0.0 || s <= 0.0) return 0.0;
    const double m = cutoff_mismatch(r, s, profile);
    if (m == 0.0) return 0.0;
    const double diff2 = (r - s) * (r - s);
    const double w_lo = (r < 1.0 && s < 1.0) ? std::max(sigma2, diff2) : diff2;
    const double w_hi = (r + s) * (r + s);
    if (w_lo >= w_hi) return 0.0;
    const double angular = (std::pow(w_lo, -3.0) - std::pow(w_hi, -3.0)) / (6.0 * r * s);
    return m * m / (4.0 * pi4) * angular;
  };

  PairRadialDomain dom;
  const double cut = std::max(cfg.tail_cut, 2.0);
  dom.r_max = cut;
  dom.s_max = cut;
  dom.radial_breaks = {profile.plateau(), profile.support_radius(), 1.0};
  dom.diagonal_offsets = {sigma};
  QuadratureResult res = integrate_pair_radial_reduced(g, cfg, dom);
  // Beyond the cut one point lies in B_{1-sigma}, the mismatch is at most 2 and
  // the integrand decays like s^-6; this bounds both tails together.
  const double tail = 8.0 / (kPi * kPi) / 3.0 * 0.8 * std::pow(cut - 1.0, -5.0);
  res.value *= 0.5;
  res.error_bound = 0.5 * res.error_bound + tail;
  return res;
}

// ---- theta ----------------------------------------------------------------

QuadratureResult theta(double x_radius, const CutoffProfile& profile, const QuadratureConfig& cfg) {
  if (x_radius < 0.0) throw std::domain_error("theta: negative radius");
  if (x_radius >= 1.0 || profile.degenerate()) return QuadratureResult{0.0, 0.0, 1, QuadratureStatus::converged};
  auto f = [&](const Point3& x, const Point3& y) {
    const double s = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    if (s >= 1.0) return 0.0;
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
    return localization_kernel(x_radius, s, std::sqrt(d2), profile) * profile.h(s);
  };
  BallRelativeOptions opts;
  opts.axisymmetric = true;
  opts.radial_breaks = {profile.plateau(), profile.support_radius()};
  QuadratureResult res = integrate_ball_relative(f, {0.0, 0.0, x_radius}, profile.sigma(), cfg, opts);
  const double hx = profile.h(x_radius);
  res.value /= hx;
  res.error_bound /= hx;
  return res;
}

SupResult theta_sup(const CutoffProfile& profile, const QuadratureConfig& cfg, const SupSearch& search) {
  if (search.grid_points < 200) throw std::invalid_argument("sup search needs at least 200 grid points");
  if (profile.degenerate()) return SupResult{};
  const int n = search.grid_points;
  std::vector<QuadratureResult> grid(static_cast<std::size_t>(n));
  parallel_for(grid.size(), [&](std::size_t i) { grid[i] = theta(static_cast<double>(i) / n, profile, cfg); });

  bool converged = true;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    converged = converged && grid[i].converged();
    if (grid[i].value > grid[best].value) best = i;
  }
  SupResult out{grid[best].value, static_cast<double>(best) / n, grid[best].error_bound, converged};

  // golden-section maximization on the two grid cells around the best node
  double lo = best == 0 ? 0.0 : (static_cast<double>(best) - 1.0) / n;
  double hi = std::min((static_cast<double>(best) + 1.0) / n, 1.0);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double r) { return theta(r, profile, cfg); };
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  QuadratureResult fc = eval(c);
  QuadratureResult fd = eval(d);
  while (hi - lo > search.golden_tol) {
    if (fc.value >= fd.value) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = eval(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = eval(d);
    }
  }
  for (const auto& [r, res] : {std::pair{c, fc}, std::pair{d, fd}}) {
    converged = converged && res.converged();
    if (res.value > out.value) {
      out.value = res.value;
      out.argmax = r;
      out.error = res.error_bound;
    }
  }
  out.converged = converged;
  return out;
}

double u_eps_star(double x_radius, const ChainParams& params, const CutoffProfile& profile,
                  const QuadratureConfig& cfg) {
  if (x_radius >= 1.0) return 0.0;
  const double indicator = x_radius < 1.0 - params.sigma ? params.eps : 0.0;
  return indicator + theta(x_radius, profile, cfg).value;
}

// ---- F-tilde, C, A-tilde ----------------------------------------------------

double coupled_ftilde(double kappa, double t, double lambda) {
  if (kappa == 0.0) return 0.0;
  if (t <= lambda) return kappa * 0.5 / ((1.0 - t) * (1.0 + t));
  // kappa * sqrt(2z) = sqrt(4 kappa / pi) at z = 2 / (pi kappa)
  return (std::sqrt(4.0 * kappa / kPi) + 0.5 * kappa) / t;
}

double ftilde_sup(double z, double lambda, double sigma) {
  const double b = 1.0 - sigma;
  if (lambda >= b) return ftilde(b, z, lambda);
  // inner branch increases up to lambda, outer branch decreases from lambda+
  return std::max(ftilde(lambda, z, lambda), (std::sqrt(2.0 * z) + 0.5) / lambda);
}

double coupled_ftilde_sup(double kappa, double lambda, double sigma) {
  if (kappa == 0.0) return 0.0;
  return kappa * ftilde_sup(2.0 / (kPi * kappa), lambda, sigma);
}

double c_constant_raw(double sigma, double kappa_ftilde_max, double u_max) {
  return (1.0 - sigma) * (kappa_ftilde_max + u_max);
}

double round_up_4(double x) {
  // values already on the 4-decimal lattice are kept
  return std::ceil(x * 1e4 - 1e-7) / 1e4;
}

double c_constant(double sigma, double kappa_ftilde_max, double u_max) {
  return round_up_4(c_constant_raw(sigma, kappa_ftilde_max, u_max));
}

double a_tilde(double omega_over_eps, double c_value, double sigma) {
  const double c2 = c_value * c_value;
  return omega_over_eps + kBallConstant * c2 * c2 / (1.0 - sigma);
}

// ---- J ----------------------------------------------------------------------

namespace {

double outer_coefficient(double kappa) { return std::sqrt(4.0 * kappa / kPi) + 0.5 * kappa; }

std::vector<double> j_breaks(const CutoffProfile& p, double lambda) {
  const double s = p.sigma();
  const double t0 = p.plateau();
  return {t0 - s, t0, t0 + s, 1.0 - 2.0 * s, 1.0 - s, lambda, 1.0};
}

}  // namespace

QuadratureResult j_integral(const ChainParams& params, const CutoffProfile& profile, const QuadratureConfig& cfg,
                            const JTerms& terms) {
  params.validate();
  const double kappa = params.coupling();
  const double outer = outer_coefficient(kappa);
  const double lo = 1.0 - 3.0 * params.sigma;
  auto bracket = [&](double r) {
    double v = 0.0;
    if (terms.coulomb) v += 2.0 / (kPi * r);
    if (terms.ftilde) v += coupled_ftilde(kappa, r, params.lambda);
    if (terms.u_eps && r < 1.0) {
      if (r < 1.0 - params.sigma) v += params.eps;
      v += theta(r, profile, cfg).value;
    }
    return v;
  };
  auto f = [&](double r) {
    const double b = bracket(r);
    const double b2 = b * b;
    return b2 * b2 * r * r;
  };
  // beyond max(1, lambda) the bracket is k / r
  const double k = (terms.coulomb ? 2.0 / kPi : 0.0) + (terms.ftilde ? outer : 0.0);
  QuadratureConfig c = cfg;
  c.tail_cut = std::max(cfg.tail_cut, 1.0);
  TailBound tail{[k](double R) { return std::pow(k, 4) / R; }, true};
  const auto breaks = j_breaks(profile, params.lambda);
  QuadratureResult res = integrate_1d(f, lo, tail, c, breaks);
  const double scale = kJPrefactor * 4.0 * kPi;
  res.value *= scale;
  res.error_bound *= scale;
  return res;
}

JMoments::JMoments(const CutoffProfile& profile, double lambda, const QuadratureConfig& cfg) {
  cfg.validate();
  for (int a = 4; a >= 0; --a)
    for (int b = 4 - a; b >= 0; --b)
      for (int c = 4 - a - b; c >= 0; --c) powers_.push_back({a, b, c, 4 - a - b - c});
  const double fact[] = {1, 1, 2, 6, 24};
  for (const auto& p : powers_) multinomial_.push_back(24.0 / (fact[p[0]] * fact[p[1]] * fact[p[2]] * fact[p[3]]));

  const double sigma = profile.sigma();
  const double lo = 1.0 - 3.0 * sigma;
  const double hi = std::max(cfg.tail_cut, 1.0);
  const Eigen::Index n = static_cast<Eigen::Index>(powers_.size());
  auto f = [&](double r) {
    const double t0 = 2.0 / (kPi * r) + (r < 1.0 ? theta(r, profile, cfg).value : 0.0);
    const double t1 = r < 1.0 - sigma ? 1.0 : 0.0;
    const double t2 = r <= lambda ? 0.5 / ((1.0 - r) * (1.0 + r)) : 0.0;
    const double t3 = r > lambda ? 1.0 / r : 0.0;
    const double base[4] = {t0, t1, t2, t3};
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double prod = r * r;
      for (int k = 0; k < 4; ++k)
        for (int e = 0; e < powers_[i][k]; ++e) prod *= base[k];
      v[i] = prod;
    }
    return detail::Sample<Eigen::VectorXd>{std::move(v), 0.0, 1};
  };
  const auto breaks = j_breaks(profile, lambda);
  const auto cuts = detail::make_cuts(lo, hi, breaks);
  detail::GkOptions opt{cfg.abs_tol, cfg.rel_tol, cfg.max_evaluations, 0.0};
  const auto res = detail::adaptive_gk<Eigen::VectorXd>(f, cuts, Eigen::VectorXd::Zero(n), opt);
  moments_.assign(res.value.data(), res.value.data() + n);
  // exact tail: only Coulomb and outer F-tilde survive, both proportional to 1/r
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = powers_[i];
    if (p[1] == 0 && p[2] == 0) moments_[i] += std::pow(2.0 / kPi, p[0]) / hi;
  }
  error_ = res.error;
  evals_ = res.evals;
  converged_ = res.converged;
}

double JMoments::evaluate(double eps, double kappa) const {
  const double coef[4] = {1.0, eps, kappa, outer_coefficient(kappa)};
  double sum = 0.0;
  for (std::size_t i = 0; i < powers_.size(); ++i) {
    double term = multinomial_[i] * moments_[i];
    for (int k = 0; k < 4; ++k) term *= std::pow(coef[k], powers_[i][k]);
    sum += term;
  }
  return kJPrefactor * 4.0 * kPi * sum;
}

double JMoments::error_bound(double eps, double kappa) const {
  const double coef[4] = {1.0, eps, kappa, outer_coefficient(kappa)};
  double weight = 0.0;
  for (std::size_t i = 0; i < powers_.size(); ++i) {
    double term = multinomial_[i];
    for (int k = 0; k < 4; ++k) term *= std::pow(coef[k], powers_[i][k]);
    weight += term;
  }
  return kJPrefactor * 4.0 * kPi * weight * error_;
}

double stability_margin(int q, double alpha, double a_tilde_value, double j_value) {
  return kCriterion - alpha * q * (a_tilde_value + j_value);
}

double transfer_constant(double m) {
  if (m < 0.0) throw std::invalid_argument("transfer_constant: negative coefficient");
  return 3.0 / 32.0 * std::exp(3.0) * m;
}

// ---- ChainModel -------------------------------------------------------------

ChainModel::ChainModel(const CutoffProfile& profile, double lambda, const Overrides& overrides,
                       const QuadratureConfig& cfg, const SupSearch& search)
    : profile_(profile), lambda_(lambda), overrides_(overrides) {
  cfg.validate();
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("chain.lambda must lie in (0, 1)");
  if (!overrides.omega_over_eps) omega_ = omega(profile, cfg);
  if (!overrides.theta_sup) theta_ = theta_sup(profile, cfg, search);
  if (!overrides.j_value) moments_.emplace(profile, lambda, cfg);
}

double ChainModel::omega_over_eps(double eps) const {
  return overrides_.omega_over_eps ? *overrides_.omega_over_eps : omega_.value / eps;
}

double ChainModel::u_max(double eps) const {
  return eps + (overrides_.theta_sup ? *overrides_.theta_sup : theta_.value);
}

double ChainModel::j(double eps, double kappa) const {
  return overrides_.j_value ? *overrides_.j_value : moments_->evaluate(eps, kappa);
}

namespace {

void check_matches(const ChainParams& p, const ChainModel& m) {
  p.validate();
  if (std::fabs(p.sigma - m.profile().sigma()) > 1e-15) {
    throw std::invalid_argument("chain.sigma differs from the cutoff profile's sigma");
  }
  if (p.lambda != m.lambda()) throw std::invalid_argument("chain.lambda differs from the model's lambda");
}

}  // namespace

double ChainModel::margin(const ChainParams& p) const {
  check_matches(p, *this);
  const double kappa = p.coupling();
  const double c = c_constant_raw(p.sigma, coupled_ftilde_sup(kappa, lambda_, p.sigma), u_max(p.eps));
  return stability_margin(p.q, p.alpha, a_tilde(omega_over_eps(p.eps), c, p.sigma), j(p.eps, kappa));
}

ConstantsReport ChainModel::report(const ChainParams& p) const {
  check_matches(p, *this);
  ConstantsReport r;
  r.params = p;
  const double kappa = p.coupling();
  r.overridden = {overrides_.omega_over_eps.has_value(), overrides_.theta_sup.has_value(),
                  overrides_.j_value.has_value()};
  r.omega_over_eps = omega_over_eps(p.eps);
  r.omega = overrides_.omega_over_eps ? r.omega_over_eps * p.eps : omega_.value;
  r.theta_sup = overrides_.theta_sup ? *overrides_.theta_sup : theta_.value;
  r.theta_argmax = overrides_.theta_sup ? std::numeric_limits<double>::quiet_NaN() : theta_.argmax;
  r.u_eps_max = u_max(p.eps);
  r.ftilde_max = kappa > 0.0 ? ftilde_sup(2.0 / (kPi * kappa), lambda_, p.sigma)
                             : (lambda_ >= 1.0 - p.sigma ? ftilde_sup(1.0, lambda_, p.sigma)
                                                          : std::numeric_limits<double>::infinity());
  r.c_raw = c_constant_raw(p.sigma, coupled_ftilde_sup(kappa, lambda_, p.sigma), r.u_eps_max);
  r.c_value = round_up_4(r.c_raw);
  r.a_tilde = a_tilde(r.omega_over_eps, r.c_value, p.sigma);
  r.j_value = j(p.eps, kappa);
  r.margin = stability_margin(p.q, p.alpha, r.a_tilde, r.j_value);
  r.stable = r.margin >= 0.0;

  if (!overrides_.omega_over_eps) {
    r.errors.omega = omega_.error_bound;
    r.converged = r.converged && omega_.converged();
    r.evaluations += omega_.evaluations;
  }
  if (!overrides_.theta_sup) {
    r.errors.theta_sup = theta_.error;
    r.converged = r.converged && theta_.converged;
  }
  if (moments_) {
    r.errors.j = moments_->error_bound(p.eps, kappa);
    r.converged = r.converged && moments_->converged();
    r.evaluations += moments_->evaluations();
  }
  return r;
}

AlphaSolution solve_alpha_c(const ChainModel& model, ChainParams p, double rel_tol) {
  auto margin_at = [&](double a) {
    p.alpha = a;
    return model.margin(p);
  };
  AlphaSolution out;
  double lo = 1e-9;
  double hi = kAlphaCeiling;
  if (margin_at(lo) < 0.0) {
    out.margin = margin_at(lo);
    return out;
  }
  out.certified = true;
  if (margin_at(hi) >= 0.0) {
    out.alpha_c = hi;
    out.margin = margin_at(hi);
    return out;
  }
  while (hi - lo > rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (margin_at(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++out.iterations;
  }
  out.alpha_c = lo;
  out.margin = margin_at(lo);
  return out;
}

AlphaSolution solve_alpha_c(int q, const CutoffProfile& profile, const ChainParams& base, const Overrides& overrides,
                            const QuadratureConfig& cfg, const SupSearch& search) {
  ChainModel model(profile, base.lambda, overrides, cfg, search);
  ChainParams p = base;
  p.q = q;
  return solve_alpha_c(model, p);
}

ConstantsReport compute_chain(const ChainParams& p, const CutoffProfile& profile, const Overrides& overrides,
                              const QuadratureConfig& cfg, bool solve, const SupSearch& search) {
  p.validate();
  ChainModel model(profile, p.lambda, overrides, cfg, search);
  ConstantsReport r = model.report(p);
  if (solve) {
    const AlphaSolution s = solve_alpha_c(model, p);
    r.alpha_c_certified = s.certified;
    if (s.certified) r.alpha_c = s.alpha_c;
    r.alpha_c_margin = s.margin;
  }
  return r;
}

// ---- Nelder-Mead --------------------------------------------------------------

namespace {

struct ModelCache {
  const Overrides& overrides;
  const QuadratureConfig& cfg;
  const SupSearch& search;
  std::map<std::array<double, 4>, std::shared_ptr<ChainModel>> models;

  // sigma, lambda, plateau, h exponent; null when the point is infeasible
  std::shared_ptr<ChainModel> get(const SearchPoint& x) {
    const std::array<double, 4> key{x[0], x[2], x[3], x[4]};
    auto it = models.find(key);
    if (it != models.end()) return it->second;
    std::shared_ptr<ChainModel> m;
    try {
      m = std::make_shared<ChainModel>(CutoffProfile(x[0], x[3], x[4]), x[2], overrides, cfg, search);
    } catch (const std::invalid_argument&) {
    }
    models.emplace(key, m);
    return m;
  }
};

ChainParams params_at(const SearchPoint& x, int q) {
  ChainParams p;
  p.sigma = x[0];
  p.eps = x[1];
  p.lambda = x[2];
  p.q = q;
  return p;
}

}  // namespace

OptimizeResult optimize_parameters(const OptimizeOptions& options, const QuadratureConfig& cfg) {
  ModelCache cache{options.overrides, cfg, options.search, {}};
  int evaluations = 0;
  auto objective = [&](const SearchPoint& x) {
    ++evaluations;
    if (!(x[1] > 0.0)) return 0.0;
    const auto model = cache.get(x);
    if (!model) return 0.0;
    const AlphaSolution s = solve_alpha_c(*model, params_at(x, options.q));
    return s.certified ? s.alpha_c : 0.0;
  };

  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < kSearchDims; ++k)
    if (options.free[k]) dims.push_back(k);

  struct Vertex {
    SearchPoint x;
    double f;  // alpha_c, maximized
  };
  std::vector<Vertex> simplex;
  simplex.push_back({options.start, objective(options.start)});
  const double start_value = simplex.front().f;
  for (std::size_t k : dims) {
    SearchPoint x = options.start;
    x[k] += options.step[k];
    simplex.push_back({x, objective(x)});
  }
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f > b.f; });
  };
  auto combine = [&](const SearchPoint& c, const SearchPoint& w, double t) {
    SearchPoint out = c;
    for (std::size_t k : dims) out[k] = c[k] + t * (w[k] - c[k]);
    return out;
  };

  const std::size_t n = dims.size();
  order();
  while (n > 0 && evaluations < options.max_evaluations) {
    double size = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k : dims) size = std::max(size, std::fabs(simplex[i].x[k] - simplex[0].x[k]));
    if (size < options.x_tol && simplex[0].f - simplex[n].f < options.f_tol) break;

    SearchPoint centroid = simplex[0].x;
    for (std::size_t k : dims) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += simplex[i].x[k];
      centroid[k] = s / static_cast<double>(n);
    }
    const Vertex worst = simplex[n];
    const SearchPoint xr = combine(centroid, worst.x, -1.0);
    const double fr = objective(xr);
    if (fr > simplex[0].f) {
      const SearchPoint xe = combine(centroid, worst.x, -2.0);
      const double fe = objective(xe);
      simplex[n] = fe > fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr > simplex[n - 1].f) {
      simplex[n] = {xr, fr};
    } else {
      const bool outside = fr > worst.f;
      const SearchPoint xc = combine(centroid, outside ? xr : worst.x, 0.5);
      const double fc = objective(xc);
      if (fc > (outside ? fr : worst.f)) {
        simplex[n] = {xc, fc};
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          simplex[i].x = combine(simplex[0].x, simplex[i].x, 0.5);
          simplex[i].f = objective(simplex[i].x);
        }
      }
    }
    order();
  }

  OptimizeResult out;
  const SearchPoint best = simplex[0].x;
  out.params = params_at(best, options.q);
  out.start_alpha_c = start_value;
  out.evaluations = evaluations;
  const auto model = cache.get(best);
  if (model) {
    out.profile = model->profile();
    const AlphaSolution s = solve_alpha_c(*model, out.params);
    out.certified = s.certified;
    out.params.alpha = s.certified ? s.alpha_c : 0.0;
    out.report = model->report(out.params);
    out.report.alpha_c_certified = s.certified;
    if (s.certified) out.report.alpha_c = s.alpha_c;
    out.report.alpha_c_margin = s.margin;
  }
  return out;
}

}  // namespace stabcert
