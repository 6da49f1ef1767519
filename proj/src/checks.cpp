#include "stabcert/checks.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace stabcert {

using cd = std::complex<double>;

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

/// Re tr(A B) without forming the product.
double trace_product(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

double ball_volume(double r) { return 4.0 / 3.0 * kPi * r * r * r; }

}  // namespace

RieszMeanCurve riesz_curve(const Eigen::VectorXd& spectrum, const std::vector<double>& lambdas, std::string label) {
  RieszMeanCurve curve;
  curve.label = std::move(label);
  curve.lambdas = lambdas;
  curve.values.reserve(lambdas.size());
  for (double lam : lambdas) {
    const double v = riesz_mean(spectrum, lam);
    curve.values.push_back(v);
    if (lam > 0.0) curve.fitted_m = std::max(curve.fitted_m, v / std::pow(lam, 4));
  }
  return curve;
}

std::vector<double> lambda_window(double lam_max, int count) {
  if (count < 1 || !(lam_max > 0.0)) throw std::invalid_argument("lambda window needs count >= 1 and lam_max > 0");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) out[static_cast<std::size_t>(k - 1)] = lam_max * k / count;
  return out;
}

void DensityMatrix::validate(double tol) const {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("density matrix is not square");
  if (!(norm_bound >= 0.0)) throw std::invalid_argument("density matrix bound q must be nonnegative");
  if (matrix.size() == 0) return;
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("density matrix is not Hermitian");
  const Eigen::VectorXd ev = eigenvalues(matrix);
  if (ev[0] < -tol || ev[ev.size() - 1] > norm_bound + tol) {
    throw std::invalid_argument("density matrix spectrum [" + fmt(ev[0]) + ", " + fmt(ev[ev.size() - 1]) +
                                "] leaves [0, " + fmt(norm_bound) + "]");
  }
}

double DensityMatrix::operator_norm() const {
  if (matrix.size() == 0) return 0.0;
  const Eigen::VectorXd ev = eigenvalues(matrix);
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

DensityMatrix DensityMatrix::lowest_modes(const EigenSystem<Eigen::MatrixXcd>& es, int count, double q) {
  if (count < 0 || count > es.vectors.cols()) throw std::invalid_argument("mode count out of range");
  const auto v = es.vectors.leftCols(count);
  return {q * v * v.adjoint(), q};
}

DensityMatrix DensityMatrix::random(Eigen::Index dim, int rank, double q, std::uint64_t seed) {
  if (rank < 0 || rank > dim) throw std::invalid_argument("density matrix rank out of range");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd z(dim, rank);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) z(i, j) = cd(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  const Eigen::MatrixXcd basis = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, rank);
  std::uniform_real_distribution<double> u(0.0, q);
  Eigen::VectorXd weights(rank);
  for (Eigen::Index j = 0; j < rank; ++j) weights[j] = u(rng);
  Eigen::MatrixXcd m = basis * weights.asDiagonal() * basis.adjoint();
  return {0.5 * (m + m.adjoint()), q};
}

DensityMatrix DensityMatrix::zero(Eigen::Index dim, double q) { return {Eigen::MatrixXcd::Zero(dim, dim), q}; }

CheckResult merge_checks(const std::string& name, const std::vector<CheckResult>& parts, bool lower_is_worse) {
  CheckResult out;
  out.name = name;
  out.passed = true;
  if (parts.empty()) return out;
  out.tolerance = parts.front().tolerance;
  out.expected_fail = parts.front().expected_fail;
  out.measured = parts.front().measured;
  for (const auto& p : parts) {
    out.passed = out.passed && p.passed;
    out.measured = lower_is_worse ? std::min(out.measured, p.measured) : std::max(out.measured, p.measured);
    if (!p.passed && out.detail.empty()) out.detail = p.name + ": " + p.detail;
    for (const auto& row : p.rows) out.rows.push_back(row);
    for (const auto& c : p.curves) out.curves.push_back(c);
  }
  if (out.detail.empty()) out.detail = std::to_string(parts.size()) + " configurations";
  return out;
}

CheckResult check_spectra_match(const std::string& name, const LatticeOperator& a, const LatticeOperator& b, double tol) {
  CheckResult out;
  out.name = name;
  out.tolerance = tol;
  const Eigen::VectorXd sa = a.spectrum();
  const Eigen::VectorXd sb = b.spectrum();
  if (sa.size() != sb.size()) throw std::invalid_argument("spectra of different sizes");
  out.measured = sa.size() ? (sa - sb).cwiseAbs().maxCoeff() : 0.0;
  out.passed = out.measured < tol;
  out.detail = a.description + " vs " + b.description;
  out.rows.push_back({{"max_abs_difference", out.measured}, {"sites", static_cast<double>(sa.size())}});
  return out;
}

CheckResult check_uniform_gauges(const LatticeGrid& grid, double b, double tol) {
  const auto sym = build_magnetic_laplacian(grid, GaugeField::uniform(b, GaugeField::Gauge::symmetric));
  const auto landau = build_magnetic_laplacian(grid, GaugeField::uniform(b, GaugeField::Gauge::landau));
  return check_spectra_match("uniform_gauge_equivalence", sym, landau, tol);
}

CheckResult check_diamagnetic_trace(const LatticeOperator& magnetic, const LatticeOperator& free,
                                    const std::vector<double>& times, double tol) {
  CheckResult out;
  out.name = "diamagnetic_trace";
  out.tolerance = tol;
  out.passed = true;
  out.measured = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd sm = magnetic.spectrum();
  const Eigen::VectorXd sf = free.spectrum();
  double worst_ratio = 0.0;
  for (double t : times) {
    const double tm = heat_trace(sm, t);
    const double tf = heat_trace(sf, t);
    const double ratio = tm / tf;
    const double violation = ratio - 1.0;
    out.rows.push_back({{"t", t}, {"magnetic", tm}, {"free", tf}, {"ratio", ratio}});
    out.measured = std::max(out.measured, violation);
    worst_ratio = std::max(worst_ratio, ratio);
    if (violation > tol && out.passed) {
      out.passed = false;
      out.detail = "t=" + fmt(t) + " ratio=" + fmt(ratio);
    }
  }
  if (out.passed) out.detail = magnetic.description + ": max ratio " + fmt(worst_ratio);
  return out;
}

CheckResult check_diamagnetic_trace(const LatticeGrid& grid, const GaugeField& field, const std::vector<double>& times,
                                    double radius, double coupling) {
  const auto hm = dirichlet_compress(add_coulomb(build_magnetic_kinetic(grid, field), coupling), radius);
  const auto hf = dirichlet_compress(add_coulomb(build_magnetic_kinetic(grid, GaugeField::none()), coupling), radius);
  return check_diamagnetic_trace(hm, hf, times);
}

CheckResult check_diamagnetic_pointwise(const LatticeOperator& magnetic, const LatticeOperator& free,
                                        const std::vector<double>& times, double tol) {
  CheckResult out;
  out.name = "diamagnetic_pointwise";
  out.tolerance = tol;
  out.passed = true;
  out.measured = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const Eigen::MatrixXcd km = magnetic.heat_kernel(t);
    const Eigen::MatrixXd kf = free.heat_kernel(t).real();
    const double scale = kf.cwiseAbs().maxCoeff();
    const double violation = (km.cwiseAbs() - kf).maxCoeff() / scale;
    out.rows.push_back({{"t", t}, {"relative_violation", violation}});
    out.measured = std::max(out.measured, violation);
    if (violation > tol && out.passed) {
      out.passed = false;
      out.detail = "t=" + fmt(t) + " violation=" + fmt(violation);
    }
  }
  if (out.passed) out.detail = magnetic.description;
  return out;
}

TransferMinimum transfer_minimum(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("transfer minimization needs lambda > 0");
  // Minimize the logarithm over log t; the objective is strictly convex there.
  auto f = [lambda](double s) { return std::log(24.0) + std::exp(s) * lambda - 4.0 * s - 1.0; };
  const double centre = std::log(1.0 / lambda);
  const auto [s, v] = boost::math::tools::brent_find_minima(f, centre - 10.0, centre + 10.0,
                                                            std::numeric_limits<double>::digits);
  return {lambda, std::exp(s), std::exp(v)};
}

CheckResult check_transfer_scalar(const std::vector<double>& lambdas, double tol) {
  CheckResult out;
  out.name = "transfer_scalar";
  out.tolerance = tol;
  out.passed = true;
  for (double lam : lambdas) {
    const auto m = transfer_minimum(lam);
    const double t_err = std::abs(m.t * lam / 4.0 - 1.0);
    const double v_err = std::abs(m.value / (3.0 / 32.0 * std::exp(3.0) * std::pow(lam, 4)) - 1.0);
    out.rows.push_back({{"lambda", lam}, {"t", m.t}, {"value", m.value}, {"t_rel_error", t_err}, {"value_rel_error", v_err}});
    out.measured = std::max({out.measured, t_err, v_err});
    if (std::max(t_err, v_err) > tol && out.passed) {
      out.passed = false;
      out.detail = "lambda=" + fmt(lam) + " t=" + fmt(m.t);
    }
  }
  return out;
}

CheckResult check_transfer_operator(const RieszMeanCurve& magnetic, double m_free, double slack) {
  CheckResult out;
  out.name = "transfer_operator";
  out.tolerance = slack;
  out.passed = true;
  out.measured = -std::numeric_limits<double>::infinity();
  const double k = transfer_constant(m_free);
  for (std::size_t i = 0; i < magnetic.lambdas.size(); ++i) {
    const double lam = magnetic.lambdas[i];
    const double bound = k * std::pow(lam, 4);
    const double value = magnetic.values[i];
    // Relative excess over the bound; 0 <= 0 counts as no excess.
    const double excess = bound > 0.0 ? value / bound - 1.0 : (value > 0.0 ? 1.0 : -1.0);
    out.rows.push_back({{"lambda", lam}, {"value", value}, {"bound", bound}});
    out.measured = std::max(out.measured, excess);
    if (excess > slack && out.passed) {
      out.passed = false;
      out.detail = "lambda=" + fmt(lam) + " value=" + fmt(value) + " bound=" + fmt(bound);
    }
  }
  if (magnetic.lambdas.empty()) out.measured = -1.0;
  if (out.passed) out.detail = "M_free=" + fmt(m_free) + " transferred=" + fmt(k);
  return out;
}

std::vector<Eigen::VectorXd> radial_partition(const LatticeOperator& op, const CutoffProfile& profile, double scale) {
  Eigen::VectorXd c1(static_cast<Eigen::Index>(op.size())), c0(static_cast<Eigen::Index>(op.size()));
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double t = op.grid.radius(op.sites[i]) / scale;
    c1[static_cast<Eigen::Index>(i)] = profile.chi1(t);
    c0[static_cast<Eigen::Index>(i)] = profile.chi0(t);
  }
  return {c1, c0};
}

Eigen::VectorXd radial_potential(const LatticeOperator& op, const std::function<double(double)>& f) {
  std::map<double, double> cache;
  Eigen::VectorXd v(static_cast<Eigen::Index>(op.size()));
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double r = op.grid.radius(op.sites[i]);
    auto it = cache.find(r);
    if (it == cache.end()) it = cache.emplace(r, f(r)).first;
    v[static_cast<Eigen::Index>(i)] = it->second;
  }
  return v;
}

double ims_deviation(const Eigen::MatrixXcd& kernel, const std::vector<Eigen::VectorXd>& partition,
                     const Eigen::VectorXcd& u) {
  const Eigen::Index n = kernel.rows();
  const Eigen::MatrixXcd one_minus_k = Eigen::MatrixXcd::Identity(n, n) - kernel;
  double lhs = 0.0;
  double correction = 0.0;
  for (const auto& chi : partition) {
    const Eigen::VectorXcd cu = chi.cast<cd>().cwiseProduct(u);
    lhs += cu.dot(one_minus_k * cu).real();
    for (Eigen::Index y = 0; y < n; ++y) {
      cd col = 0.0;
      for (Eigen::Index x = 0; x < n; ++x) {
        const double d = chi[x] - chi[y];
        col += kernel(x, y) * (d * d) * std::conj(u[x]);
      }
      correction += (col * u[y]).real();
    }
  }
  const double rhs = u.dot(one_minus_k * u).real() + 0.5 * correction;
  return std::abs(lhs - rhs) / u.squaredNorm();
}

CheckResult check_ims_identity(const Eigen::MatrixXcd& kernel, const std::vector<Eigen::VectorXd>& partition,
                               std::uint64_t seed, int vectors, double tol) {
  const Eigen::Index n = kernel.rows();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  for (const auto& chi : partition) {
    if (chi.size() != n) throw std::invalid_argument("partition vector has wrong length");
    sum += chi.cwiseAbs2();
  }
  if (n > 0 && (sum.array() - 1.0).abs().maxCoeff() > 1e-12)
    throw std::invalid_argument("partition does not satisfy sum chi_j^2 = 1 on the sites");

  CheckResult out;
  out.name = "ims_identity";
  out.tolerance = tol;
  out.passed = true;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int v = 0; v < vectors; ++v) {
    Eigen::VectorXcd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = cd(g(rng), g(rng));
    const double dev = ims_deviation(kernel, partition, u);
    out.rows.push_back({{"vector", static_cast<double>(v)}, {"deviation", dev}});
    out.measured = std::max(out.measured, dev);
  }
  out.passed = out.measured < tol;
  out.detail = std::to_string(vectors) + " random vectors, max relative deviation " + fmt(out.measured);
  return out;
}

RieszMeanCurve measure_ball_riesz(const LatticeOperator& kinetic, double radius, const std::vector<double>& lambdas,
                                  double coupling) {
  const double cap = kinetic.grid.uv_scale();
  for (double lam : lambdas)
    if (!(lam >= 0.0) || lam > cap) throw std::invalid_argument("Riesz level outside [0, pi/a]");
  const auto h = dirichlet_compress(add_coulomb(kinetic, coupling), radius);
  std::ostringstream label;
  label << h.description;
  return riesz_curve(h.spectrum(), lambdas, label.str());
}

CheckResult check_ball_riesz(const RieszMeanCurve& curve, double radius, bool magnetic, double slack) {
  CheckResult out;
  out.name = magnetic ? "ball_riesz_magnetic" : "ball_riesz_free";
  const double constant = magnetic ? kBallConstant : kBallRieszConstant;
  const double bound = constant * radius * radius * radius * (1.0 + slack);
  out.tolerance = bound;
  out.measured = curve.fitted_m;
  out.passed = curve.fitted_m <= bound;
  out.detail = "R=" + fmt(radius) + " fitted_m=" + fmt(curve.fitted_m) + " bound=" + fmt(bound);
  out.rows.push_back({{"radius", radius}, {"fitted_m", curve.fitted_m}, {"bound", bound},
                      {"fitted_m_over_r3", curve.fitted_m / (radius * radius * radius)}});
  out.curves.push_back(curve);
  return out;
}

CheckResult check_bly(const LatticeOperator& free_kinetic, double radius, const std::vector<double>& lambdas,
                      double slack) {
  const double window = 0.5 * free_kinetic.grid.uv_scale();
  for (double lam : lambdas)
    if (!(lam >= 0.0) || lam > window * (1.0 + 1e-12)) throw std::invalid_argument("BLY level outside [0, pi/(2a)]");
  const auto h = dirichlet_compress(free_kinetic, radius);
  const auto curve = riesz_curve(h.spectrum(), lambdas, h.description);

  CheckResult out;
  out.name = "bly";
  out.tolerance = slack;
  out.passed = true;
  out.measured = std::numeric_limits<double>::infinity();
  const double vol = ball_volume(radius);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lam = lambdas[i];
    const double bound = std::pow(lam, 4) * vol / (24.0 * kPi * kPi) * (1.0 + slack);
    const double margin = bound - curve.values[i];
    const double rel = bound > 0.0 ? margin / bound : 0.0;
    out.rows.push_back({{"lambda", lam}, {"value", curve.values[i]}, {"bound", bound}, {"margin", margin},
                        {"relative_margin", rel}});
    // The smallest relative margin is reported; lambda = 0 gives 0 <= 0.
    if (lam > 0.0) out.measured = std::min(out.measured, rel);
    if ((lam > 0.0 ? margin <= 0.0 : margin < 0.0) && out.passed) {
      out.passed = false;
      out.detail = "lambda=" + fmt(lam) + " value=" + fmt(curve.values[i]) + " bound=" + fmt(bound);
    }
  }
  if (!std::isfinite(out.measured)) out.measured = 0.0;
  if (out.passed) out.detail = "R=" + fmt(radius) + " min relative margin " + fmt(out.measured);
  out.curves.push_back(curve);
  return out;
}

CheckResult check_kato(const std::vector<LatticeGrid>& grids, double coupling, double radius, KatoRegime regime) {
  std::vector<LatticeOperator> kinetics;
  kinetics.reserve(grids.size());
  for (const auto& g : grids) kinetics.push_back(build_magnetic_kinetic(g, GaugeField::none()));
  return check_kato(kinetics, coupling, radius, regime);
}

CheckResult check_kato(const std::vector<LatticeOperator>& free_kinetics, double coupling, double radius,
                       KatoRegime regime) {
  if (free_kinetics.size() < 3) throw std::invalid_argument("Kato trend needs at least three grids");
  std::vector<LatticeGrid> grids;
  for (const auto& k : free_kinetics) grids.push_back(k.grid);
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (!(grids[i].spacing < grids[i - 1].spacing)) throw std::invalid_argument("Kato grids must refine");

  CheckResult out;
  out.name = regime == KatoRegime::critical ? "kato_critical" : "kato_supercritical";
  std::vector<double> mins;
  for (const auto& k : free_kinetics) {
    const auto h = dirichlet_compress(add_coulomb(k, coupling), radius);
    const double lmin = h.spectrum()[0];
    mins.push_back(lmin);
    out.rows.push_back({{"n", static_cast<double>(k.grid.n)}, {"spacing", k.grid.spacing},
                        {"sites", static_cast<double>(h.size())}, {"coupling", coupling}, {"lambda_min", lmin}});
  }
  bool decreasing = true, increasing = true;
  for (std::size_t i = 1; i < mins.size(); ++i) {
    decreasing = decreasing && std::abs(mins[i]) < std::abs(mins[i - 1]);
    increasing = increasing && std::abs(mins[i]) > std::abs(mins[i - 1]);
  }
  const double finest_floor = -0.05 * grids.back().uv_scale();
  out.measured = mins.back();
  std::ostringstream seq;
  for (std::size_t i = 0; i < mins.size(); ++i) seq << (i ? ", " : "") << fmt(mins[i]);
  if (regime == KatoRegime::critical) {
    out.tolerance = finest_floor;
    out.passed = decreasing && mins.back() >= finest_floor;
    out.detail = "lambda_min sequence [" + seq.str() + "]" + (decreasing ? "" : ", magnitude not decreasing");
  } else {
    out.tolerance = 0.0;
    out.passed = increasing;
    out.detail = "lambda_min sequence [" + seq.str() + "]" + (increasing ? "" : ", magnitude not increasing");
  }
  return out;
}

CheckResult check_localization_bound(const LatticeOperator& kinetic, const std::vector<Eigen::VectorXd>& partition,
                                     const Eigen::VectorXd& u_diag, double omega_over_eps, const DensityMatrix& gamma,
                                     double slack) {
  const Eigen::Index n = static_cast<Eigen::Index>(kinetic.size());
  if (gamma.matrix.rows() != n || u_diag.size() != n) throw std::invalid_argument("localization inputs have mismatched sizes");
  gamma.validate();

  const double lhs = trace_product(gamma.matrix, kinetic.matrix);
  Eigen::MatrixXcd reduced = kinetic.matrix;
  reduced.diagonal() -= u_diag.cast<cd>();
  double local = 0.0;
  for (const auto& chi : partition) {
    const Eigen::VectorXcd c = chi.cast<cd>();
    const Eigen::MatrixXcd g = c.asDiagonal() * gamma.matrix * c.asDiagonal();
    local += trace_product(g, reduced);
  }
  const double rhs = local - omega_over_eps * gamma.operator_norm();

  CheckResult out;
  out.name = "localization_bound";
  // Slack relative to |lhs|; an empty gamma leaves the absolute difference.
  out.measured = lhs != 0.0 ? (lhs - rhs) / std::abs(lhs) : lhs - rhs;
  out.tolerance = -slack;
  out.passed = lhs - rhs >= -slack * std::abs(lhs);
  out.rows.push_back({{"lhs", lhs}, {"rhs", rhs}, {"slack", lhs - rhs}});
  out.detail = "lhs=" + fmt(lhs) + " rhs=" + fmt(rhs);
  return out;
}

}  // namespace stabcert
