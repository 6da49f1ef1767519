#include "stabcert/battery.hpp"

#include <algorithm>
#include <sstream>

#include "stabcert/parallel.hpp"

namespace stabcert {

namespace {

constexpr double kCriticalCoupling = 2.0 / kPi;

std::string tagged(const std::string& name, const std::string& tag) { return name + "[" + tag + "]"; }

std::string radius_tag(double r) {
  std::ostringstream out;
  out << "R=" << r;
  return out.str();
}

void annotate(CheckResult& r, const std::string& key, double value) {
  for (auto& row : r.rows) row[key] = value;
}

CheckResult operator_invariants(const std::vector<const LatticeOperator*>& ops) {
  CheckResult out;
  out.name = "kinetic_operator_invariants";
  out.tolerance = 1e-12;
  out.passed = true;
  for (const auto* op : ops) {
    const double herm = op->hermiticity_error();
    const double lowest = op->spectrum()[0];
    out.rows.push_back({{"hermiticity_error", herm}, {"lowest_eigenvalue", lowest}});
    out.measured = std::max(out.measured, herm);
    if ((herm > 1e-12 || lowest < -1e-10) && out.passed) {
      out.passed = false;
      out.detail = op->description + " hermiticity " + std::to_string(herm) + " lowest " + std::to_string(lowest);
    }
  }
  if (out.passed) out.detail = std::to_string(ops.size()) + " operators Hermitian and nonnegative";
  return out;
}

}  // namespace

std::vector<CheckResult> run_exact_suite(const ExactSettings& s, const CutoffProfile& profile, std::uint64_t seed,
                                         std::size_t workers) {
  const LatticeGrid grid{s.n, s.spacing};
  const auto k0 = build_magnetic_kinetic(grid, GaugeField::none());
  const auto h0 = dirichlet_compress(add_coulomb(k0, kCriticalCoupling), s.trace_radius);
  const auto partition = radial_partition(k0, profile);

  std::vector<CheckResult> out;
  std::vector<CheckResult> pointwise, trace, ims;
  std::vector<const LatticeOperator*> invariants{&k0};
  CheckResult gauge_invariants;

  {
    const auto kg = build_magnetic_kinetic(grid, GaugeField::pure_gauge(seed));
    out.push_back(check_spectra_match("gauge_invariance", k0, kg, 1e-10));
    gauge_invariants = operator_invariants({&kg});
  }
  out.push_back(check_uniform_gauges(LatticeGrid{s.n, s.spacing, Boundary::open}, s.uniform_b));

  auto zero_ims = check_ims_identity(k0.heat_kernel(s.ims_time), partition, seed, s.ims_vectors);
  annotate(zero_ims, "field_b", 0.0);
  ims.push_back(zero_ims);

  const auto ku = build_magnetic_kinetic(grid, GaugeField::uniform(s.uniform_b));
  invariants.push_back(&ku);
  {
    const auto hu = dirichlet_compress(add_coulomb(ku, kCriticalCoupling), s.trace_radius);
    auto tr = check_diamagnetic_trace(hu, h0, s.times);
    auto pw = check_diamagnetic_pointwise(ku, k0, s.times);
    auto im = check_ims_identity(ku.heat_kernel(s.ims_time), partition, seed + 1, s.ims_vectors);
    for (auto* r : {&tr, &pw, &im}) annotate(*r, "field_b", s.uniform_b);
    trace.push_back(tr);
    pointwise.push_back(pw);
    ims.push_back(im);
  }

  // Random fields fan out; each slot is written by exactly one worker.
  const auto count = static_cast<std::size_t>(s.random_fields);
  std::vector<CheckResult> rp(count), rb(count), rt(count), ri(count), rinv(count);
  parallel_for(
      count,
      [&](std::size_t i) {
        const std::uint64_t field_seed = seed + 100 + i;
        const auto km = build_magnetic_kinetic(grid, GaugeField::random(field_seed, s.field_amplitude));
        const auto hm = dirichlet_compress(add_coulomb(km, kCriticalCoupling), s.trace_radius);
        rp[i] = check_diamagnetic_pointwise(km, k0, s.times);
        rb[i] = check_diamagnetic_pointwise(hm, h0, s.times);
        rb[i].name = "diamagnetic_pointwise_ball";
        rt[i] = check_diamagnetic_trace(hm, h0, s.times);
        rinv[i] = operator_invariants({&km});
        if (i == 0) ri[i] = check_ims_identity(km.heat_kernel(s.ims_time), partition, seed + 2, s.ims_vectors);
        for (auto* r : {&rp[i], &rb[i], &rt[i], &ri[i]}) annotate(*r, "field_seed", static_cast<double>(field_seed));
      },
      workers);
  for (std::size_t i = 0; i < count; ++i) {
    pointwise.push_back(rp[i]);
    pointwise.push_back(rb[i]);
    trace.push_back(rt[i]);
    if (i == 0) ims.push_back(ri[i]);
  }

  rinv.push_back(operator_invariants(invariants));
  rinv.push_back(gauge_invariants);
  out.push_back(merge_checks("kinetic_operator_invariants", rinv));
  out.push_back(merge_checks("diamagnetic_pointwise", pointwise));
  out.push_back(merge_checks("diamagnetic_trace", trace));
  out.push_back(merge_checks("ims_identity", ims));
  out.push_back(check_transfer_scalar(s.transfer_lambdas));
  return out;
}

std::vector<CheckResult> run_riesz_suite(const ContinuumSettings& s) {
  std::vector<CheckResult> out;
  for (double r : s.radii) {
    const LatticeGrid grid{s.n, s.spacing_per_radius * r};
    const auto lams = lambda_window(0.5 * grid.uv_scale(), s.lambda_points);
    const auto k0 = build_magnetic_kinetic(grid, GaugeField::none());
    const auto free_curve = measure_ball_riesz(k0, r, lams);
    auto bly = check_bly(k0, r, lams);
    const auto kb = build_magnetic_kinetic(grid, GaugeField::uniform(s.uniform_b));
    const auto mag_curve = measure_ball_riesz(kb, r, lams);

    const std::string tag = radius_tag(r);
    auto free_check = check_ball_riesz(free_curve, r, false);
    auto mag_check = check_ball_riesz(mag_curve, r, true);
    auto transfer = check_transfer_operator(mag_curve, free_curve.fitted_m);
    free_check.name = tagged(free_check.name, tag);
    mag_check.name = tagged(mag_check.name, tag);
    transfer.name = tagged(transfer.name, tag);
    bly.name = tagged(bly.name, tag);
    out.push_back(std::move(free_check));
    out.push_back(std::move(mag_check));
    out.push_back(std::move(transfer));
    out.push_back(std::move(bly));
  }
  return out;
}

std::vector<CheckResult> run_localization_suite(const ContinuumSettings& s, const ChainParams& params,
                                                const CutoffProfile& profile, const QuadratureConfig& cfg,
                                                std::uint64_t seed) {
  const LatticeGrid grid{s.localization_n, s.localization_spacing};
  const auto k0 = build_magnetic_kinetic(grid, GaugeField::none());
  const auto om = omega(profile, cfg);
  const double omega_over_eps = om.value / params.eps;
  const auto u = radial_potential(k0, [&](double r) { return u_eps_star(r, params, profile, cfg); });
  const auto partition = radial_partition(k0, profile);

  std::vector<CheckResult> out;
  auto zero = check_localization_bound(k0, partition, u, omega_over_eps, DensityMatrix::zero(k0.size()));
  zero.name = tagged(zero.name, "gamma=0");
  out.push_back(zero);

  auto low = check_localization_bound(k0, partition, u, omega_over_eps,
                                      DensityMatrix::lowest_modes(k0.eigen(), s.lowest_modes));
  low.name = tagged(low.name, "lowest modes");
  out.push_back(low);

  const auto kb = build_magnetic_kinetic(grid, GaugeField::uniform(s.uniform_b));
  std::vector<CheckResult> random;
  for (int i = 0; i < s.density_seeds; ++i) {
    const std::uint64_t g_seed = seed + 200 + static_cast<std::uint64_t>(i);
    auto r = check_localization_bound(kb, partition, u, omega_over_eps,
                                      DensityMatrix::random(static_cast<Eigen::Index>(kb.size()), s.density_rank,
                                                            s.density_bound, g_seed));
    annotate(r, "density_seed", static_cast<double>(g_seed));
    random.push_back(std::move(r));
  }
  if (!random.empty()) out.push_back(merge_checks("localization_bound[uniform field]", random, true));
  for (auto& r : out) {
    annotate(r, "omega_over_eps", omega_over_eps);
    annotate(r, "omega_error", om.error_bound);
  }
  return out;
}

std::vector<CheckResult> run_kato_suite(const KatoSettings& s) {
  std::vector<LatticeOperator> kinetics;
  for (int n : s.sizes) kinetics.push_back(build_magnetic_kinetic(LatticeGrid{n, s.extent / n}, GaugeField::none()));
  std::vector<CheckResult> out;
  out.push_back(check_kato(kinetics, kCriticalCoupling, s.radius, KatoRegime::critical));
  if (s.include_supercritical) {
    auto super = check_kato(kinetics, s.supercritical_factor * kCriticalCoupling, s.radius, KatoRegime::supercritical);
    super.expected_fail = true;
    out.push_back(std::move(super));
  }
  return out;
}

std::vector<CheckResult> run_battery(const RunConfig& config, std::size_t workers) {
  std::vector<CheckResult> out;
  const auto profile = config.cutoff_profile();
  auto append = [&out](std::vector<CheckResult> part) {
    for (auto& c : part) out.push_back(std::move(c));
  };
  if (config.suite != Suite::continuum) append(run_exact_suite(config.lattice.exact, profile, config.seed, workers));
  if (config.suite != Suite::exact) {
    append(run_riesz_suite(config.lattice.continuum));
    append(run_localization_suite(config.lattice.continuum, config.chain, profile, config.quadrature, config.seed));
    append(run_kato_suite(config.lattice.kato));
  }
  return out;
}

}  // namespace stabcert
