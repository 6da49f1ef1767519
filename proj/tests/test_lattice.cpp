#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "stabcert/checks.hpp"

using namespace stabcert;

namespace {

const CutoffProfile kReference(0.3, 0.4, 0.5);

// Eigen's own solver serves as the oracle for LAPACK-backed spectra.
Eigen::VectorXd oracle_spectrum(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

Eigen::MatrixXd random_symmetric(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

LatticeOperator wrap(const Eigen::MatrixXd& m) {
  LatticeOperator op;
  op.matrix = m.cast<std::complex<double>>();
  op.grid = LatticeGrid{1, 1.0};
  op.sites.assign(static_cast<std::size_t>(m.rows()), 0);
  return op;
}

const LatticeOperator& free_n12() {
  static const LatticeOperator op = build_magnetic_kinetic(LatticeGrid{12, 0.25}, GaugeField::none());
  return op;
}

const LatticeOperator& free_n14() {
  static const LatticeOperator op = build_magnetic_kinetic(LatticeGrid{14, 0.25}, GaugeField::none());
  return op;
}

}  // namespace

TEST_CASE("grid geometry and size cap") {
  LatticeGrid g{6, 0.5};
  CHECK(g.sites() == 216);
  CHECK(g.uv_scale() == doctest::Approx(2.0 * kPi));
  double sx = 0, rmin = 1e9;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    sx += g.position(s)[0] + g.position(s)[1] + g.position(s)[2];
    rmin = std::min(rmin, g.radius(s));
  }
  CHECK(std::abs(sx) < 1e-12);
  CHECK(rmin == doctest::Approx(std::sqrt(3.0) * 0.25));

  LatticeGrid big{26, 0.1};
  try {
    big.validate();
    FAIL("oversized grid accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("16384") != std::string::npos);
  }
  CHECK_THROWS_AS(LatticeGrid({4, -1.0}).validate(), std::invalid_argument);
}

TEST_CASE("zero-field periodic spectrum matches Fourier diagonalization") {
  const LatticeGrid g{6, 0.4};
  const auto k = build_magnetic_kinetic(g, GaugeField::none());
  std::vector<double> expected;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b)
      for (int c = 0; c < g.n; ++c) {
        double sum = 0.0;
        for (int m : {a, b, c}) sum += 2.0 - 2.0 * std::cos(2.0 * kPi * m / g.n);
        expected.push_back(std::sqrt(sum) / g.spacing);
      }
  std::sort(expected.begin(), expected.end());
  const auto spec = k.spectrum();
  double worst = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) worst = std::max(worst, std::abs(spec[i] - expected[i]));
  CHECK(worst < 1e-10);
  CHECK(k.hermiticity_error() < 1e-12);
}

TEST_CASE("magnetic kinetic operators are Hermitian and nonnegative") {
  const LatticeGrid g{6, 0.4};
  for (const auto& f : {GaugeField::random(3, 2.0), GaugeField::uniform(1.0), GaugeField::pure_gauge(5)}) {
    const auto k = build_magnetic_kinetic(g, f);
    CHECK(k.hermiticity_error() < 1e-12);
    CHECK(k.spectrum()[0] >= -1e-10);
    CHECK_FALSE(k.real_valued);
  }
}

TEST_CASE("gauge invariance") {
  const LatticeGrid g{6, 0.4};
  const auto free = build_magnetic_kinetic(g, GaugeField::none());
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = check_spectra_match("pure_gauge", free, build_magnetic_kinetic(g, GaugeField::pure_gauge(seed)), 1e-10);
    CHECK(r.passed);
  }
  // Symmetric and Landau gauges of one uniform field differ by a gradient on the open cube.
  const auto u = check_uniform_gauges(LatticeGrid{6, 0.4, Boundary::open}, 1.0);
  CHECK(u.passed);
  CHECK(u.measured < 1e-8);
  // A genuine field changes the spectrum.
  const auto b = check_spectra_match("field", free, build_magnetic_kinetic(g, GaugeField::uniform(1.0)), 1e-10);
  CHECK_FALSE(b.passed);
}

TEST_CASE("Coulomb term") {
  const LatticeGrid g{6, 0.4};
  const auto k = build_magnetic_kinetic(g, GaugeField::none());
  const auto same = add_coulomb(k, 0.0);
  CHECK((same.matrix - k.matrix).cwiseAbs().maxCoeff() == 0.0);

  const double c = 2.0 / kPi;
  const auto h = add_coulomb(k, c);
  for (std::size_t s : {0ul, 37ul, 100ul}) {
    CHECK(h.matrix(s, s).real() - k.matrix(s, s).real() == doctest::Approx(-c / g.radius(s)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(add_coulomb(k, -1.0), std::invalid_argument);

  // Closed form of the unit-cube average of 1/|x|.
  const double cube_average = 3.0 * std::log(2.0 + std::sqrt(3.0)) - kPi / 2.0;
  CHECK(kCellAverageInverseRadius == doctest::Approx(cube_average).epsilon(1e-14));
  const LatticeGrid odd{5, 0.3};
  const std::size_t centre = odd.index(2, 2, 2);
  CHECK(odd.radius(centre) == 0.0);
  CHECK(coulomb_site_value(odd.position(centre), odd.spacing) == doctest::Approx(cube_average / 0.3));
}

TEST_CASE("Dirichlet compression") {
  const LatticeGrid g{6, 0.4};
  const auto k = build_magnetic_kinetic(g, GaugeField::none());
  const auto whole = dirichlet_compress(k, 100.0);
  CHECK(whole.size() == k.size());
  CHECK((whole.matrix - k.matrix).cwiseAbs().maxCoeff() == 0.0);

  const auto one = dirichlet_compress(k, 0.4);  // only the 8 sites at radius sqrt(3)/2 a
  CHECK(one.size() == 8);
  const auto single = dirichlet_compress(add_diagonal(k, Eigen::VectorXd::LinSpaced(216, 0.0, 1.0), "ramp"), 0.4);
  CHECK(single.matrix(0, 0).real() == doctest::Approx(k.matrix(single.sites[0], single.sites[0]).real() +
                                                      single.sites[0] / 215.0));
  CHECK_THROWS_AS(dirichlet_compress(k, 0.1), std::invalid_argument);

  const auto& full = free_n12();
  const auto ball = dirichlet_compress(full, 1.0);
  CHECK(ball.spectrum()[0] > full.spectrum()[0]);
  // A larger region has larger Riesz means.
  const auto inner = dirichlet_compress(full, 0.8);
  for (double lam : {2.0, 4.0, 6.0}) CHECK(riesz_mean(inner, lam) <= riesz_mean(ball, lam));
}

TEST_CASE("heat trace and Riesz mean") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  CHECK(heat_trace(wrap(d), 1.0) == doctest::Approx(std::exp(-1.0) + std::exp(-2.0)));
  CHECK(heat_trace(wrap(d), 1e-12) == doctest::Approx(2.0));
  CHECK_THROWS_AS(heat_trace(wrap(d), 0.0), std::invalid_argument);
  d(1, 1) = 3.0;
  CHECK(riesz_mean(wrap(d), 2.0) == doctest::Approx(1.0));
  CHECK(riesz_mean(wrap(d), 0.5) == 0.0);
  CHECK_THROWS_AS(riesz_mean(wrap(d), -1.0), std::invalid_argument);

  const Eigen::MatrixXd m = random_symmetric(50, 11);
  const Eigen::VectorXd ev = oracle_spectrum(m);
  double ht = 0.0, rm = 0.0;
  for (double l : ev) {
    ht += std::exp(-0.7 * l);
    rm += std::max(0.0, 1.3 - l);
  }
  CHECK(heat_trace(wrap(m), 0.7) == doctest::Approx(ht).epsilon(1e-12));
  CHECK(riesz_mean(wrap(m), 1.3) == doctest::Approx(rm).epsilon(1e-12));
}

TEST_CASE("diamagnetic trace inequality") {
  const LatticeGrid g{8, 0.375};
  const auto free = check_diamagnetic_trace(g, GaugeField::none(), {0.5, 1.0, 2.0}, 1.0);
  CHECK(free.passed);
  for (const auto& row : free.rows) CHECK(row.at("ratio") == doctest::Approx(1.0).epsilon(1e-14));

  const auto uniform = check_diamagnetic_trace(g, GaugeField::uniform(1.0), {0.5, 1.0, 2.0}, 1.0);
  CHECK(uniform.passed);
  for (const auto& row : uniform.rows) CHECK(row.at("ratio") <= 1.0);

  const LatticeGrid small{6, 0.5};
  const auto hf = dirichlet_compress(add_coulomb(build_magnetic_kinetic(small, GaugeField::none()), 2.0 / kPi), 1.2);
  std::vector<CheckResult> parts;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto hm =
        dirichlet_compress(add_coulomb(build_magnetic_kinetic(small, GaugeField::random(seed, 2.0)), 2.0 / kPi), 1.2);
    parts.push_back(check_diamagnetic_trace(hm, hf, {0.25, 1.0}));
  }
  const auto merged = merge_checks("diamagnetic_trace", parts);
  CHECK(merged.passed);
  CHECK(merged.rows.size() == 40);
}

TEST_CASE("diamagnetic pointwise domination") {
  const LatticeGrid g{6, 0.4};
  const auto free = build_magnetic_kinetic(g, GaugeField::none());
  for (std::uint64_t seed : {4u, 5u}) {
    const auto mag = build_magnetic_kinetic(g, GaugeField::random(seed, 2.0));
    CHECK(check_diamagnetic_pointwise(mag, free, {0.1, 1.0}).passed);
    const auto hm = dirichlet_compress(add_coulomb(mag, 2.0 / kPi), 1.0);
    const auto hf = dirichlet_compress(add_coulomb(free, 2.0 / kPi), 1.0);
    CHECK(check_diamagnetic_pointwise(hm, hf, {0.5}).passed);
  }
}

TEST_CASE("transfer lemma") {
  const auto m4 = transfer_minimum(4.0);
  CHECK(m4.t == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(m4.value == doctest::Approx(482.05).epsilon(1e-5));
  CHECK(transfer_minimum(1.0).t == doctest::Approx(4.0).epsilon(1e-7));
  // Brute-force scan of the objective as an independent oracle.
  double best_t = 0, best = 1e300;
  for (int i = 1; i <= 200000; ++i) {
    const double t = i * 1e-4;
    const double v = 24.0 * std::exp(t * 0.5) / (std::pow(t, 4) * std::exp(1.0));
    if (v < best) best = v, best_t = t;
  }
  const auto m05 = transfer_minimum(0.5);
  CHECK(m05.t == doctest::Approx(best_t).epsilon(1e-4));
  CHECK(m05.value == doctest::Approx(best).epsilon(1e-8));
  CHECK(check_transfer_scalar({0.5, 1.0, 4.0}).passed);
  CHECK_THROWS_AS(transfer_minimum(0.0), std::invalid_argument);

  RieszMeanCurve empty{"empty", {1.0, 2.0}, {0.0, 0.0}, 0.0};
  CHECK(check_transfer_operator(empty, 0.0).passed);
  RieszMeanCurve excess{"excess", {1.0}, {1.0}, 1.0};
  CHECK_FALSE(check_transfer_operator(excess, 0.1).passed);
}

TEST_CASE("IMS localization identity") {
  const LatticeGrid g{6, 0.4};
  const auto k0 = build_magnetic_kinetic(g, GaugeField::none());
  const std::vector<Eigen::VectorXd> single{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k0.size()))};
  const auto trivial = check_ims_identity(k0.heat_kernel(0.5), single, 1, 5);
  CHECK(trivial.passed);
  CHECK(trivial.measured < 1e-14);

  const auto part = radial_partition(k0, kReference);
  const auto free = check_ims_identity(k0.heat_kernel(0.5), part, 2);
  CHECK(free.passed);
  CHECK(free.measured < 1e-12);

  const auto kb = build_magnetic_kinetic(g, GaugeField::uniform(1.0));
  const auto mag = check_ims_identity(kb.heat_kernel(0.5), part, 3);
  CHECK(mag.measured < 1e-12);

  // The identity is algebraic: any Hermitian kernel satisfies it.
  const Eigen::MatrixXd r = random_symmetric(static_cast<int>(k0.size()), 9);
  CHECK(check_ims_identity(r.cast<std::complex<double>>(), part, 4).passed);

  std::vector<Eigen::VectorXd> broken = part;
  broken[0] *= 0.9;
  CHECK_THROWS_AS(check_ims_identity(k0.heat_kernel(0.5), broken, 5), std::invalid_argument);
}

TEST_CASE("density matrices") {
  const auto g = DensityMatrix::random(40, 10, 2.0, 7);
  CHECK_NOTHROW(g.validate());
  CHECK(g.operator_norm() <= 2.0 + 1e-12);
  const Eigen::VectorXd ev = eigenvalues(g.matrix);
  CHECK(std::count_if(ev.begin(), ev.end(), [](double v) { return v > 1e-12; }) == 10);
  DensityMatrix bad = g;
  bad.norm_bound = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("localization bound on the lattice") {
  const auto& k0 = free_n12();
  const ChainParams p;
  const QuadratureConfig cfg;
  const double omega_over_eps = omega(kReference, cfg).value / p.eps;
  const auto u = radial_potential(k0, [&](double r) { return u_eps_star(r, p, kReference, cfg); });
  const auto part = radial_partition(k0, kReference);

  const auto zero = check_localization_bound(k0, part, u, omega_over_eps, DensityMatrix::zero(k0.size()));
  CHECK(zero.passed);
  CHECK(zero.rows[0].at("lhs") == 0.0);
  CHECK(zero.rows[0].at("rhs") == 0.0);

  const auto low = check_localization_bound(k0, part, u, omega_over_eps, DensityMatrix::lowest_modes(k0.eigen(), 5));
  CHECK(low.passed);
  CHECK(low.measured > 0.0);

  const auto kb = build_magnetic_kinetic(LatticeGrid{12, 0.25}, GaugeField::uniform(1.0));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r =
        check_localization_bound(kb, part, u, omega_over_eps, DensityMatrix::random(kb.size(), 10, 2.0, seed));
    CHECK(r.passed);
  }
}

TEST_CASE("Berezin-Li-Yau on the ball") {
  const auto& k = free_n14();
  const auto zero = check_bly(k, 1.0, {0.0});
  CHECK(zero.passed);
  CHECK(zero.rows[0].at("value") == 0.0);
  CHECK(zero.rows[0].at("bound") == 0.0);

  const auto at3 = check_bly(k, 1.0, {3.0});
  CHECK(at3.passed);
  CHECK(at3.rows[0].at("margin") > 0.0);

  const auto window = lambda_window(0.5 * k.grid.uv_scale(), 24);
  const auto trend = check_bly(k, 1.0, window);
  CHECK(trend.passed);
  // Shrinking margin toward the window edge; shell structure allows small local upticks.
  double lower = 0.0, upper = 0.0, smallest = 1.0;
  const std::size_t half = trend.rows.size() / 2;
  for (std::size_t i = 0; i < trend.rows.size(); ++i) {
    const double m = trend.rows[i].at("relative_margin");
    (i < half ? lower : upper) += m;
    smallest = std::min(smallest, m);
  }
  CHECK(upper < lower);
  CHECK(trend.rows.back().at("relative_margin") == smallest);
  CHECK(trend.rows.back().at("relative_margin") < 0.5);
  CHECK_THROWS_AS(check_bly(k, 1.0, {k.grid.uv_scale()}), std::invalid_argument);
}

TEST_CASE("ball Riesz means") {
  const auto& k = free_n14();
  const auto lams = lambda_window(0.5 * k.grid.uv_scale(), 30);
  const auto curve = measure_ball_riesz(k, 1.0, lams);
  for (std::size_t i = 1; i < curve.values.size(); ++i) CHECK(curve.values[i] >= curve.values[i - 1]);
  const double lowest = dirichlet_compress(add_coulomb(k, 2.0 / kPi), 1.0).spectrum()[0];
  for (std::size_t i = 0; i < lams.size(); ++i)
    if (lams[i] <= lowest) CHECK(curve.values[i] == 0.0);
  CHECK(check_ball_riesz(curve, 1.0, false).passed);

  // Grids scaled with the radius resolve both balls alike.
  auto fitted = [](double radius, const GaugeField& f) {
    const LatticeGrid g{10, 0.3 * radius};
    const auto kin = build_magnetic_kinetic(g, f);
    return measure_ball_riesz(kin, radius, lambda_window(0.5 * g.uv_scale(), 20));
  };
  const auto small = fitted(0.5, GaugeField::none());
  const auto large = fitted(1.0, GaugeField::none());
  CHECK(small.fitted_m / large.fitted_m == doctest::Approx(0.125).epsilon(0.2));
  CHECK(check_ball_riesz(small, 0.5, false).passed);

  const auto mag = fitted(1.0, GaugeField::uniform(1.0));
  CHECK(check_ball_riesz(mag, 1.0, true).passed);
  CHECK(check_transfer_operator(mag, large.fitted_m).passed);
}

TEST_CASE("Kato criticality on refining grids") {
  std::vector<LatticeOperator> kin;
  for (int n : {10, 12, 14}) kin.push_back(build_magnetic_kinetic(LatticeGrid{n, 3.0 / n}, GaugeField::none()));

  const auto none = check_kato(kin, 0.0, 1.0, KatoRegime::critical);
  for (const auto& row : none.rows) CHECK(row.at("lambda_min") >= -1e-12);

  const auto critical = check_kato(kin, 2.0 / kPi, 1.0, KatoRegime::critical);
  CHECK(critical.passed);
  const auto super = check_kato(kin, 1.2 * 2.0 / kPi, 1.0, KatoRegime::supercritical);
  REQUIRE(super.rows.size() == 3);
  // Stronger coupling sits lower on every grid and drops faster under refinement.
  for (std::size_t i = 0; i < 3; ++i) CHECK(super.rows[i].at("lambda_min") < critical.rows[i].at("lambda_min"));
  const double drop_critical = critical.rows[0].at("lambda_min") - critical.rows[2].at("lambda_min");
  const double drop_super = super.rows[0].at("lambda_min") - super.rows[2].at("lambda_min");
  CHECK(drop_super > drop_critical);
  CHECK(drop_super > 0.0);

  CHECK_THROWS_AS(check_kato(std::vector<LatticeOperator>(kin.begin(), kin.begin() + 2), 0.5, 1.0,
                             KatoRegime::critical),
                  std::invalid_argument);
}
