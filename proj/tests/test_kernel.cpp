#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "doctest.h"
#include "stabcert/kernel.hpp"

using namespace stabcert;

namespace {

double cartesian_kernel(const double x[3], const double y[3], const CutoffProfile& p) {
  const double rx = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  const double ry = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
  const double a = p.chi0(rx) - p.chi0(ry);
  const double b = p.chi1(rx) - p.chi1(ry);
  return (a * a + b * b) / (2.0 * kPi * kPi * d2 * d2);
}

}  // namespace

TEST_CASE("cutoff profile validation") {
  CHECK_THROWS_AS(CutoffProfile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(CutoffProfile(0.34), std::invalid_argument);
  CHECK_THROWS_AS(CutoffProfile(0.3, 0.45, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(CutoffProfile(0.3, 0.4, 1.0), std::invalid_argument);
  CHECK_NOTHROW(CutoffProfile(0.3, 0.0, 0.0));
  const CutoffProfile ref(0.3);
  CHECK(ref.plateau() == doctest::Approx(0.4));
  CHECK(ref.h_exponent() == 0.5);
}

TEST_CASE("chi1 and chi0 values") {
  const CutoffProfile p(0.3, 0.4, 0.5);
  CHECK(p.chi1(0.0) == 1.0);
  CHECK(p.chi1(0.7) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.chi1(0.55) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
  CHECK(p.chi0(0.0) == 0.0);
  CHECK(p.chi0(2.0) == 1.0);
  CHECK(p.chi1(0.7000001) == 0.0);
  CHECK_THROWS_AS(p.chi1(-0.1), std::domain_error);
  CHECK(p.lipschitz() == doctest::Approx(kPi / 0.6));
}

TEST_CASE("partition of unity and support on a dense grid") {
  for (const auto& p : {CutoffProfile(0.3, 0.4, 0.5), CutoffProfile(0.1, 0.25, 0.2), CutoffProfile(0.2, 0.0, 0.0)}) {
    double worst = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double t = 1.5 * i / 100000.0;
      const double c0 = p.chi0(t);
      const double c1 = p.chi1(t);
      worst = std::max(worst, std::fabs(c0 * c0 + c1 * c1 - 1.0));
      if (t >= p.support_radius()) CHECK(c1 == 0.0);
      CHECK(c0 >= 0.0);
      CHECK(c1 >= 0.0);
    }
    CHECK(worst < 1e-14);
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 3.0);
  const CutoffProfile p(0.3);
  for (int i = 0; i < 1000; ++i) {
    const double t = dist(rng);
    CHECK(std::fabs(p.chi0(t) * p.chi0(t) + p.chi1(t) * p.chi1(t) - 1.0) < 1e-14);
  }
}

TEST_CASE("Lipschitz constant bounds finite differences") {
  const CutoffProfile p(0.25, 0.3, 0.5);
  const double lip = p.lipschitz();
  for (int i = 0; i < 2000; ++i) {
    const double a = i * 1e-3;
    const double b = a + 1e-4;
    CHECK(std::fabs(p.chi1(b) - p.chi1(a)) <= lip * 1e-4 * (1 + 1e-9));
    CHECK(std::fabs(p.chi0(b) - p.chi0(a)) <= lip * 1e-4 * (1 + 1e-9));
  }
}

TEST_CASE("weight h is positive on the ball") {
  const CutoffProfile p(0.3, 0.4, 0.5);
  for (int i = 0; i < 1000; ++i) CHECK(p.h(i / 1000.0) > 0.0);
  CHECK(p.h(0.0) == 1.0);
  CHECK(p.h(0.6) == doctest::Approx(1.0 / std::sqrt(0.64)));
  CHECK(std::isinf(p.h(1.0)));
}

TEST_CASE("localization kernel") {
  const CutoffProfile p(0.3, 0.4, 0.5);

  SUBCASE("vanishes outside the ball") {
    CHECK(localization_kernel({1.2, 1.5, 0.3}, p) == 0.0);
    CHECK(localization_kernel({1.0, 1.0, 0.9}, p) == 0.0);
    CHECK(localization_kernel({0.75, 3.0, -1.0}, p) == 0.0);
  }
  SUBCASE("coincident points stay finite") {
    const double v = localization_kernel({0.5, 0.5, 1.0}, p);
    CHECK(std::isfinite(v));
    CHECK(v == 0.0);
    const double near = localization_kernel({0.5, 0.5 + 1e-10, 1.0}, p);
    CHECK(std::isfinite(near));
    CHECK(near == doctest::Approx(p.lipschitz() * p.lipschitz() / (2 * kPi * kPi * 1e-16)));
  }
  SUBCASE("Cartesian cross-check") {
    const double x[3] = {0.0, 0.0, 0.2};
    const double y[3] = {0.0, 0.0, 0.9};
    const double expected = cartesian_kernel(x, y, p);
    CHECK(expected == doctest::Approx(2.0 / (2.0 * kPi * kPi * std::pow(0.7, 4))).epsilon(1e-14));
    CHECK(localization_kernel({0.2, 0.9, 1.0}, p) == doctest::Approx(expected).epsilon(1e-13));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-1.2, 1.2);
    for (int i = 0; i < 200; ++i) {
      double a[3], b[3];
      for (int k = 0; k < 3; ++k) {
        a[k] = coord(rng);
        b[k] = coord(rng);
      }
      const double ra = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
      const double rb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
      const double u = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (ra * rb);
      const double want = cartesian_kernel(a, b, p);
      CHECK(localization_kernel({ra, rb, u}, p) == doctest::Approx(want).epsilon(1e-9));
      // symmetry under swapping the radial arguments is exact
      CHECK(localization_kernel({ra, rb, u}, p) == localization_kernel({rb, ra, u}, p));
    }
  }
  SUBCASE("near-diagonal quadratic bound") {
    const double lip = p.lipschitz();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> rad(0.0, 1.0);
    std::uniform_real_distribution<double> small(1e-6, 1e-2);
    for (int i = 0; i < 2000; ++i) {
      const double r = rad(rng);
      const double s = r + small(rng);
      const double u = 1.0 - small(rng) * small(rng);
      const KernelPoint kp{r, s, u};
      const double d2 = kp.distance_squared();
      CHECK(localization_kernel(kp, p) <= lip * lip / (2 * kPi * kPi * d2) * (1 + 1e-12));
    }
  }
  SUBCASE("degenerate profile gives the zero kernel") {
    const auto t = CutoffProfile::trivial(0.3);
    CHECK(localization_kernel({0.1, 0.8, 0.2}, t) == 0.0);
    CHECK(t.lipschitz() == 0.0);
  }
}

TEST_CASE("kernel split") {
  const CutoffProfile p(0.3, 0.4, 0.5);
  const auto far = kernel_split({0.3, 0.8, 0.5}, p);  // distance > sigma
  CHECK(KernelPoint{0.3, 0.8, 0.5}.distance() > 0.3);
  CHECK(far.long_range == 0.0);
  CHECK(far.short_range > 0.0);
  const auto close = kernel_split({0.5, 0.6, 0.99}, p);
  CHECK(close.short_range == 0.0);
  CHECK(close.long_range > 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rad(0.0, 1.3), cosine(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const KernelPoint kp{rad(rng), rad(rng), cosine(rng)};
    const auto sp = kernel_split(kp, p);
    const double full = localization_kernel(kp, p);
    CHECK(std::fabs(sp.short_range + sp.long_range - full) <= 1e-14 * std::max(1.0, full));
  }
}

TEST_CASE("free relativistic heat kernel") {
  CHECK(heat_kernel_free(2.0, 0.0) == doctest::Approx(1.0 / (kPi * kPi * 8.0)).epsilon(1e-15));
  CHECK(heat_kernel_free(1.0, 1.0) == doctest::Approx(0.025330295910584444).epsilon(1e-14));
  CHECK_THROWS_AS(heat_kernel_free(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(heat_kernel_free(-1.0, 1.0), std::domain_error);

  // Normalization oracle: r = t tan(phi) maps [0, inf) to [0, pi/2); composite Simpson.
  for (double t : {0.1, 1.0, 7.5}) {
    const int n = 2000;
    const double h = (kPi / 2) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double phi = std::min(i * h, kPi / 2 - 1e-15);
      const double r = t * std::tan(phi);
      const double jac = t / (std::cos(phi) * std::cos(phi));
      const double g = 4.0 * kPi * r * r * heat_kernel_free(t, r) * jac;
      sum += g * ((i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2));
    }
    CHECK(sum * h / 3 == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("subordination") {
  CHECK_THROWS_AS(subordination_weight(0.0, 1.0), std::domain_error);
  boost::math::quadrature::exp_sinh<double> integrator;
  auto laplace = [&](double t, double xi) {
    return integrator.integrate([&](double s) { return subordination_weight(t, s) * std::exp(-s * xi * xi); });
  };
  CHECK(laplace(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(laplace(1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(laplace(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  CHECK(laplace(0.5, 3.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-10));

  // exp(-t|p|)(x,y) assembled from Gaussian heat kernels
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> tdist(0.05, 3.0), ddist(0.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double t = tdist(rng);
    const double d = ddist(rng);
    const double assembled =
        integrator.integrate([&](double s) { return subordination_weight(t, s) * gaussian_kernel(s, d); });
    CHECK(std::fabs(assembled / heat_kernel_free(t, d) - 1.0) < 1e-8);
  }
}

TEST_CASE("ftilde") {
  CHECK(ftilde(0.7, 1.0, 0.97) == doctest::Approx(1.0 / 1.02).epsilon(1e-15));
  CHECK(ftilde(0.0, 5.0, 0.97) == 0.5);
  const double z = 87.19;
  CHECK(ftilde(2.0, z, 0.97) == doctest::Approx((std::sqrt(174.38) + 0.5) / 2.0).epsilon(1e-15));
  // no continuity enforced at lambda
  CHECK(ftilde(0.97, z, 0.97) == doctest::Approx(0.5 / (1 - 0.97 * 0.97)));
  CHECK(ftilde(0.970001, z, 0.97) > 10.0);
  CHECK_THROWS_AS(ftilde(0.5, z, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ftilde(0.5, 0.0, 0.9), std::invalid_argument);
}
