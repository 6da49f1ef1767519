#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stabcert/kernel.hpp"
#include "stabcert/linalg.hpp"
#include "stabcert/quadrature.hpp"

namespace stabcert {

enum class Boundary { periodic, open };

/// Cubic grid of n^3 sites at positions (i - n/2 + 1/2) a per axis, centred on
/// the origin.
struct LatticeGrid {
  int n = 12;
  double spacing = 0.25;
  Boundary boundary = Boundary::periodic;

  static constexpr std::size_t kMaxSites = 16384;

  std::size_t sites() const;
  double extent() const { return n * spacing; }
  /// Largest lattice momentum pi / a.
  double uv_scale() const;
  std::size_t index(int i, int j, int k) const;
  Point3 position(std::size_t site) const;
  double radius(std::size_t site) const;
  /// Throws std::invalid_argument; the site cap keeps dense eigensolves feasible.
  void validate() const;
};

struct GaugeField {
  enum class Kind { zero, uniform, random, pure_gauge };
  enum class Gauge { symmetric, landau };

  Kind kind = Kind::zero;
  /// B along z for uniform fields; amplitude for random and pure-gauge fields.
  double strength = 0.0;
  Gauge gauge = Gauge::symmetric;
  std::uint64_t seed = 0;

  static GaugeField none() { return {}; }
  static GaugeField uniform(double b, Gauge g = Gauge::symmetric) { return {Kind::uniform, b, g, 0}; }
  static GaugeField random(std::uint64_t seed, double amplitude) { return {Kind::random, amplitude, Gauge::symmetric, seed}; }
  static GaugeField pure_gauge(std::uint64_t seed, double amplitude = kPi) {
    return {Kind::pure_gauge, amplitude, Gauge::symmetric, seed};
  }

  bool real_valued() const { return kind == Kind::zero || strength == 0.0; }
  /// Line integral of A along the edge from each site to its +axis neighbour,
  /// laid out as phases[3 * site + axis].
  std::vector<double> link_phases(const LatticeGrid& grid) const;
  std::string describe() const;
};

/// Dense Hermitian operator over a subset of grid sites.
struct LatticeOperator {
  Eigen::MatrixXcd matrix;
  bool real_valued = true;
  LatticeGrid grid;
  /// Grid site of each row.
  std::vector<std::size_t> sites;
  std::string description;
  /// Eigensystem of `matrix` when known from construction.
  std::shared_ptr<const EigenSystem<Eigen::MatrixXcd>> eigensystem;

  std::size_t size() const { return sites.size(); }
  double hermiticity_error() const;
  Eigen::VectorXd spectrum() const;
  EigenSystem<Eigen::MatrixXcd> eigen() const;
  /// exp(-t H) as a dense matrix.
  Eigen::MatrixXcd heat_kernel(double t) const;
};

/// Magnetic nearest-neighbour Laplacian (p + A)^2 with Peierls phases.
LatticeOperator build_magnetic_laplacian(const LatticeGrid& grid, const GaugeField& field);
/// |p + A| as the square root of the lattice Laplacian, by full eigendecomposition.
LatticeOperator build_magnetic_kinetic(const LatticeGrid& grid, const GaugeField& field);

/// Cell average of 1/|x| over a cube of side a centred at the origin, times a.
inline constexpr double kCellAverageInverseRadius = 2.380077363979553;

/// 1/|x| at a site; the site sitting on the origin (odd n) gets the cell average.
double coulomb_site_value(const Point3& x, double spacing);

/// op - strength / |x| on the diagonal.
LatticeOperator add_coulomb(const LatticeOperator& op, double strength);
/// op + diag(v), v indexed like op.sites.
LatticeOperator add_diagonal(const LatticeOperator& op, const Eigen::VectorXd& v, const std::string& what);

/// Principal submatrix on the sites with |x| < radius.
LatticeOperator dirichlet_compress(const LatticeOperator& op, double radius);

double heat_trace(const Eigen::VectorXd& spectrum, double t);
double heat_trace(const LatticeOperator& op, double t);
double riesz_mean(const Eigen::VectorXd& spectrum, double lam);
double riesz_mean(const LatticeOperator& op, double lam);

}  // namespace stabcert
