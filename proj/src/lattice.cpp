#include "stabcert/lattice.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stabcert {

using cd = std::complex<double>;

std::size_t LatticeGrid::sites() const {
  const auto m = static_cast<std::size_t>(n);
  return m * m * m;
}

double LatticeGrid::uv_scale() const { return kPi / spacing; }

std::size_t LatticeGrid::index(int i, int j, int k) const {
  const auto m = static_cast<std::size_t>(n);
  return (static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)) * m + static_cast<std::size_t>(k);
}

Point3 LatticeGrid::position(std::size_t site) const {
  const auto m = static_cast<std::size_t>(n);
  const std::size_t k = site % m;
  const std::size_t j = (site / m) % m;
  const std::size_t i = site / (m * m);
  auto coord = [&](std::size_t c) { return (static_cast<double>(c) - 0.5 * n + 0.5) * spacing; };
  return {coord(i), coord(j), coord(k)};
}

double LatticeGrid::radius(std::size_t site) const {
  const Point3 p = position(site);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

void LatticeGrid::validate() const {
  if (n < 1) throw std::invalid_argument("lattice.n must be positive");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw std::invalid_argument("lattice.spacing must be positive");
  if (sites() > kMaxSites) {
    throw std::invalid_argument("lattice of " + std::to_string(sites()) + " sites exceeds the dense eigensolver cap of " +
                                std::to_string(kMaxSites) + " sites");
  }
}

std::vector<double> GaugeField::link_phases(const LatticeGrid& grid) const {
  grid.validate();
  const std::size_t count = grid.sites();
  std::vector<double> phases(3 * count, 0.0);
  if (kind == Kind::zero || strength == 0.0) return phases;

  const double a = grid.spacing;
  switch (kind) {
    case Kind::uniform:
      // Exact line integral of a linear potential is its value at the edge midpoint.
      for (std::size_t s = 0; s < count; ++s) {
        const Point3 p = grid.position(s);
        for (int axis = 0; axis < 3; ++axis) {
          Point3 mid = p;
          mid[axis] += 0.5 * a;
          double ax = 0.0, ay = 0.0;
          if (gauge == Gauge::symmetric) {
            ax = -0.5 * strength * mid[1];
            ay = 0.5 * strength * mid[0];
          } else {
            ay = strength * mid[0];
          }
          const double along = axis == 0 ? ax : (axis == 1 ? ay : 0.0);
          phases[3 * s + axis] = along * a;
        }
      }
      break;
    case Kind::random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (double& ph : phases) ph = strength * a * u(rng);
      break;
    }
    case Kind::pure_gauge: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::vector<double> phi(count);
      for (double& v : phi) v = strength * u(rng);
      const int n = grid.n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            const std::size_t s = grid.index(i, j, k);
            const std::size_t nb[3] = {grid.index((i + 1) % n, j, k), grid.index(i, (j + 1) % n, k),
                                       grid.index(i, j, (k + 1) % n)};
            for (int axis = 0; axis < 3; ++axis) phases[3 * s + axis] = phi[nb[axis]] - phi[s];
          }
      break;
    }
    case Kind::zero:
      break;
  }
  return phases;
}

std::string GaugeField::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::zero: out << "zero"; break;
    case Kind::uniform:
      out << "uniform(B=" << strength << (gauge == Gauge::symmetric ? ",symmetric" : ",landau") << ")";
      break;
    case Kind::random: out << "random(seed=" << seed << ",amplitude=" << strength << ")"; break;
    case Kind::pure_gauge: out << "pure_gauge(seed=" << seed << ",amplitude=" << strength << ")"; break;
  }
  return out.str();
}

double LatticeOperator::hermiticity_error() const {
  if (matrix.size() == 0) return 0.0;
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::VectorXd LatticeOperator::spectrum() const {
  if (eigensystem) return eigensystem->values;
  if (real_valued) return eigenvalues(Eigen::MatrixXd(matrix.real()));
  return eigenvalues(matrix);
}

EigenSystem<Eigen::MatrixXcd> LatticeOperator::eigen() const {
  if (eigensystem) return *eigensystem;
  if (real_valued) {
    auto es = eigh(Eigen::MatrixXd(matrix.real()));
    return {es.values, es.vectors.cast<cd>()};
  }
  return eigh(matrix);
}

Eigen::MatrixXcd LatticeOperator::heat_kernel(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("heat kernel time must be positive");
  auto decay = [t](double l) { return std::exp(-t * l); };
  if (real_valued) {
    const auto es = eigensystem ? EigenSystem<Eigen::MatrixXd>{eigensystem->values, eigensystem->vectors.real()}
                                : eigh(Eigen::MatrixXd(matrix.real()));
    return spectral_apply(es, decay).cast<cd>();
  }
  return spectral_apply(eigen(), decay);
}

LatticeOperator build_magnetic_laplacian(const LatticeGrid& grid, const GaugeField& field) {
  grid.validate();
  const std::size_t count = grid.sites();
  const auto phases = field.link_phases(grid);
  const double inv_a2 = 1.0 / (grid.spacing * grid.spacing);
  const int n = grid.n;

  LatticeOperator op;
  op.grid = grid;
  op.real_valued = field.real_valued();
  op.matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  op.sites.resize(count);
  for (std::size_t s = 0; s < count; ++s) op.sites[s] = s;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t s = grid.index(i, j, k);
        op.matrix(s, s) += 6.0 * inv_a2;
        const int idx[3] = {i, j, k};
        for (int axis = 0; axis < 3; ++axis) {
          int next[3] = {idx[0], idx[1], idx[2]};
          next[axis] += 1;
          if (next[axis] == n) {
            if (grid.boundary == Boundary::open) continue;
            next[axis] = 0;
          }
          const std::size_t t = grid.index(next[0], next[1], next[2]);
          const cd hop = -std::polar(inv_a2, phases[3 * s + axis]);
          // psi(s) couples to psi(t) through the parallel transport from t back to s.
          op.matrix(s, t) += hop;
          op.matrix(t, s) += std::conj(hop);
        }
      }
  op.description = "laplacian[" + field.describe() + "]";
  return op;
}

LatticeOperator build_magnetic_kinetic(const LatticeGrid& grid, const GaugeField& field) {
  LatticeOperator lap = build_magnetic_laplacian(grid, field);
  // Eigenvalues below the eigensolver's backward error are zero modes; the square
  // root would otherwise lift their rounding residue to ~1e-7.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * 12.0 / (grid.spacing * grid.spacing);
  auto root = [floor](double l) { return l <= floor ? 0.0 : std::sqrt(l); };

  LatticeOperator op;
  op.grid = grid;
  op.real_valued = lap.real_valued;
  op.sites = std::move(lap.sites);
  std::shared_ptr<EigenSystem<Eigen::MatrixXcd>> es;
  if (op.real_valued) {
    auto real_es = eigh(Eigen::MatrixXd(lap.matrix.real()));
    lap.matrix.resize(0, 0);
    Eigen::MatrixXd m = spectral_apply(real_es, root);
    op.matrix = (0.5 * (m + m.transpose())).cast<cd>();
    es = std::make_shared<EigenSystem<Eigen::MatrixXcd>>();
    es->values = real_es.values;
    es->vectors = real_es.vectors.cast<cd>();
  } else {
    es = std::make_shared<EigenSystem<Eigen::MatrixXcd>>(eigh(lap.matrix));
    lap.matrix.resize(0, 0);
    Eigen::MatrixXcd m = spectral_apply(*es, root);
    op.matrix = 0.5 * (m + m.adjoint());
  }
  for (Eigen::Index i = 0; i < es->values.size(); ++i) es->values[i] = root(es->values[i]);
  op.eigensystem = std::move(es);
  op.description = "kinetic[" + field.describe() + "]";
  return op;
}

double coulomb_site_value(const Point3& x, double spacing) {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (r < 1e-12 * spacing) return kCellAverageInverseRadius / spacing;
  return 1.0 / r;
}

LatticeOperator add_coulomb(const LatticeOperator& op, double strength) {
  if (!(strength >= 0.0)) throw std::invalid_argument("Coulomb strength must be nonnegative");
  Eigen::VectorXd v(static_cast<Eigen::Index>(op.size()));
  for (std::size_t i = 0; i < op.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = -strength * coulomb_site_value(op.grid.position(op.sites[i]), op.grid.spacing);
  std::ostringstream what;
  what << "coulomb(" << strength << ")";
  if (strength == 0.0) return op;
  return add_diagonal(op, v, what.str());
}

LatticeOperator add_diagonal(const LatticeOperator& op, const Eigen::VectorXd& v, const std::string& what) {
  if (v.size() != static_cast<Eigen::Index>(op.size())) throw std::invalid_argument("diagonal potential has wrong length");
  LatticeOperator out;
  out.grid = op.grid;
  out.real_valued = op.real_valued;
  out.sites = op.sites;
  out.matrix = op.matrix;
  out.matrix.diagonal() += v.cast<cd>();
  out.description = op.description + " + " + what;
  return out;
}

LatticeOperator dirichlet_compress(const LatticeOperator& op, double radius) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < op.size(); ++i)
    if (op.grid.radius(op.sites[i]) < radius) keep.push_back(static_cast<Eigen::Index>(i));
  if (keep.empty()) throw std::invalid_argument("Dirichlet region contains no lattice sites");

  LatticeOperator out;
  out.grid = op.grid;
  out.real_valued = op.real_valued;
  if (keep.size() == op.size()) {
    out = op;
  } else {
    out.matrix = op.matrix(keep, keep);
    out.sites.reserve(keep.size());
    for (Eigen::Index i : keep) out.sites.push_back(op.sites[static_cast<std::size_t>(i)]);
  }
  std::ostringstream what;
  what << " | ball(" << radius << ")";
  out.description = op.description + what.str();
  return out;
}

double heat_trace(const Eigen::VectorXd& spectrum, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heat trace time must be positive");
  double sum = 0.0;
  for (double l : spectrum) sum += std::exp(-t * l);
  return sum;
}

double heat_trace(const LatticeOperator& op, double t) { return heat_trace(op.spectrum(), t); }

double riesz_mean(const Eigen::VectorXd& spectrum, double lam) {
  if (!(lam >= 0.0)) throw std::invalid_argument("Riesz mean level must be nonnegative");
  double sum = 0.0;
  for (double l : spectrum) sum += std::max(0.0, lam - l);
  return sum;
}

double riesz_mean(const LatticeOperator& op, double lam) { return riesz_mean(op.spectrum(), lam); }

}  // namespace stabcert
