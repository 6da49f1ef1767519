#include "stabcert/linalg.hpp"

#include <lapacke.h>

#include <stdexcept>
#include <string>

namespace stabcert {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) throw std::runtime_error(std::string(routine) + " failed with info " + std::to_string(info));
}

template <class Matrix>
void require_square(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigensolver: matrix is not square");
}

Eigen::VectorXd solve(Eigen::MatrixXd& a, char jobz) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data()), "dsyevd");
  return w;
}

Eigen::VectorXd solve(Eigen::MatrixXcd& a, char jobz) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  auto* data = reinterpret_cast<lapack_complex_double*>(a.data());
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'L', n, data, n, w.data()), "zheevd");
  return w;
}

}  // namespace

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& a) {
  require_square(a);
  Eigen::MatrixXd work = a;
  return solve(work, 'N');
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd& a) {
  require_square(a);
  Eigen::MatrixXcd work = a;
  return solve(work, 'N');
}

EigenSystem<Eigen::MatrixXd> eigh(const Eigen::MatrixXd& a) {
  require_square(a);
  EigenSystem<Eigen::MatrixXd> es{{}, a};
  es.values = solve(es.vectors, 'V');
  return es;
}

EigenSystem<Eigen::MatrixXcd> eigh(const Eigen::MatrixXcd& a) {
  require_square(a);
  EigenSystem<Eigen::MatrixXcd> es{{}, a};
  es.values = solve(es.vectors, 'V');
  return es;
}

}  // namespace stabcert
