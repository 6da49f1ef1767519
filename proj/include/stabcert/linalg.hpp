#pragma once

#include <Eigen/Dense>

namespace stabcert {

template <class Matrix>
struct EigenSystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns
};

/// Dense symmetric / Hermitian eigensolvers (LAPACK divide and conquer).
Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& a);
Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd& a);
EigenSystem<Eigen::MatrixXd> eigh(const Eigen::MatrixXd& a);
EigenSystem<Eigen::MatrixXcd> eigh(const Eigen::MatrixXcd& a);

/// V f(Lambda) V^* for a Hermitian matrix given its eigensystem.
template <class Matrix, class F>
Matrix spectral_apply(const EigenSystem<Matrix>& es, F&& f) {
  Eigen::VectorXd fv(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) fv[i] = f(es.values[i]);
  Matrix scaled = es.vectors * fv.asDiagonal();
  Matrix out = scaled * es.vectors.adjoint();
  return out;
}

}  // namespace stabcert
