// linalg.hpp — Dense matrix exponential and general complex eigendecomposition

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsim/operator_sum.hpp"

namespace epsim {

// e^M for a general complex square matrix (scaling-and-squaring Pade).
inline DenseMatrix expm_dense(const DenseMatrix& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("expm_dense: matrix must be square");
  if (!M.allFinite())
    throw std::invalid_argument("expm_dense: non-finite entries");
  return M.exp();
}

// e^{-i t H} v through the dense path; reference propagator for small dims.
inline StateVector evolve_dense(const OperatorSum& op, const StateVector& v,
                                double t, std::size_t cap = kDefaultDenseCap) {
  const DenseMatrix U = expm_dense(Complex(0, -t) * op.to_dense(cap));
  return U * v;
}

struct SpectralResult {
  Eigen::VectorXcd eigenvalues;
  DenseMatrix right_eigenvectors;      // unit-norm columns
  std::vector<bool> condition_flags;   // eigenvalue gap < gap_tol: near-defective
  double max_residual = 0.0;           // max over pairs of ||H v - lambda v||
};

// Full eigendecomposition of a general complex matrix with a residual check
// on every returned pair and a near-degeneracy flag per eigenvalue.
inline SpectralResult eig_general(const DenseMatrix& M, double residual_tol = 1e-9,
                                  double gap_tol = 1e-6) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("eig_general: matrix must be square");
  if (!M.allFinite())
    throw std::invalid_argument("eig_general: non-finite entries");
  Eigen::ComplexEigenSolver<DenseMatrix> solver(M, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig_general: eigensolver failed to converge");

  SpectralResult r;
  r.eigenvalues = solver.eigenvalues();
  r.right_eigenvectors = solver.eigenvectors();
  const Eigen::Index n = M.rows();
  const double scale = std::max(M.norm(), 1e-300);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double vn = r.right_eigenvectors.col(i).norm();
    if (vn > 0) r.right_eigenvectors.col(i) /= vn;
    const double res =
        (M * r.right_eigenvectors.col(i) - r.eigenvalues[i] * r.right_eigenvectors.col(i))
            .norm();
    r.max_residual = std::max(r.max_residual, res);
    if (res > residual_tol * scale)
      throw std::runtime_error("eig_general: residual " + std::to_string(res) +
                               " exceeds tolerance for eigenpair " + std::to_string(i));
  }

  r.condition_flags.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) gap = std::min(gap, std::abs(r.eigenvalues[i] - r.eigenvalues[j]));
    if (gap < gap_tol) r.condition_flags[static_cast<std::size_t>(i)] = true;
  }
  return r;
}

}  // namespace epsim
