// krylov.hpp — Arnoldi matrix-free propagator e^{-iHt}|v> for non-Hermitian H

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "epsim/linalg.hpp"
#include "epsim/operator_sum.hpp"

namespace epsim {

struct KrylovBreakdown : std::runtime_error {
  KrylovBreakdown(const std::string& what, double residual)
      : std::runtime_error(what + " (achieved residual " + std::to_string(residual) + ")"),
        achieved_residual(residual) {}
  double achieved_residual;
};

struct ArnoldiFactorization {
  DenseMatrix V;            // dim x (m+1) orthonormal basis
  DenseMatrix H;            // (m+1) x m upper Hessenberg
  int m = 0;                // number of usable columns
  bool breakdown = false;   // invariant subspace found at column m
};

// Full-orthogonalization Arnoldi on op (the operator itself, not -i*op).
// Modified Gram-Schmidt with one reorthogonalization pass; H is NOT assumed
// Hermitian, so no Lanczos shortcut.
inline ArnoldiFactorization arnoldi(const OperatorSum& op, const StateVector& v0,
                                    int m_max) {
  const Eigen::Index d = v0.size();
  const int m_cap = static_cast<int>(std::min<Eigen::Index>(m_max, d));
  ArnoldiFactorization f;
  f.V.resize(d, m_cap + 1);
  f.H = DenseMatrix::Zero(m_cap + 1, m_cap);
  const double beta = v0.norm();
  if (beta == 0) throw std::invalid_argument("arnoldi: zero start vector");
  f.V.col(0) = v0 / beta;

  for (int j = 0; j < m_cap; ++j) {
    StateVector w = op.apply(f.V.col(j));
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const Complex h = f.V.col(i).dot(w);
        f.H(i, j) += h;
        w -= h * f.V.col(i);
      }
    }
    const double hnext = w.norm();
    f.H(j + 1, j) = hnext;
    f.m = j + 1;
    const double scale = f.H.topLeftCorner(f.m, f.m).norm() + 1e-300;
    if (hnext <= 1e-14 * scale) {
      f.breakdown = true;
      return f;
    }
    f.V.col(j + 1) = w / hnext;
  }
  return f;
}

struct KrylovOptions {
  int max_basis = 40;
  double min_substep_fraction = 1e-12;  // substep underflow guard, relative to |t|
};

// e^{-i t H} v with adaptive sub-stepping. Each substep is accepted when the
// standard Arnoldi a-posteriori estimate beta*|h_{m+1,m}*w_m| stays within the
// substep's share of the error budget; otherwise the substep is halved.
inline StateVector expm_multiply(const OperatorSum& op, const StateVector& v,
                                 double t, double tol,
                                 const KrylovOptions& opts = {}) {
  if (static_cast<std::size_t>(v.size()) != op.dim())
    throw std::invalid_argument("expm_multiply: dimension mismatch");
  if (!(tol > 0)) throw std::invalid_argument("expm_multiply: tol must be > 0");
  if (t == 0 || v.norm() == 0) return v;

  StateVector current = v;
  const double total = std::abs(t);
  const double dir = t > 0 ? 1.0 : -1.0;
  double remaining = total;
  double substep = total;
  double worst_estimate = 0.0;

  while (remaining > 1e-15 * total) {
    substep = std::min(substep, remaining);
    const double beta = current.norm();
    if (beta == 0) return current;  // evolution annihilated the state exactly
    const ArnoldiFactorization f = arnoldi(op, current, opts.max_basis);
    const int m = f.m;
    const DenseMatrix Hm = f.H.topLeftCorner(m, m);
    const double hnext = std::abs(f.H(m, m - 1));

    bool accepted = false;
    while (!accepted) {
      const DenseMatrix E = expm_dense(Complex(0, -dir * substep) * Hm);
      Eigen::VectorXcd w = beta * E.col(0);
      const double err = f.breakdown ? 0.0 : hnext * std::abs(w[m - 1]);
      const double budget = tol * (substep / total) * std::max(w.norm(), 1e-30);
      worst_estimate = std::max(worst_estimate, err);
      if (err <= budget || f.breakdown) {
        current = f.V.leftCols(m) * w;
        remaining -= substep;
        if (err < 0.1 * budget) substep *= 2.0;
        accepted = true;
      } else {
        substep *= 0.5;
        if (substep < opts.min_substep_fraction * total)
          throw KrylovBreakdown("expm_multiply: substep underflow before convergence",
                                err);
      }
    }
  }
  return current;
}

}  // namespace epsim
