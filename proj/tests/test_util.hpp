// Shared helpers for the test suites: independent dense oracles and
// deterministic random generators.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <random>
#include <vector>

#include "epsim/operator_sum.hpp"

namespace testutil {

using epsim::Complex;
using epsim::DenseMatrix;
using epsim::StateVector;

inline DenseMatrix pauli(epsim::SiteOp op) {
  DenseMatrix m(2, 2);
  switch (op) {
    case epsim::SiteOp::I: m << 1, 0, 0, 1; break;
    case epsim::SiteOp::X: m << 0, 1, 1, 0; break;
    case epsim::SiteOp::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case epsim::SiteOp::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Kronecker assembly with site j on bit j: the site-0 factor is the LAST
// Kronecker factor. Independent of the bit-twiddling apply path.
inline DenseMatrix kron_string(const std::vector<epsim::SiteOp>& ops) {
  DenseMatrix m = pauli(ops.back());
  for (auto it = ops.rbegin() + 1; it != ops.rend(); ++it)
    m = Eigen::kroneckerProduct(m, pauli(*it)).eval();
  return m;
}

inline DenseMatrix dense_oracle(const epsim::OperatorSum& op) {
  const auto d = static_cast<Eigen::Index>(op.dim());
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (const auto& t : op.terms()) m += t.coeff * kron_string(t.ops);
  return m;
}

// Truncated Taylor series of e^M; the independent reference for expm_dense.
inline DenseMatrix expm_taylor(const DenseMatrix& M, int terms = 60) {
  DenseMatrix acc = DenseMatrix::Identity(M.rows(), M.cols());
  DenseMatrix pow = acc;
  for (int k = 1; k <= terms; ++k) {
    pow = (pow * M / static_cast<double>(k)).eval();
    acc += pow;
  }
  return acc;
}

inline StateVector random_state(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(g(rng), g(rng));
  return v / v.norm();
}

inline std::vector<epsim::SiteOp> random_string(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<epsim::SiteOp> ops(n);
  for (auto& o : ops) o = static_cast<epsim::SiteOp>(pick(rng));
  return ops;
}

inline epsim::OperatorSum random_operator(int n, int num_terms, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<epsim::PauliTerm> terms;
  for (int t = 0; t < num_terms; ++t)
    terms.push_back({Complex(g(rng), g(rng)), random_string(n, rng)});
  return epsim::OperatorSum(epsim::Basis::full(n), std::move(terms));
}

}  // namespace testutil
