// spectral.hpp — Ground states of non-Hermitian Hamiltonians, the two-site
// closed form, ground-state susceptibility and spectrum-reality diagnostics.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "epsim/krylov.hpp"
#include "epsim/linalg.hpp"
#include "epsim/models.hpp"
#include "epsim/operator_sum.hpp"
#include "epsim/parallel.hpp"

namespace epsim::spectral {

struct GroundState {
  Complex energy{0, 0};
  StateVector vector;
  bool degenerate = false;       // >= 2 eigenvalues within the Re-tie tolerance
  double polarized_overlap = 0;  // |<reference|G>|
  double residual = 0;           // ||H G - E G||
};

inline constexpr double kReTieTol = 1e-9;

namespace detail {

inline StateVector reference_vector(const Basis& basis, std::uint64_t ref_bits) {
  StateVector r = StateVector::Zero(static_cast<Eigen::Index>(basis.dim()));
  const std::ptrdiff_t idx = basis.index_of(ref_bits);
  if (idx >= 0) r[idx] = 1.0;
  return r;
}

// Orthonormal span of the candidate columns; near-parallel directions (as
// happens for defective clusters) are dropped instead of amplified.
inline DenseMatrix orthonormal_span(const DenseMatrix& cols) {
  DenseMatrix q(cols.rows(), cols.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    StateVector w = cols.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < kept; ++i) w -= q.col(i).dot(w) * q.col(i);
    const double n = w.norm();
    if (n > 1e-6) q.col(kept++) = w / n;
  }
  return q.leftCols(kept);
}

}  // namespace detail

// A k-fold defective cluster splits numerically like eps^(1/k), and the
// spin-chain exceptional points carry clusters of order up to ~N (the whole
// polarized multiplet coalesces for the Heisenberg chain), so the computed
// spectrum bottom can undershoot the true one by a few percent of the norm.
// The polarized shortcut therefore pairs a strict exactness gate (reference
// residual at 1e-12 of the norm) with this generous energy window: for the
// Hamiltonians built here, an exactly-eigen polarized reference only occurs
// on the exceptional diagonal or at zero field, where the excitation grading
// makes it the true spectrum bottom.
inline constexpr double kDefectWindow = 5e-2;

// Ground state = eigenpair with minimal Re(E). Ties within kReTieTol are
// resolved by maximal overlap with the polarized reference state (taking the
// best vector inside the degenerate span when it is well conditioned), then
// by minimal |Im E|. The reference is all-|0> unless the caller passes the
// model-appropriate pattern. When the reference itself is an exact
// eigenvector at the bottom of the spectrum (the situation at an exceptional
// point, where the solver's vector for the defective cluster is polluted to
// sqrt(eps)) it is returned directly.
inline GroundState ground_state(const OperatorSum& H, std::uint64_t ref_bits = 0,
                                std::size_t dense_cap = kDefaultDenseCap) {
  const DenseMatrix M = H.to_dense(dense_cap);
  const SpectralResult eig = eig_general(M);
  const Eigen::Index n = M.rows();
  const double scale = std::max(M.norm(), 1.0);

  double min_re = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    min_re = std::min(min_re, eig.eigenvalues[i].real());

  std::vector<Eigen::Index> candidates;
  for (Eigen::Index i = 0; i < n; ++i)
    if (eig.eigenvalues[i].real() <= min_re + kReTieTol) candidates.push_back(i);

  GroundState g;
  g.degenerate = candidates.size() >= 2;
  const StateVector ref = detail::reference_vector(H.basis(), ref_bits);

  if (ref.norm() > 0) {
    const StateVector Mref = M * ref;
    const Complex lam = ref.dot(Mref);
    const double ref_res = (Mref - lam * ref).norm();
    if (ref_res <= 1e-12 * scale && lam.real() <= min_re + kDefectWindow * scale) {
      g.energy = lam;
      g.vector = ref;
      g.polarized_overlap = 1.0;
      g.residual = ref_res;
      return g;
    }
  }

  Eigen::Index pick = candidates.front();
  if (g.degenerate) {
    // Prefer the polarized direction inside the degenerate span when the
    // reference actually lives there.
    DenseMatrix cols(n, static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t c = 0; c < candidates.size(); ++c)
      cols.col(static_cast<Eigen::Index>(c)) = eig.right_eigenvectors.col(candidates[c]);
    const DenseMatrix q = detail::orthonormal_span(cols);
    if (q.cols() > 0 && ref.norm() > 0) {
      StateVector proj = q * (q.adjoint() * ref);
      const Complex rayleigh = proj.norm() > 0
                                   ? Complex(proj.dot(M * proj) / proj.squaredNorm())
                                   : Complex(0, 0);
      const double proj_res =
          proj.norm() > 0 ? (M * proj - rayleigh * proj).norm() / proj.norm() : 1.0;
      if (proj.norm() > 1e-8 && proj_res <= 1e-8 * std::max(M.norm(), 1.0)) {
        g.vector = proj / proj.norm();
        g.energy = rayleigh;
        g.polarized_overlap = std::abs(ref.dot(g.vector));
        g.residual = (M * g.vector - g.energy * g.vector).norm();
        return g;
      }
    }
    double best_overlap = -1.0;
    double best_im = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : candidates) {
      const double ov = std::abs(ref.dot(eig.right_eigenvectors.col(i)));
      const double im = std::abs(eig.eigenvalues[i].imag());
      if (ov > best_overlap + 1e-9 ||
          (std::abs(ov - best_overlap) <= 1e-9 && im < best_im)) {
        best_overlap = ov;
        best_im = im;
        pick = i;
      }
    }
  }

  g.energy = eig.eigenvalues[pick];
  g.vector = eig.right_eigenvectors.col(pick);
  g.polarized_overlap = std::abs(ref.dot(g.vector));
  g.residual = (M * g.vector - g.energy * g.vector).norm();
  return g;
}

// Matrix-free ground-state solver for dimensions past the dense-eig comfort
// zone: restarted Arnoldi targeting the minimal-Re Ritz pair. An exact
// polarized eigenvector (the situation at the exceptional point) is detected
// and returned directly once the Ritz value confirms it is extremal.
inline GroundState ground_state_krylov(const OperatorSum& H, std::uint64_t ref_bits = 0,
                                       double tol = 1e-10, int basis_size = 80,
                                       int max_restarts = 60) {
  const Eigen::Index d = static_cast<Eigen::Index>(H.dim());
  const double scale = std::max(H.coeff_norm1(), 1e-30);

  const StateVector ref = detail::reference_vector(H.basis(), ref_bits);
  GroundState g;

  // Deterministic seeded start: reference plus a small spread so the Krylov
  // space is not trapped in a symmetry sector.
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  StateVector v0(d);
  for (Eigen::Index i = 0; i < d; ++i) v0[i] = Complex(gauss(rng), gauss(rng));
  v0 /= v0.norm();
  if (ref.norm() > 0) v0 = (ref + 1e-2 * v0).normalized();

  double best_res = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < max_restarts; ++restart) {
    const ArnoldiFactorization f = arnoldi(H, v0, basis_size);
    const int m = f.m;
    const DenseMatrix Hm = f.H.topLeftCorner(m, m);
    Eigen::ComplexEigenSolver<DenseMatrix> es(Hm, true);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("ground_state_krylov: small eigensolver failed");

    int pick = 0;
    double min_re = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
      if (es.eigenvalues()[i].real() < min_re) {
        min_re = es.eigenvalues()[i].real();
        pick = i;
      }
    int near = 0;
    for (int i = 0; i < m; ++i)
      if (es.eigenvalues()[i].real() <= min_re + kReTieTol) ++near;

    StateVector x = f.V.leftCols(m) * es.eigenvectors().col(pick);
    x /= x.norm();
    const Complex theta = es.eigenvalues()[pick];
    const double res = (H.apply(x) - theta * x).norm();
    best_res = std::min(best_res, res);

    // Exact-eigenvector shortcut for the polarized reference.
    if (ref.norm() > 0) {
      const StateVector Href = H.apply(ref);
      const Complex lam = ref.dot(Href);
      const double ref_res = (Href - lam * ref).norm();
      if (ref_res <= 1e-12 * scale && lam.real() <= min_re + kDefectWindow * scale) {
        g.energy = lam;
        g.vector = ref;
        g.degenerate = near >= 2;
        g.polarized_overlap = 1.0;
        g.residual = ref_res;
        return g;
      }
    }

    if (res <= tol * scale || f.breakdown) {
      g.energy = theta;
      g.vector = x;
      g.degenerate = near >= 2;
      g.polarized_overlap = ref.norm() > 0 ? std::abs(ref.dot(x)) : 0.0;
      g.residual = res;
      return g;
    }
    v0 = x;
  }
  throw KrylovBreakdown("ground_state_krylov: no convergence", best_res);
}

// Supplement closed form for the two-site Ising chain in the unbroken phase:
//   [ (hx+hy)/beta, -alpha/2beta, -alpha/2beta, (hx-hy)/beta ],
//   alpha = J - sqrt(4hx^2 - 4hy^2 + J^2),  beta = sqrt(4hx^2 + J alpha).
inline StateVector ground_state_ising2_closed_form(double J, double hx, double hy) {
  const double disc = 4 * hx * hx - 4 * hy * hy + J * J;
  if (disc < 0)
    throw std::invalid_argument(
        "ground_state_ising2_closed_form: complex alpha (broken regime)");
  const double alpha = J - std::sqrt(disc);
  const double beta_sq = 4 * hx * hx + J * alpha;
  if (beta_sq <= 0)
    throw std::invalid_argument("ground_state_ising2_closed_form: beta vanishes");
  const double beta = std::sqrt(beta_sq);
  StateVector v(4);
  v << (hx + hy) / beta, -alpha / (2 * beta), -alpha / (2 * beta), (hx - hy) / beta;
  v /= v.norm();
  return v;
}

struct SusceptibilityPoint {
  double chi = 0;
  bool degenerate = false;
};

// chi(h, delta) = -ln |<G(h+delta)|G(h)>| with unit-normalized right
// eigenvectors and the plain conjugated inner product.
inline SusceptibilityPoint susceptibility(const models::ModelSpec& base,
                                          std::pair<double, double> h,
                                          std::pair<double, double> delta,
                                          std::size_t dense_cap = kDefaultDenseCap) {
  models::ModelSpec at = base;
  at.hx = h.first;
  at.hy = h.second;
  models::ModelSpec shifted = at;
  shifted.hx += delta.first;
  shifted.hy += delta.second;

  const std::uint64_t ref = models::polarized_reference_bits(base);
  const GroundState g0 = ground_state(models::build_env(at), ref, dense_cap);
  const GroundState g1 = ground_state(models::build_env(shifted), ref, dense_cap);

  SusceptibilityPoint p;
  p.degenerate = g0.degenerate || g1.degenerate;
  const double overlap = std::abs(g1.vector.dot(g0.vector));
  p.chi = -std::log(std::max(overlap, 1e-300));
  return p;
}

struct SusceptibilityMap {
  std::vector<double> hx_axis;
  std::vector<double> hy_axis;
  Eigen::MatrixXd chi;              // hx index = row, hy index = column
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> degenerate;
  std::pair<double, double> delta{0, 0};
};

inline SusceptibilityMap susceptibility_map(const models::ModelSpec& base,
                                            const std::vector<double>& hx_grid,
                                            const std::vector<double>& hy_grid,
                                            std::pair<double, double> delta,
                                            std::size_t dense_cap = kDefaultDenseCap) {
  if (hx_grid.empty() || hy_grid.empty())
    throw std::invalid_argument("susceptibility_map: empty grid");
  SusceptibilityMap map;
  map.hx_axis = hx_grid;
  map.hy_axis = hy_grid;
  map.delta = delta;
  map.chi.resize(static_cast<Eigen::Index>(hx_grid.size()),
                 static_cast<Eigen::Index>(hy_grid.size()));
  map.degenerate.resize(map.chi.rows(), map.chi.cols());

  const std::size_t total = hx_grid.size() * hy_grid.size();
  parallel_for(total, [&](std::size_t k) {
    const std::size_t i = k / hy_grid.size();
    const std::size_t j = k % hy_grid.size();
    const SusceptibilityPoint p =
        susceptibility(base, {hx_grid[i], hy_grid[j]}, delta, dense_cap);
    map.chi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p.chi;
    map.degenerate(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        p.degenerate;
  });
  return map;
}

// Maximum |Im E| over the full spectrum; ~0 inside the unbroken phase.
inline double spectrum_reality(const OperatorSum& H,
                               std::size_t dense_cap = kDefaultDenseCap) {
  const DenseMatrix M = H.to_dense(dense_cap);
  Eigen::ComplexEigenSolver<DenseMatrix> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectrum_reality: eigensolver failed");
  double worst = 0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    worst = std::max(worst, std::abs(solver.eigenvalues()[i].imag()));
  return worst;
}

}  // namespace epsim::spectral
