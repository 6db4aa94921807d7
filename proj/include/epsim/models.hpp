// models.hpp — Environment Hamiltonians: complex-field Ising and Heisenberg
// chains, and a two-species lattice Fermi gas with spin-dependent gain/loss
// mapped to qubits through the Jordan-Wigner transformation.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "epsim/operator_sum.hpp"

namespace epsim::models {

enum class ModelKind { Ising, Heisenberg, Fermi };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Ising: return "ising";
    case ModelKind::Heisenberg: return "heisenberg";
    case ModelKind::Fermi: return "fermi";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ising") return ModelKind::Ising;
  if (s == "heisenberg") return ModelKind::Heisenberg;
  if (s == "fermi") return ModelKind::Fermi;
  throw std::invalid_argument("unknown model kind: " + s);
}

struct ModelSpec {
  ModelKind kind = ModelKind::Ising;
  int num_sites = 2;       // N
  double J = 0.5;          // bond coupling
  double U = 0.0;          // on-site interaction (Fermi only)
  double hx = 1.0, hy = 0.0;       // complex transverse field (hx real, i*hy imaginary)
  double dx = 0.0, dy = 0.0;       // qubit-conditioned field shift
  int filling = -1;        // Fermi particle number; -1 means half filling (N)

  int resolved_filling() const { return filling >= 0 ? filling : num_sites; }

  void validate() const {
    if (num_sites < 2) throw std::invalid_argument("ModelSpec: N must be >= 2");
    for (double x : {J, U, hx, hy, dx, dy})
      if (!std::isfinite(x)) throw std::invalid_argument("ModelSpec: non-finite parameter");
    if (kind == ModelKind::Fermi) {
      const int f = resolved_filling();
      if (f < 0 || f > 2 * num_sites)
        throw std::invalid_argument("ModelSpec: filling out of range [0, 2N]");
    }
  }
};

// (delta_x, delta_y) = |delta| (sin theta, cos theta)
struct CouplingAngle {
  double magnitude = 0.0;
  double theta = 0.0;
};

inline std::pair<double, double> theta_to_delta(const CouplingAngle& c) {
  if (c.magnitude < 0) throw std::invalid_argument("theta_to_delta: |delta| must be >= 0");
  return {c.magnitude * std::sin(c.theta), c.magnitude * std::cos(c.theta)};
}

namespace detail {

// Periodic bonds (j, j+1 mod N) as unique unordered pairs. For N=2 the two
// periodic bonds coincide and exactly one is kept; this changes the two-site
// spectrum relative to double counting and is relied on elsewhere.
inline std::vector<std::pair<int, int>> periodic_bonds(int n) {
  std::vector<std::pair<int, int>> bonds;
  for (int j = 0; j < n; ++j) {
    int a = j, b = (j + 1) % n;
    if (a > b) std::swap(a, b);
    bool seen = false;
    for (const auto& p : bonds) seen = seen || (p.first == a && p.second == b);
    if (!seen) bonds.emplace_back(a, b);
  }
  return bonds;
}

// Transverse-field strings -(ax X_j + i ay Y_j) on every site; zero
// coefficients are skipped so an all-zero field contributes no terms.
inline void append_site_fields(std::vector<PauliTerm>& terms, int n, double ax,
                               double ay) {
  for (int j = 0; j < n; ++j) {
    if (ax != 0.0) terms.push_back(make_term(Complex(-ax, 0), n, {{j, SiteOp::X}}));
    if (ay != 0.0) terms.push_back(make_term(Complex(0, -ay), n, {{j, SiteOp::Y}}));
  }
}

// Jordan-Wigner image of c_p^dag c_q + c_q^dag c_p for modes p < q:
//   (X_p Z...Z X_q + Y_p Z...Z Y_q) / 2   with Z on modes strictly between.
inline void append_jw_hopping(std::vector<PauliTerm>& terms, int n_modes, int p,
                              int q, double amplitude) {
  if (amplitude == 0.0) return;
  if (p > q) std::swap(p, q);
  PauliTerm xx{Complex(amplitude / 2, 0), std::vector<SiteOp>(n_modes, SiteOp::I)};
  PauliTerm yy = xx;
  xx.ops[p] = SiteOp::X;
  xx.ops[q] = SiteOp::X;
  yy.ops[p] = SiteOp::Y;
  yy.ops[q] = SiteOp::Y;
  for (int k = p + 1; k < q; ++k) {
    xx.ops[k] = SiteOp::Z;
    yy.ops[k] = SiteOp::Z;
  }
  terms.push_back(std::move(xx));
  terms.push_back(std::move(yy));
}

// Fermi gain/loss and Rabi pieces with strengths (ax, ay); shared between the
// environment builder and the coupling builder (h -> h + delta).
inline void append_fermi_fields(std::vector<PauliTerm>& terms, int n_sites,
                                double ax, double ay) {
  const int n_modes = 2 * n_sites;
  for (int j = 0; j < n_sites; ++j) {
    const int up = j, down = n_sites + j;
    // ax (c^dag_down c_up + h.c.)
    append_jw_hopping(terms, n_modes, up, down, ax);
    // -i ay (n_up - n_down) = -i ay (Z_down - Z_up)/2
    if (ay != 0.0) {
      terms.push_back(make_term(Complex(0, -ay / 2), n_modes, {{down, SiteOp::Z}}));
      terms.push_back(make_term(Complex(0, ay / 2), n_modes, {{up, SiteOp::Z}}));
    }
  }
}

}  // namespace detail

inline Basis spin_basis(const ModelSpec& spec) { return Basis::full(spec.num_sites); }

// Jordan-Wigner mode ordering: up modes are qubits 0..N-1, down modes are
// qubits N..2N-1; occupation 1 maps to qubit bit 1. The basis is restricted
// to the fixed total-particle-number sector.
inline Basis fermi_basis(const ModelSpec& spec) {
  const int n_modes = 2 * spec.num_sites;
  const std::uint64_t mask = (std::uint64_t{1} << n_modes) - 1;
  return Basis::number_sector(n_modes, mask, spec.resolved_filling());
}

inline Basis env_basis(const ModelSpec& spec) {
  return spec.kind == ModelKind::Fermi ? fermi_basis(spec) : spin_basis(spec);
}

// -sum_j [ J Z_j Z_{j+1} + hx X_j + i hy Y_j ], periodic.
inline OperatorSum build_ising_env(const ModelSpec& spec) {
  spec.validate();
  if (spec.kind != ModelKind::Ising)
    throw std::invalid_argument("build_ising_env: spec.kind is not Ising");
  const int n = spec.num_sites;
  std::vector<PauliTerm> terms;
  for (const auto& [a, b] : detail::periodic_bonds(n))
    if (spec.J != 0.0)
      terms.push_back(make_term(Complex(-spec.J, 0), n, {{a, SiteOp::Z}, {b, SiteOp::Z}}));
  detail::append_site_fields(terms, n, spec.hx, spec.hy);
  return OperatorSum(spin_basis(spec), std::move(terms));
}

// -J sum_j (X X + Y Y + Z Z) - sum_j (hx X_j + i hy Y_j), periodic.
inline OperatorSum build_heisenberg_env(const ModelSpec& spec) {
  spec.validate();
  if (spec.kind != ModelKind::Heisenberg)
    throw std::invalid_argument("build_heisenberg_env: spec.kind is not Heisenberg");
  const int n = spec.num_sites;
  std::vector<PauliTerm> terms;
  for (const auto& [a, b] : detail::periodic_bonds(n)) {
    if (spec.J == 0.0) continue;
    for (SiteOp op : {SiteOp::X, SiteOp::Y, SiteOp::Z})
      terms.push_back(make_term(Complex(-spec.J, 0), n, {{a, op}, {b, op}}));
  }
  detail::append_site_fields(terms, n, spec.hx, spec.hy);
  return OperatorSum(spin_basis(spec), std::move(terms));
}

// -J sum_{j,sigma} (c^dag_j c_{j+1} + h.c.) + U sum_j n_up n_down
// + hx sum_j (c^dag_down c_up + h.c.) - i hy sum_j (n_up - n_down),
// Jordan-Wigner mapped and restricted to the filling sector.
inline OperatorSum build_fermi_env(const ModelSpec& spec) {
  spec.validate();
  if (spec.kind != ModelKind::Fermi)
    throw std::invalid_argument("build_fermi_env: spec.kind is not Fermi");
  const int n = spec.num_sites;
  const int n_modes = 2 * n;
  std::vector<PauliTerm> terms;
  for (const auto& [a, b] : detail::periodic_bonds(n)) {
    detail::append_jw_hopping(terms, n_modes, a, b, -spec.J);              // up modes
    detail::append_jw_hopping(terms, n_modes, n + a, n + b, -spec.J);      // down modes
  }
  if (spec.U != 0.0) {
    // U n_up n_down = U (I - Z_up)(I - Z_down)/4
    for (int j = 0; j < n; ++j) {
      const int up = j, down = n + j;
      const Complex q(spec.U / 4, 0);
      terms.push_back(make_term(q, n_modes, {}));
      terms.push_back(make_term(-q, n_modes, {{up, SiteOp::Z}}));
      terms.push_back(make_term(-q, n_modes, {{down, SiteOp::Z}}));
      terms.push_back(make_term(q, n_modes, {{up, SiteOp::Z}, {down, SiteOp::Z}}));
    }
  }
  detail::append_fermi_fields(terms, n, spec.hx, spec.hy);
  return OperatorSum(fermi_basis(spec), std::move(terms));
}

inline OperatorSum build_env(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::Ising: return build_ising_env(spec);
    case ModelKind::Heisenberg: return build_heisenberg_env(spec);
    case ModelKind::Fermi: return build_fermi_env(spec);
  }
  throw std::invalid_argument("build_env: unknown kind");
}

// The extra environment Hamiltonian seen when the qubit sits in |1>; adding
// it to the environment shifts h -> h + delta in the field terms.
inline OperatorSum build_coupling(const ModelSpec& spec) {
  spec.validate();
  std::vector<PauliTerm> terms;
  if (spec.kind == ModelKind::Fermi) {
    detail::append_fermi_fields(terms, spec.num_sites, spec.dx, spec.dy);
    return OperatorSum(fermi_basis(spec), std::move(terms));
  }
  detail::append_site_fields(terms, spec.num_sites, spec.dx, spec.dy);
  return OperatorSum(spin_basis(spec), std::move(terms));
}

// Bit pattern of the reference state the complex field polarizes towards:
// all-|0> for spins, all particles in down modes for fermions (packed from
// the lowest down mode; overflow spills into up modes).
inline std::uint64_t polarized_reference_bits(const ModelSpec& spec) {
  if (spec.kind != ModelKind::Fermi) return 0;
  const int n = spec.num_sites;
  const int f = spec.resolved_filling();
  const int in_down = std::min(f, n);
  std::uint64_t bits = ((std::uint64_t{1} << in_down) - 1) << n;
  if (f > n) bits |= (std::uint64_t{1} << (f - n)) - 1;
  return bits;
}

}  // namespace epsim::models
