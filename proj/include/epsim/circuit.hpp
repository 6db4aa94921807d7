// circuit.hpp — Gate-level statevector emulation with ancilla postselection:
// exact-amplitude execution (projection without renormalization) and seeded
// shot sampling with per-trajectory random streams.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsim/operator_sum.hpp"
#include "epsim/parallel.hpp"

namespace epsim::circuit {

enum class GateKind { RY, RX, RZZ, CZ, CNOT, R, RInverse, MeasurePostselect0 };

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::RY: return "RY";
    case GateKind::RX: return "RX";
    case GateKind::RZZ: return "RZZ";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::R: return "R";
    case GateKind::RInverse: return "R_inverse";
    case GateKind::MeasurePostselect0: return "MeasurePostselect0";
  }
  return "?";
}

struct Gate {
  GateKind kind;
  double angle = 0.0;
  int q0 = -1;
  int q1 = -1;                // second target for CZ/CNOT/RZZ (CNOT: q0 control)
  double compensation = 1.0;  // recorded on MeasurePostselect0 gates
};

// R = (e^{i pi/4} I + e^{-i pi/4}(X+Y+Z))/2 = [[1,-i],[1,i]]/sqrt(2); maps the
// Y eigenbasis onto the Z basis.
inline Eigen::Matrix2cd r_gate_matrix() {
  Eigen::Matrix2cd m;
  const double s = 1.0 / std::sqrt(2.0);
  m << Complex(s, 0), Complex(0, -s), Complex(s, 0), Complex(0, s);
  return m;
}

inline Eigen::Matrix2cd ry_matrix(double theta) {
  Eigen::Matrix2cd m;
  m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2),
      std::cos(theta / 2);
  return m;
}

inline Eigen::Matrix2cd rx_matrix(double theta) {
  Eigen::Matrix2cd m;
  m << Complex(std::cos(theta / 2), 0), Complex(0, -std::sin(theta / 2)),
      Complex(0, -std::sin(theta / 2)), Complex(std::cos(theta / 2), 0);
  return m;
}

inline Eigen::Matrix2cd gate_matrix_1q(const Gate& g) {
  switch (g.kind) {
    case GateKind::RY: return ry_matrix(g.angle);
    case GateKind::RX: return rx_matrix(g.angle);
    case GateKind::R: return r_gate_matrix();
    case GateKind::RInverse: return r_gate_matrix().adjoint();
    default: throw std::invalid_argument("gate_matrix_1q: not a one-qubit gate");
  }
}

// An ordered gate list over num_system system qubits plus, when has_ancilla,
// one reused ancilla at index num_system. Postselection gates touch only the
// ancilla.
struct Circuit {
  int num_system = 0;
  bool has_ancilla = false;
  std::vector<Gate> gates;

  int num_qubits() const { return num_system + (has_ancilla ? 1 : 0); }
  int ancilla() const { return has_ancilla ? num_system : -1; }

  void append(const Circuit& other) {
    if (other.num_system != num_system)
      throw std::invalid_argument("Circuit::append: system size mismatch");
    has_ancilla = has_ancilla || other.has_ancilla;
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  }

  double compensation_product() const {
    double p = 1.0;
    for (const auto& g : gates) p *= g.compensation;
    return p;
  }

  // Human-readable dump, one gate per line: kind, angle, targets.
  std::string to_gate_list() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& g : gates) {
      os << to_string(g.kind) << ' ' << g.angle << ' ' << g.q0;
      if (g.q1 >= 0) os << ' ' << g.q1;
      os << '\n';
    }
    return os.str();
  }

  // Inverse of a measurement-free circuit: reversed order, negated angles.
  Circuit inverse() const {
    Circuit inv;
    inv.num_system = num_system;
    inv.has_ancilla = has_ancilla;
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
      Gate g = *it;
      switch (g.kind) {
        case GateKind::RY:
        case GateKind::RX:
        case GateKind::RZZ: g.angle = -g.angle; break;
        case GateKind::R: g.kind = GateKind::RInverse; break;
        case GateKind::RInverse: g.kind = GateKind::R; break;
        case GateKind::CZ:
        case GateKind::CNOT: break;
        case GateKind::MeasurePostselect0:
          throw std::invalid_argument("Circuit::inverse: circuit contains a measurement");
      }
      inv.gates.push_back(g);
    }
    return inv;
  }
};

namespace detail {

inline void apply_1q(StateVector& psi, int q, const Eigen::Matrix2cd& u) {
  const std::uint64_t bit = std::uint64_t{1} << q;
  const auto dim = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const std::uint64_t j = i | bit;
    const Complex a = psi[static_cast<Eigen::Index>(i)];
    const Complex b = psi[static_cast<Eigen::Index>(j)];
    psi[static_cast<Eigen::Index>(i)] = u(0, 0) * a + u(0, 1) * b;
    psi[static_cast<Eigen::Index>(j)] = u(1, 0) * a + u(1, 1) * b;
  }
}

inline void apply_cz(StateVector& psi, int q0, int q1) {
  const std::uint64_t mask = (std::uint64_t{1} << q0) | (std::uint64_t{1} << q1);
  const auto dim = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t i = 0; i < dim; ++i)
    if ((i & mask) == mask) psi[static_cast<Eigen::Index>(i)] = -psi[static_cast<Eigen::Index>(i)];
}

inline void apply_cnot(StateVector& psi, int control, int target) {
  const std::uint64_t cbit = std::uint64_t{1} << control;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  const auto dim = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t i = 0; i < dim; ++i)
    if ((i & cbit) && !(i & tbit))
      std::swap(psi[static_cast<Eigen::Index>(i)], psi[static_cast<Eigen::Index>(i | tbit)]);
}

// e^{-i theta/2 Z Z}: phase by the parity of the two target bits.
inline void apply_rzz(StateVector& psi, int q0, int q1, double theta) {
  const Complex same = std::exp(Complex(0, -theta / 2));
  const Complex diff = std::exp(Complex(0, theta / 2));
  const std::uint64_t b0 = std::uint64_t{1} << q0;
  const std::uint64_t b1 = std::uint64_t{1} << q1;
  const auto dim = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    const bool parity = static_cast<bool>(i & b0) != static_cast<bool>(i & b1);
    psi[static_cast<Eigen::Index>(i)] *= parity ? diff : same;
  }
}

inline void apply_unitary_gate(StateVector& psi, const Gate& g) {
  switch (g.kind) {
    case GateKind::RY:
    case GateKind::RX:
    case GateKind::R:
    case GateKind::RInverse: apply_1q(psi, g.q0, gate_matrix_1q(g)); break;
    case GateKind::RZZ: apply_rzz(psi, g.q0, g.q1, g.angle); break;
    case GateKind::CZ: apply_cz(psi, g.q0, g.q1); break;
    case GateKind::CNOT: apply_cnot(psi, g.q0, g.q1); break;
    case GateKind::MeasurePostselect0:
      throw std::invalid_argument("apply_unitary_gate: measurement is not unitary");
  }
}

}  // namespace detail

struct ExactRunResult {
  StateVector state;   // postselected branch amplitudes, NOT renormalized
  double cumulative_postselect_probability = 1.0;
};

// Applies the gate list; every MeasurePostselect0 projects the ancilla onto
// |0> without renormalizing (the ancilla is then |0> and ready for reuse).
inline ExactRunResult run_exact(const Circuit& c, const StateVector& input) {
  if (static_cast<std::uint64_t>(input.size()) != (std::uint64_t{1} << c.num_qubits()))
    throw std::invalid_argument("run_exact: state size does not match qubit count");
  const double in_sq = input.squaredNorm();
  if (in_sq == 0) throw std::invalid_argument("run_exact: zero input state");

  StateVector psi = input;
  for (const auto& g : c.gates) {
    if (g.kind != GateKind::MeasurePostselect0) {
      detail::apply_unitary_gate(psi, g);
      continue;
    }
    const std::uint64_t bit = std::uint64_t{1} << g.q0;
    for (Eigen::Index i = 0; i < psi.size(); ++i)
      if (static_cast<std::uint64_t>(i) & bit) psi[i] = 0;
    if (psi.squaredNorm() / in_sq < 1e-30)
      throw std::runtime_error("run_exact: postselected branch has vanishing probability");
  }
  const double prob = psi.squaredNorm() / in_sq;
  return {std::move(psi), prob};
}

struct TrajectoryStats {
  std::uint64_t shots_requested = 0;
  std::uint64_t shots_accepted = 0;
  std::vector<std::uint64_t> outcome_counts;  // indexed by system basis state
  std::uint64_t seed = 0;
};

// Born-rule sampling, one normalized trajectory per shot. Trajectories whose
// ancilla ever reads |1> are discarded; survivors contribute one final
// system-basis outcome. Stream for trajectory i is seeded with seed + i, so
// results do not depend on the thread count.
inline TrajectoryStats run_shots(const Circuit& c, const StateVector& input,
                                 std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("run_shots: shots must be >= 1");
  if (static_cast<std::uint64_t>(input.size()) != (std::uint64_t{1} << c.num_qubits()))
    throw std::invalid_argument("run_shots: state size does not match qubit count");
  StateVector start = input;
  start /= start.norm();

  const int n_sys = c.num_system;
  const std::uint64_t sys_mask = (std::uint64_t{1} << n_sys) - 1;
  std::vector<std::int32_t> outcome(shots, -1);

  parallel_for(shots, [&](std::size_t traj) {
    std::mt19937_64 rng(seed + traj);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    StateVector psi = start;
    for (const auto& g : c.gates) {
      if (g.kind != GateKind::MeasurePostselect0) {
        detail::apply_unitary_gate(psi, g);
        continue;
      }
      const std::uint64_t bit = std::uint64_t{1} << g.q0;
      double p0 = 0;
      for (Eigen::Index i = 0; i < psi.size(); ++i)
        if (!(static_cast<std::uint64_t>(i) & bit)) p0 += std::norm(psi[i]);
      if (uni(rng) >= p0) return;  // ancilla read |1>: trajectory discarded
      for (Eigen::Index i = 0; i < psi.size(); ++i)
        if (static_cast<std::uint64_t>(i) & bit) psi[i] = 0;
      psi /= std::sqrt(p0);
    }
    // Final measurement of the remaining state in the computational basis.
    double u = uni(rng) * psi.squaredNorm();
    Eigen::Index picked = psi.size() - 1;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      u -= std::norm(psi[i]);
      if (u <= 0) {
        picked = i;
        break;
      }
    }
    outcome[traj] = static_cast<std::int32_t>(static_cast<std::uint64_t>(picked) & sys_mask);
  });

  TrajectoryStats stats;
  stats.shots_requested = shots;
  stats.seed = seed;
  stats.outcome_counts.assign(std::size_t{1} << n_sys, 0);
  for (std::int32_t o : outcome)
    if (o >= 0) {
      ++stats.shots_accepted;
      ++stats.outcome_counts[static_cast<std::size_t>(o)];
    }
  return stats;
}

}  // namespace epsim::circuit
