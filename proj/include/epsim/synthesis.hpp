// synthesis.hpp — Two-qubit preparation circuit for a real amplitude vector:
// RY/CZ disentangling sequence run in reverse.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "epsim/circuit.hpp"

namespace epsim::circuit {

// Kets read as binary indices: |ab> has a on qubit 1 and b on qubit 0, so
// xi = (xi0, xi1, xi2, xi3) multiplies (|00>, |01>, |10>, |11>).
//
// The disentangling run is RY(theta1) on qubit 0, CZ, RY(theta2) on qubit 1,
// RY(theta3) on qubit 0, taking xi to |00>; the preparation circuit applies
// the negated rotations in reverse order. Restricted to REAL unit vectors:
// the gates generate only real orthogonal maps, and the two-site ground
// state is real in the unbroken phase. Preparation is exact up to a global
// sign.
inline Circuit synthesize_ug(const Eigen::Vector4d& xi_in) {
  Eigen::Vector4d xi = xi_in;
  const double norm = xi.norm();
  if (std::abs(norm - 1.0) > 1e-9)
    throw std::invalid_argument("synthesize_ug: amplitudes must be unit norm");
  xi /= norm;

  constexpr double tiny = 1e-12;
  auto reject = [](const std::string& what) {
    throw std::invalid_argument("synthesize_ug: degenerate amplitudes, " + what +
                                " vanishes");
  };

  Circuit c;
  c.num_system = 2;

  const double low_sq = xi[0] * xi[0] + xi[1] * xi[1];
  const double high_sq = xi[2] * xi[2] + xi[3] * xi[3];
  if (low_sq < tiny) reject("xi0^2 + xi1^2");

  if (high_sq < tiny) {
    // Already a product with qubit 1 in |0>: one rotation on qubit 0.
    const double theta3 = -2 * std::atan2(xi[1], xi[0]);
    c.gates.push_back({GateKind::RY, -theta3, 0});
    c.gates.push_back({GateKind::CZ, 0, 0, 1});
    return c;
  }

  const double cross = xi[0] * xi[2] + xi[1] * xi[3];
  const double sign = cross >= 0 ? 1.0 : -1.0;
  const double k = -sign * std::sqrt(high_sq / low_sq);

  const double num1 = xi[2] - k * xi[0];
  const double den1 = xi[3] - k * xi[1];
  if (std::abs(den1) < tiny) reject("theta1 denominator (xi3 - k xi1)");
  const double theta1 = 2 * std::atan(num1 / den1);

  const double varsigma = std::hypot(num1, den1);
  if (varsigma < tiny) reject("varsigma");

  const double root = std::sqrt(1 + k * k);
  const double a0 = 1 / root;
  const double a1 = k / root;
  const double a3 = root * (k * cross - high_sq) / (k * varsigma);
  if (std::abs(a0 * a3) < tiny) reject("a0 a3");
  const double theta2 = 2 * std::atan(-(a1 * a3) / (a0 * a3));

  const double tau = std::sqrt((a0 * a3 * a0 * a3 + a1 * a3 * a1 * a3) *
                               (num1 * num1 + den1 * den1));
  const double gamma0 = (a0 * a3 + k * a1 * a3) * (xi[0] * xi[3] - xi[1] * xi[2]) / tau;
  const double gamma1 =
      (a1 * a3 * (k * xi[0] * xi[2] - xi[2] * xi[2] + k * xi[1] * xi[3] - xi[3] * xi[3]) +
       a0 * a3 * (-k * xi[0] * xi[0] + xi[0] * xi[2] - k * xi[1] * xi[1] + xi[1] * xi[3])) /
      tau;
  if (std::abs(gamma0) < tiny) reject("gamma0");
  const double theta3 = 2 * std::atan(-gamma1 / gamma0);

  c.gates.push_back({GateKind::RY, -theta2, 1});
  c.gates.push_back({GateKind::RY, -theta3, 0});
  c.gates.push_back({GateKind::CZ, 0, 0, 1});
  c.gates.push_back({GateKind::RY, -theta1, 0});
  return c;
}

}  // namespace epsim::circuit
