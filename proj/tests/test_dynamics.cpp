#include <doctest.h>

#include <cmath>
#include <random>

#include "epsim/dynamics.hpp"
#include "epsim/models.hpp"
#include "epsim/spectral.hpp"
#include "test_util.hpp"

using namespace epsim;
using namespace epsim::dynamics;
using epsim::models::ModelKind;
using epsim::models::ModelSpec;

namespace {

ModelSpec make_spec(ModelKind kind, int n, double J, double hx, double hy, double dx,
                    double dy, double U = 0.0) {
  ModelSpec s;
  s.kind = kind;
  s.num_sites = n;
  s.J = J;
  s.U = U;
  s.hx = hx;
  s.hy = hy;
  s.dx = dx;
  s.dy = dy;
  return s;
}

std::vector<double> grid(double t_max, int steps) {
  std::vector<double> t;
  for (int i = 0; i <= steps; ++i) t.push_back(t_max * i / steps);
  return t;
}

StateVector env_ground(const ModelSpec& s) {
  return ground_state_auto(models::build_env(s),
                           models::polarized_reference_bits(s));
}

}  // namespace

TEST_CASE("l1 coherence of a qubit density matrix") {
  QubitDensity pure0{Eigen::Matrix2cd::Zero()};
  pure0.rho(0, 0) = 1;
  pure0.validate();
  CHECK(l1_coherence(pure0) == doctest::Approx(0.0));

  QubitDensity plus{(Eigen::Matrix2cd() << 0.5, 0.5, 0.5, 0.5).finished()};
  plus.validate();
  CHECK(l1_coherence(plus) == doctest::Approx(1.0));

  QubitDensity y{(Eigen::Matrix2cd() << Complex(0.5, 0), Complex(0, 0.3),
                  Complex(0, -0.3), Complex(0.5, 0))
                     .finished()};
  y.validate();
  CHECK(l1_coherence(y) == doctest::Approx(0.6));

  QubitDensity bad{(Eigen::Matrix2cd() << 0.9, 0, 0, 0.9).finished()};
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}

TEST_CASE("empty coupling keeps full coherence") {
  const ModelSpec s = make_spec(ModelKind::Ising, 4, 0.5, 1.0, 0.5, 0.0, 0.0);
  const OperatorSum H = models::build_env(s);
  const OperatorSum V = models::build_coupling(s);
  const CoherenceTrace tr =
      coherence_trace(H, V, env_ground(s), grid(3.0, 10), Method::Krylov);
  for (double c : tr.coherence) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("balanced coupling at the exceptional point cannot move the ground state") {
  const double d = 0.1 / std::sqrt(2.0);
  for (ModelKind kind : {ModelKind::Ising, ModelKind::Heisenberg}) {
    const ModelSpec s = make_spec(kind, 6, 0.5, 1.0, 1.0, d, d);
    const OperatorSum H = models::build_env(s);
    const OperatorSum V = models::build_coupling(s);
    const StateVector G = env_ground(s);
    CHECK(coupling_kernel_norm(V, G) < 1e-12);
    const CoherenceTrace tr = coherence_trace(H, V, G, grid(3.0, 12), Method::Krylov);
    for (double c : tr.coherence) CHECK(std::abs(c - 1.0) < 1e-10);
  }
}

TEST_CASE("coupling kernel norm is positive away from the balanced EP") {
  const ModelSpec s = make_spec(ModelKind::Ising, 6, 0.5, 1.0, 0.9, 0.1, 0.0);
  CHECK(coupling_kernel_norm(models::build_coupling(s), env_ground(s)) > 1e-3);
  const OperatorSum empty(models::spin_basis(s));
  CHECK(coupling_kernel_norm(empty, env_ground(s)) == 0.0);
}

TEST_CASE("two-branch trace matches the joint-evolution oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto times = grid(2.0, 8);
  for (int trial = 0; trial < 6; ++trial) {
    const ModelKind kind = trial % 3 == 0   ? ModelKind::Fermi
                           : trial % 3 == 1 ? ModelKind::Ising
                                            : ModelKind::Heisenberg;
    const int n = kind == ModelKind::Fermi ? 3 : 5;
    const ModelSpec s = make_spec(kind, n, 0.2 + 0.5 * u(rng), 1.0, 0.85 * u(rng),
                                  0.15 * u(rng), 0.15 * u(rng), 0.4 * u(rng));
    const OperatorSum H = models::build_env(s);
    const OperatorSum V = models::build_coupling(s);
    const CoherenceTrace fast =
        coherence_trace(H, V, env_ground(s), times, Method::Krylov);
    const JointEvolutionResult joint =
        joint_evolution_coherence(s, times, Method::Krylov);
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(std::abs(fast.coherence[i] - joint.trace.coherence[i]) < 1e-8);
      joint.densities[i].validate(1e-9);
    }
  }
}

TEST_CASE("two-branch trace matches the oracle at N=10, Fig.1 parameters") {
  const ModelSpec s = make_spec(ModelKind::Ising, 10, 0.5, 1.0, 0.5, 0.1, 0.0);
  const std::vector<double> times = {0.0, 3.0};
  const OperatorSum H = models::build_env(s);
  const OperatorSum V = models::build_coupling(s);
  const CoherenceTrace fast =
      coherence_trace(H, V, env_ground(s), times, Method::Krylov);
  const JointEvolutionResult joint = joint_evolution_coherence(s, times);
  CHECK(std::abs(fast.coherence[1] - joint.trace.coherence[1]) < 1e-8);
}

TEST_CASE("joint evolution at t=0 gives the maximally coherent qubit") {
  const ModelSpec s = make_spec(ModelKind::Ising, 4, 0.5, 1.0, 0.4, 0.05, 0.02);
  const JointEvolutionResult r = joint_evolution_coherence(s, {0.0}, Method::Dense);
  const Eigen::Matrix2cd& rho = r.densities[0].rho;
  CHECK(std::abs(rho(0, 0) - Complex(0.5, 0)) < 1e-12);
  CHECK(std::abs(rho(0, 1) - Complex(0.5, 0)) < 1e-12);
  CHECK(r.trace.coherence[0] == doctest::Approx(1.0));
}

TEST_CASE("dense and krylov stepping agree") {
  const ModelSpec s = make_spec(ModelKind::Ising, 5, 0.5, 1.0, 0.7, 0.0, 0.1);
  const OperatorSum H = models::build_env(s);
  const OperatorSum V = models::build_coupling(s);
  const StateVector G = env_ground(s);
  const auto times = grid(2.5, 7);
  const CoherenceTrace dense = coherence_trace(H, V, G, times, Method::Dense);
  const CoherenceTrace krylov = coherence_trace(H, V, G, times, Method::Krylov);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(std::abs(dense.coherence[i] - krylov.coherence[i]) < 1e-9);
}

TEST_CASE("Hermitian limit preserves branch norms") {
  const ModelSpec s = make_spec(ModelKind::Ising, 6, 0.5, 1.0, 0.0, 0.1, 0.0);
  const OperatorSum H = models::build_env(s);
  const OperatorSum V = models::build_coupling(s);
  const CoherenceTrace tr =
      coherence_trace(H, V, env_ground(s), grid(3.0, 9), Method::Krylov);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    CHECK(std::abs(tr.norm0_sq[i] - 1.0) < 1e-9);
    CHECK(std::abs(tr.normd_sq[i] - 1.0) < 1e-9);
    CHECK(tr.coherence[i] <= 1.0 + 1e-9);
    CHECK(tr.coherence[i] >= 0.0);
  }
  CHECK(std::abs(tr.coherence[0] - 1.0) < 1e-10);
}

TEST_CASE("near the EP, coherence is protected or destroyed by the coupling type") {
  // Reduced-size view of the Fig. 1 contrast; the acceptance suite runs the
  // full stated orderings at N=12.
  const double d_abs = 0.1;
  const std::vector<double> hys = {0.0, 0.5, 0.9};
  const std::vector<double> times = {0.0, 3.0};

  std::vector<double> balanced, hermitian;
  for (double hy : hys) {
    const double d = d_abs / std::sqrt(2.0);
    const ModelSpec sb = make_spec(ModelKind::Ising, 8, 0.5, 1.0, hy, d, d);
    const OperatorSum Hb = models::build_env(sb);
    balanced.push_back(coherence_trace(Hb, models::build_coupling(sb), env_ground(sb),
                                       times, Method::Krylov)
                           .coherence[1]);
    const ModelSpec sh = make_spec(ModelKind::Ising, 8, 0.5, 1.0, hy, d_abs, 0.0);
    const OperatorSum Hh = models::build_env(sh);
    hermitian.push_back(coherence_trace(Hh, models::build_coupling(sh), env_ground(sh),
                                        times, Method::Krylov)
                            .coherence[1]);
  }
  // Balanced coupling: approaching the EP protects coherence.
  CHECK(balanced[2] > balanced[0]);
  CHECK(balanced[2] > balanced[1]);
  CHECK(balanced[2] > 0.999);
  // Hermitian-only coupling: approaching the EP enhances decoherence.
  CHECK(hermitian[0] > hermitian[1]);
  CHECK(hermitian[1] > hermitian[2]);
  // The contrast at the near-EP point.
  CHECK(balanced[2] - hermitian[2] > 0.25);
}

TEST_CASE("time grids are validated") {
  const ModelSpec s = make_spec(ModelKind::Ising, 3, 0.5, 1.0, 0.3, 0.1, 0.0);
  const OperatorSum H = models::build_env(s);
  const OperatorSum V = models::build_coupling(s);
  const StateVector G = env_ground(s);
  CHECK_THROWS_AS((void)coherence_trace(H, V, G, {0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)coherence_trace(H, V, G, {0.0, 1.0, 1.0}),
                  std::invalid_argument);
  StateVector big = 2.0 * G;
  CHECK_THROWS_AS((void)coherence_trace(H, V, big, {0.0, 1.0}),
                  std::invalid_argument);
}
