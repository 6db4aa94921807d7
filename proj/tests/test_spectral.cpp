#include <doctest.h>

#include <cmath>
#include <random>

#include "epsim/models.hpp"
#include "epsim/spectral.hpp"
#include "test_util.hpp"

using namespace epsim;
using namespace epsim::spectral;
using epsim::models::ModelKind;
using epsim::models::ModelSpec;

namespace {

ModelSpec ising(int n, double J, double hx, double hy) {
  ModelSpec s;
  s.kind = ModelKind::Ising;
  s.num_sites = n;
  s.J = J;
  s.hx = hx;
  s.hy = hy;
  return s;
}

double aligned_distance(const StateVector& a, const StateVector& b) {
  const Complex phase = a.dot(b);
  const Complex unit = std::abs(phase) > 0 ? phase / std::abs(phase) : Complex(1, 0);
  return (a - b / unit).norm();
}

}  // namespace

TEST_CASE("closed-form two-site ground state") {
  const StateVector v = ground_state_ising2_closed_form(0.5, 1.0, 0.0);
  CHECK(v[0].real() == doctest::Approx(0.5574).epsilon(1e-3));
  CHECK(v[1].real() == doctest::Approx(0.4352).epsilon(1e-3));
  CHECK(v[2].real() == doctest::Approx(0.4352).epsilon(1e-3));
  CHECK(v[3].real() == doctest::Approx(0.5574).epsilon(1e-3));
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);

  // With hy just below hx, the first component dominates the last.
  const StateVector w = ground_state_ising2_closed_form(0.3, 1.0, 0.97);
  CHECK(w[0].real() > w[3].real());

  CHECK_THROWS_AS((void)ground_state_ising2_closed_form(0.1, 0.2, 1.0),
                  std::invalid_argument);
}

TEST_CASE("dense ground state matches the closed form over a (J, hy) grid") {
  for (double J : {0.01, 0.25, 0.5, 0.75, 1.0}) {
    for (double hy : {0.0, 0.2, 0.45, 0.7, 0.9}) {
      const OperatorSum H = models::build_ising_env(ising(2, J, 1.0, hy));
      const GroundState g = ground_state(H);
      const StateVector closed = ground_state_ising2_closed_form(J, 1.0, hy);
      CHECK(g.residual <= 1e-8 * H.to_dense().norm());
      CHECK(aligned_distance(closed, g.vector) < 1e-10);
    }
  }
}

TEST_CASE("at the exceptional point the polarized state is selected exactly") {
  for (int n : {2, 4, 6, 8}) {
    const OperatorSum H = models::build_ising_env(ising(n, 0.5, 1.0, 1.0));
    const GroundState g = ground_state(H);
    CHECK(g.polarized_overlap == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g.vector[0] - Complex(1, 0)) < 1e-12);
    CHECK(g.vector.tail(g.vector.size() - 1).norm() < 1e-12);
    // Energy is -J * (bond count) with the N=2 dedup in effect.
    const double bonds = n == 2 ? 1.0 : static_cast<double>(n);
    CHECK(g.energy.real() == doctest::Approx(-0.5 * bonds).epsilon(1e-10));
    CHECK(std::abs(g.energy.imag()) < 1e-10);
  }
}

TEST_CASE("ferromagnetic doublet: degenerate flag and polarized tie-break") {
  const OperatorSum H = models::build_ising_env(ising(4, 1.0, 0.0, 0.0));
  const GroundState g = ground_state(H);
  CHECK(g.degenerate);
  CHECK(g.polarized_overlap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(g.vector[0] - Complex(1, 0)) < 1e-10);
}

TEST_CASE("selection is stable under tiny perturbations away from the EP") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  const ModelSpec base = ising(4, 0.5, 1.0, 0.8);  // |hx| - |hy| = 0.2
  const OperatorSum H = models::build_env(base);
  const GroundState g0 = ground_state(H);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<PauliTerm> noise;
    for (int j = 0; j < 4; ++j)
      noise.push_back(make_term(Complex(1e-10 * gauss(rng), 1e-10 * gauss(rng)), 4,
                                {{j, testutil::random_string(1, rng)[0]}}));
    const OperatorSum Hp = H + OperatorSum(Basis::full(4), noise);
    const GroundState g1 = ground_state(Hp);
    CHECK(aligned_distance(g0.vector, g1.vector) < 1e-6);
  }
}

TEST_CASE("krylov ground state agrees with the dense solver") {
  for (double hy : {0.0, 0.5, 0.9, 0.99}) {
    const OperatorSum H = models::build_ising_env(ising(8, 0.5, 1.0, hy));
    const GroundState dense = ground_state(H);
    const GroundState krylov = ground_state_krylov(H);
    CHECK(std::abs(dense.energy - krylov.energy) < 1e-7);
    CHECK(aligned_distance(dense.vector, krylov.vector) < 1e-6);
  }
  // Exactly at the EP both paths return the polarized state.
  const OperatorSum Hep = models::build_ising_env(ising(8, 0.5, 1.0, 1.0));
  const GroundState kep = ground_state_krylov(Hep);
  CHECK(std::abs(kep.vector[0] - Complex(1, 0)) < 1e-12);

  const ModelSpec fermi = [] {
    ModelSpec s;
    s.kind = ModelKind::Fermi;
    s.num_sites = 4;
    s.J = 0.1;
    s.U = 0.4;
    s.hx = 1.0;
    s.hy = 0.5;
    return s;
  }();
  const OperatorSum Hf = models::build_env(fermi);
  const std::uint64_t ref = models::polarized_reference_bits(fermi);
  const GroundState fd = ground_state(Hf, ref);
  const GroundState fk = ground_state_krylov(Hf, ref);
  CHECK(std::abs(fd.energy - fk.energy) < 1e-7);
  CHECK(aligned_distance(fd.vector, fk.vector) < 1e-6);
}

TEST_CASE("susceptibility: zero at zero delta, zero on the balanced EP line") {
  const ModelSpec s = ising(4, 0.5, 1.0, 0.5);
  CHECK(susceptibility(s, {1.0, 0.5}, {0.0, 0.0}).chi == doctest::Approx(0.0));

  const double d = 0.1 / std::sqrt(2.0);
  const SusceptibilityPoint ep = susceptibility(ising(4, 0.5, 1.0, 1.0), {1.0, 1.0}, {d, d});
  CHECK(std::abs(ep.chi) < 1e-10);
}

TEST_CASE("susceptibility is nonnegative and vanishes continuously with |delta|") {
  const ModelSpec s = ising(4, 0.5, 1.0, 0.6);
  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {1e-2, 1e-3, 1e-4}) {
    const SusceptibilityPoint p =
        susceptibility(s, {1.0, 0.6}, {0.1 * scale, 0.05 * scale});
    CHECK(p.chi >= -1e-12);
    CHECK(p.chi < prev);
    prev = p.chi;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("susceptibility increases towards the EP for Hermitian-only coupling") {
  const ModelSpec s = ising(6, 0.5, 1.0, 0.0);
  const SusceptibilityPoint far = susceptibility(s, {1.0, 0.5}, {0.1, 0.0});
  const SusceptibilityPoint close = susceptibility(s, {1.0, 0.95}, {0.1, 0.0});
  CHECK(close.chi > far.chi);
}

TEST_CASE("balanced coupling: chi valley tracks the exceptional line") {
  const ModelSpec s = ising(6, 0.5, 1.0, 0.0);
  const double d = 0.1 / std::sqrt(2.0);
  std::vector<double> hys = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t argmin = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hys.size(); ++i) {
    const double chi = susceptibility(s, {1.0, hys[i]}, {d, d}).chi;
    if (chi < best) {
      best = chi;
      argmin = i;
    }
  }
  CHECK(hys[argmin] == doctest::Approx(1.0));
}

TEST_CASE("susceptibility map: single point reduction and mirror symmetry") {
  const ModelSpec s = ising(4, 0.5, 1.0, 0.0);
  const SusceptibilityMap one = susceptibility_map(s, {1.0}, {0.4}, {0.07, 0.03});
  const SusceptibilityPoint direct = susceptibility(s, {1.0, 0.4}, {0.07, 0.03});
  CHECK(one.chi(0, 0) == doctest::Approx(direct.chi).epsilon(1e-12));

  const std::vector<double> hx = {0.8, 1.0};
  const std::vector<double> hy = {0.2, 0.5, 0.8};
  const SusceptibilityMap up = susceptibility_map(s, hx, hy, {0.05, 0.04});
  std::vector<double> hy_neg;
  for (double v : hy) hy_neg.push_back(-v);
  const SusceptibilityMap down = susceptibility_map(s, hx, hy_neg, {0.05, -0.04});
  CHECK((up.chi - down.chi).norm() < 1e-9);

  CHECK_THROWS_AS((void)susceptibility_map(s, {}, hy, {0.1, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("spectrum reality diagnostic") {
  CHECK(spectrum_reality(models::build_ising_env(ising(4, 0.5, 1.0, 0.0))) < 1e-10);
  CHECK(spectrum_reality(models::build_ising_env(ising(4, 0.5, 1.0, 0.5))) < 1e-8);
  CHECK(spectrum_reality(models::build_ising_env(ising(4, 0.5, 1.0, 1.5))) > 0.01);
}
