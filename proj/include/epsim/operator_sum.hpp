// operator_sum.hpp — Complex-weighted sums of Pauli strings with matrix-free application

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsim/basis.hpp"

namespace epsim {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;

inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 14;

enum class SiteOp : std::uint8_t { I, X, Y, Z };

struct PauliTerm {
  Complex coeff;
  std::vector<SiteOp> ops;  // one entry per site
};

// A sum of complex-weighted tensor-product strings of single-site operators.
// Every Hamiltonian in the library is one of these. Application to a state is
// matrix-free: each string compiles to a bit-flip mask, a sign mask and a
// scalar, so a term costs one pass over the basis.
//
//   string|k> = i^{#Y} * (-1)^{popcount(k & (ymask|zmask))} |k ^ (xmask|ymask)>
//
// Immutable after construction; all operations are pure.
class OperatorSum {
 public:
  OperatorSum(Basis basis, std::vector<PauliTerm> terms)
      : basis_(std::move(basis)), terms_(std::move(terms)) {
    compile();
  }

  explicit OperatorSum(Basis basis) : basis_(std::move(basis)) {}

  const Basis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }
  int num_sites() const { return basis_.num_sites(); }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  StateVector apply(const StateVector& v) const {
    if (static_cast<std::size_t>(v.size()) != dim())
      throw std::invalid_argument("OperatorSum::apply: dimension mismatch");
    StateVector out = StateVector::Zero(v.size());
    const std::size_t d = dim();
    if (basis_.is_full()) {
      for (const auto& t : compiled_) {
        for (std::size_t m = 0; m < d; ++m) {
          const std::uint64_t src = m ^ t.flip;
          const double sgn = parity_sign(src & t.sign);
          out[static_cast<Eigen::Index>(m)] +=
              t.coeff * sgn * v[static_cast<Eigen::Index>(src)];
        }
      }
    } else {
      for (const auto& t : compiled_) {
        for (std::size_t m = 0; m < d; ++m) {
          const std::uint64_t src_bits = basis_.bits(m) ^ t.flip;
          const std::ptrdiff_t j = basis_.index_of(src_bits);
          if (j < 0) continue;  // restriction P H P to the sector
          const double sgn = parity_sign(src_bits & t.sign);
          out[static_cast<Eigen::Index>(m)] += t.coeff * sgn * v[j];
        }
      }
    }
    return out;
  }

  DenseMatrix to_dense(std::size_t cap = kDefaultDenseCap) const {
    const std::size_t d = dim();
    if (d > cap)
      throw std::invalid_argument("OperatorSum::to_dense: dimension " +
                                  std::to_string(d) + " exceeds cap " +
                                  std::to_string(cap));
    DenseMatrix M = DenseMatrix::Zero(d, d);
    for (const auto& t : compiled_) {
      for (std::size_t k = 0; k < d; ++k) {
        const std::uint64_t kb = basis_.bits(k);
        const std::ptrdiff_t row = basis_.index_of(kb ^ t.flip);
        if (row < 0) continue;
        M(row, static_cast<Eigen::Index>(k)) += t.coeff * parity_sign(kb & t.sign);
      }
    }
    return M;
  }

  OperatorSum operator+(const OperatorSum& other) const {
    if (!basis_.compatible_with(other.basis_))
      throw std::invalid_argument("OperatorSum::operator+: incompatible bases");
    std::vector<PauliTerm> all = terms_;
    all.insert(all.end(), other.terms_.begin(), other.terms_.end());
    return OperatorSum(basis_, std::move(all));
  }

  OperatorSum scaled(Complex factor) const {
    std::vector<PauliTerm> t = terms_;
    for (auto& term : t) term.coeff *= factor;
    return OperatorSum(basis_, std::move(t));
  }

  // 1-norm of the coefficients; cheap scale estimate for tolerances.
  double coeff_norm1() const {
    double s = 0;
    for (const auto& t : terms_) s += std::abs(t.coeff);
    return s;
  }

 private:
  struct Compiled {
    Complex coeff;       // term coefficient times i^{#Y}
    std::uint64_t flip;  // X and Y sites
    std::uint64_t sign;  // Y and Z sites
  };

  static double parity_sign(std::uint64_t bits) {
    return (std::popcount(bits) & 1) ? -1.0 : 1.0;
  }

  void compile() {
    const auto n = static_cast<std::size_t>(basis_.num_sites());
    compiled_.reserve(terms_.size());
    for (const auto& term : terms_) {
      if (term.ops.size() != n)
        throw std::invalid_argument(
            "OperatorSum: term string length does not match site count");
      Compiled c{term.coeff, 0, 0};
      int ny = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << j;
        switch (term.ops[j]) {
          case SiteOp::I: break;
          case SiteOp::X: c.flip |= bit; break;
          case SiteOp::Y: c.flip |= bit; c.sign |= bit; ++ny; break;
          case SiteOp::Z: c.sign |= bit; break;
        }
      }
      constexpr Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      c.coeff *= i_pow[ny & 3];
      compiled_.push_back(c);
    }
  }

  Basis basis_;
  std::vector<PauliTerm> terms_;
  std::vector<Compiled> compiled_;
};

inline StateVector apply(const OperatorSum& op, const StateVector& v) {
  return op.apply(v);
}

inline DenseMatrix to_dense(const OperatorSum& op,
                            std::size_t cap = kDefaultDenseCap) {
  return op.to_dense(cap);
}

// Single-string helper used all over the model builders and tests.
inline PauliTerm make_term(Complex coeff, int num_sites,
                           std::initializer_list<std::pair<int, SiteOp>> sites) {
  PauliTerm t{coeff, std::vector<SiteOp>(num_sites, SiteOp::I)};
  for (const auto& [j, op] : sites) {
    if (j < 0 || j >= num_sites)
      throw std::invalid_argument("make_term: site index out of range");
    t.ops[static_cast<std::size_t>(j)] = op;
  }
  return t;
}

}  // namespace epsim
