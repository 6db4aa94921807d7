// basis.hpp — Computational basis for spin chains and number-conserving fermion sectors

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace epsim {

// Site j of a basis state maps to bit j of the index; bit value 0 is the
// Z = +1 eigenstate. A Basis is either the full 2^n space (indices are bit
// patterns) or the subspace with a fixed popcount on a mask of sites, used
// for fixed-particle-number fermion sectors. Immutable after construction.
class Basis {
 public:
  static Basis full(int num_sites) {
    if (num_sites < 1 || num_sites > 30)
      throw std::invalid_argument("Basis::full: num_sites out of range");
    Basis b;
    b.num_sites_ = num_sites;
    return b;
  }

  // All states with popcount(bits & mask) == count. Sites outside the mask
  // are unconstrained (used to adjoin a free qubit to a fermion sector).
  static Basis number_sector(int num_sites, std::uint64_t mask, int count) {
    if (num_sites < 1 || num_sites > 30)
      throw std::invalid_argument("Basis::number_sector: num_sites out of range");
    if (count < 0 || count > std::popcount(mask))
      throw std::invalid_argument("Basis::number_sector: count out of range");
    Basis b;
    b.num_sites_ = num_sites;
    b.sector_mask_ = mask;
    b.sector_count_ = count;
    const std::uint64_t space = std::uint64_t{1} << num_sites;
    for (std::uint64_t s = 0; s < space; ++s)
      if (std::popcount(s & mask) == count) b.states_.push_back(s);
    if (b.states_.empty())
      throw std::invalid_argument("Basis::number_sector: empty sector");
    return b;
  }

  int num_sites() const { return num_sites_; }
  bool is_full() const { return states_.empty(); }

  std::size_t dim() const {
    return is_full() ? (std::size_t{1} << num_sites_) : states_.size();
  }

  std::uint64_t bits(std::size_t index) const {
    return is_full() ? static_cast<std::uint64_t>(index) : states_[index];
  }

  // Index of a bit pattern, or -1 when it lies outside the basis.
  std::ptrdiff_t index_of(std::uint64_t bits) const {
    if (is_full()) {
      if (bits >= dim()) return -1;
      return static_cast<std::ptrdiff_t>(bits);
    }
    auto it = std::lower_bound(states_.begin(), states_.end(), bits);
    if (it == states_.end() || *it != bits) return -1;
    return it - states_.begin();
  }

  // Same constraint with one more (unconstrained) site appended at the top.
  Basis with_extra_site() const {
    if (is_full()) return full(num_sites_ + 1);
    return number_sector(num_sites_ + 1, sector_mask_, sector_count_);
  }

  bool compatible_with(const Basis& other) const {
    return num_sites_ == other.num_sites_ && sector_mask_ == other.sector_mask_ &&
           sector_count_ == other.sector_count_;
  }

 private:
  Basis() = default;
  int num_sites_ = 0;
  std::uint64_t sector_mask_ = 0;
  int sector_count_ = 0;
  std::vector<std::uint64_t> states_;  // empty when full; sorted ascending otherwise
};

}  // namespace epsim
