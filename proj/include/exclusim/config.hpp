#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "exclusim/lattice.hpp"

namespace exclusim {

/// Packed occupancy bitfield, one bit per site.
class Occupancy {
 public:
  Occupancy() = default;
  explicit Occupancy(std::size_t sites) : n_(sites), words_((sites + 63) / 64, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool operator[](std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool b) noexcept {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (b)
      words_[i >> 6] |= m;
    else
      words_[i >> 6] &= ~m;
  }
  //! Exchange the bits at i and j.
  void swap_bits(std::size_t i, std::size_t j) noexcept {
    if ((*this)[i] != (*this)[j]) {
      words_[i >> 6] ^= std::uint64_t{1} << (i & 63);
      words_[j >> 6] ^= std::uint64_t{1} << (j & 63);
    }
  }
  std::size_t count() const noexcept;

  //! The low 64 sites as a mask (exact module boxes never exceed 64 sites).
  std::uint64_t low_word() const noexcept { return words_.empty() ? 0 : words_[0]; }
  static Occupancy from_mask(std::size_t sites, std::uint64_t mask);

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }
  bool operator==(const Occupancy&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// A state (X, eta) with eta(X) = 1.
struct TaggedConfig {
  Site X = 0;
  Occupancy eta;
  std::size_t count = 0;

  bool operator==(const TaggedConfig&) const = default;
};

TaggedConfig make_config(const LatticeBox& lattice, Site x, const Occupancy& eta);

//! a_e(eta): 1 iff the endpoints of e carry different occupancies.
int conductance(const LatticeBox& lattice, const TaggedConfig& cfg, EdgeId e);
//! (x^e, eta^e).
TaggedConfig apply_flip(const LatticeBox& lattice, TaggedConfig cfg, EdgeId e);
void flip_in_place(const LatticeBox& lattice, TaggedConfig& cfg, EdgeId e);

/// X at the origin, eta(origin) = 1, other sites i.i.d. Bernoulli(rho).
TaggedConfig sample_initial(const LatticeBox& lattice, double rho, std::uint64_t seed);

class Xoshiro256;
TaggedConfig sample_initial(const LatticeBox& lattice, double rho, Xoshiro256& rng);

/// "X:hexbits", bit i of the hex payload is site i (little-endian nibbles).
std::string to_hex(const TaggedConfig& cfg);
TaggedConfig from_hex(const LatticeBox& lattice, const std::string& text);

/// Local function of support radius r. The rule only ever sees the position of
/// X relative to the origin and the occupancies of B_r (in index order of
/// ball(lattice, r)), so it is measurable with respect to B_r by construction.
struct LocalFunction {
  using Rule = std::function<double(const std::vector<int>& x, const std::vector<std::uint8_t>& local)>;
  int radius = 0;
  Rule rule;
  bool nonnegative = true;
  std::string name;
};

//! f(x, eta) = 1{x = 0}.
LocalFunction indicator_at_origin();

double evaluate(const LocalFunction& f, const LatticeBox& lattice, const TaggedConfig& cfg);

}  // namespace exclusim
