#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exclusim/lattice.hpp"

namespace exclusim {

/// TAGGED-SECTOR:    (x, eta) with eta(x)=1 and a fixed particle count, uniform weights.
/// KAWASAKI-SECTOR:  eta with a fixed particle count, uniform weights.
/// TAGGED-PRODUCT:   all (x, eta) with eta(x)=1; conditional on X=x the other
///                   sites are Bernoulli(rho); X is uniform under the joint weight.
/// KAWASAKI-PRODUCT: all eta, product Bernoulli(rho).
enum class Mode { tagged_sector, kawasaki_sector, tagged_product, kawasaki_product };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

inline constexpr Site no_site = ~Site{0};
inline constexpr std::uint64_t default_capacity = std::uint64_t{1} << 24;

/// One state. `x` is no_site in the Kawasaki modes. `eta` is a site mask.
struct State {
  Site x = no_site;
  std::uint64_t eta = 0;
  bool operator==(const State&) const = default;
};

std::uint64_t binomial(int n, int k);
//! Rank of a fixed-popcount mask in colex order: sum_i C(p_i, i+1).
std::uint64_t colex_rank(std::uint64_t mask);
std::uint64_t colex_unrank(std::uint64_t rank, int k);
//! Next mask with the same popcount in increasing numeric (= colex) order.
inline std::uint64_t next_same_popcount(std::uint64_t v) {
  const std::uint64_t t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (__builtin_ctzll(v) + 1));
}
//! Removes bit x, shifting the higher bits down.
inline std::uint64_t compress_bit(std::uint64_t eta, unsigned x) {
  const std::uint64_t low = (std::uint64_t{1} << x) - 1;
  return (eta & low) | ((eta >> (x + 1)) << x);
}
//! Inverse of compress_bit, with bit x set.
inline std::uint64_t expand_bit(std::uint64_t c, unsigned x) {
  const std::uint64_t low = (std::uint64_t{1} << x) - 1;
  return (c & low) | ((c >> x) << (x + 1)) | (std::uint64_t{1} << x);
}

/// Index <-> state bijection of a finite sector or product space.
class StateSpace {
 public:
  const LatticeBox& lattice() const noexcept { return lattice_; }
  Mode mode() const noexcept { return mode_; }
  bool tagged() const noexcept { return mode_ == Mode::tagged_sector || mode_ == Mode::tagged_product; }
  bool product() const noexcept { return mode_ == Mode::tagged_product || mode_ == Mode::kawasaki_product; }
  double rho() const noexcept { return rho_; }
  //! Particle count of a sector, -1 for product spaces.
  int particles() const noexcept { return k_; }
  std::uint64_t size() const noexcept { return size_; }
  //! States per tagged site (tagged modes) or the whole size.
  std::uint64_t per_site() const noexcept { return per_site_; }
  int sites() const noexcept { return n_; }

  State state(std::uint64_t i) const;
  std::optional<std::uint64_t> find(const State& s) const;
  std::uint64_t index(const State& s) const;

  //! Stationary weight; sums to 1.
  double weight(std::uint64_t i) const;
  //! Weight under the conditional measure given X = x (tagged modes), or the
  //! stationary weight (Kawasaki modes). Sums to 1 over each tagged site.
  double conditional_weight(std::uint64_t i) const;

 private:
  friend StateSpace enumerate(const LatticeBox&, double, Mode, std::uint64_t);
  friend StateSpace enumerate_sector(const LatticeBox&, int, Mode, std::uint64_t);
  double popcount_weight(int count) const { return pop_weight_[static_cast<std::size_t>(count)]; }

  LatticeBox lattice_;
  Mode mode_ = Mode::tagged_sector;
  double rho_ = 0;
  int k_ = -1;
  int n_ = 0;
  std::uint64_t size_ = 0;
  std::uint64_t per_site_ = 0;
  std::vector<double> pop_weight_;
};

/// Sector modes use k = floor(rho |B|); product modes use rho as the Bernoulli
/// parameter. Throws CapacityExceeded with the refused count.
StateSpace enumerate(const LatticeBox& lattice, double rho, Mode mode,
                     std::uint64_t capacity = default_capacity);
/// Sector with an explicit particle count k.
StateSpace enumerate_sector(const LatticeBox& lattice, int k, Mode mode,
                            std::uint64_t capacity = default_capacity);

/// Calls fn(index, state) for every state in index order without per-state unranking.
template <class Fn>
void for_each_state(const StateSpace& space, Fn&& fn) {
  const int n = space.sites();
  const std::uint64_t per = space.per_site();
  auto walk_subsets = [&](int bits, std::uint64_t base, auto&& emit) {
    std::uint64_t c = bits == 0 ? 0 : (std::uint64_t{1} << bits) - 1;
    for (std::uint64_t r = 0; r < per; ++r) {
      emit(base + r, c);
      if (r + 1 < per) c = next_same_popcount(c);
    }
  };
  switch (space.mode()) {
    case Mode::tagged_sector:
      for (Site x = 0; x < static_cast<Site>(n); ++x)
        walk_subsets(space.particles() - 1, x * per,
                     [&](std::uint64_t i, std::uint64_t c) { fn(i, State{x, expand_bit(c, x)}); });
      break;
    case Mode::kawasaki_sector:
      walk_subsets(space.particles(), 0, [&](std::uint64_t i, std::uint64_t c) { fn(i, State{no_site, c}); });
      break;
    case Mode::tagged_product:
      for (Site x = 0; x < static_cast<Site>(n); ++x)
        for (std::uint64_t r = 0; r < per; ++r) fn(x * per + r, State{x, expand_bit(r, x)});
      break;
    case Mode::kawasaki_product:
      for (std::uint64_t r = 0; r < per; ++r) fn(r, State{no_site, r});
      break;
  }
}

//! floor(rho n), guarded against representation error just below an integer.
int sector_particles(double rho, std::size_t sites);

}  // namespace exclusim
