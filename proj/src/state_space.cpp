#include "exclusim/state_space.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "exclusim/error.hpp"

namespace exclusim {

namespace {

struct BinomialTable {
  std::array<std::array<std::uint64_t, 65>, 65> c{};
  BinomialTable() {
    for (int n = 0; n <= 64; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
    }
  }
};

const BinomialTable& table() {
  static const BinomialTable t;
  return t;
}

using u128 = unsigned __int128;

std::uint64_t saturate(u128 v) {
  return v > std::numeric_limits<std::uint64_t>::max() ? std::numeric_limits<std::uint64_t>::max()
                                                       : static_cast<std::uint64_t>(v);
}

u128 count_states(std::size_t n, int k, Mode mode) {
  if (n > 64) return ~u128{0};
  const auto nn = static_cast<int>(n);
  switch (mode) {
    case Mode::tagged_sector:
      return static_cast<u128>(n) * binomial(nn - 1, k - 1);
    case Mode::kawasaki_sector:
      return binomial(nn, k);
    case Mode::tagged_product:
      return static_cast<u128>(n) << (n - 1);
    case Mode::kawasaki_product:
      return u128{1} << n;
  }
  return 0;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::tagged_sector:
      return "tagged";
    case Mode::kawasaki_sector:
      return "kawasaki";
    case Mode::tagged_product:
      return "tagged_product";
    case Mode::kawasaki_product:
      return "kawasaki_product";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "tagged" || s == "tagged_sector") return Mode::tagged_sector;
  if (s == "kawasaki" || s == "kawasaki_sector") return Mode::kawasaki_sector;
  if (s == "tagged_product") return Mode::tagged_product;
  if (s == "kawasaki_product") return Mode::kawasaki_product;
  throw InvalidArgument("exact", "unknown mode '" + s + "'");
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (n > 64) throw InvalidArgument("exact", "binomial table covers n <= 64");
  return table().c[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

std::uint64_t colex_rank(std::uint64_t mask) {
  std::uint64_t r = 0;
  int i = 1;
  while (mask) {
    const int p = std::countr_zero(mask);
    r += table().c[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
    mask &= mask - 1;
    ++i;
  }
  return r;
}

std::uint64_t colex_unrank(std::uint64_t rank, int k) {
  std::uint64_t mask = 0;
  int p = 63;
  for (int i = k; i >= 1; --i) {
    while (binomial(p, i) > rank) --p;
    rank -= binomial(p, i);
    mask |= std::uint64_t{1} << p;
    --p;
  }
  return mask;
}

int sector_particles(double rho, std::size_t sites) {
  return static_cast<int>(std::floor(rho * static_cast<double>(sites) + 1e-9));
}

State StateSpace::state(std::uint64_t i) const {
  if (i >= size_) throw InvalidArgument("exact", "state index out of range");
  switch (mode_) {
    case Mode::tagged_sector: {
      const auto x = static_cast<Site>(i / per_site_);
      return {x, expand_bit(colex_unrank(i % per_site_, k_ - 1), x)};
    }
    case Mode::kawasaki_sector:
      return {no_site, colex_unrank(i, k_)};
    case Mode::tagged_product: {
      const auto x = static_cast<Site>(i / per_site_);
      return {x, expand_bit(i % per_site_, x)};
    }
    case Mode::kawasaki_product:
      return {no_site, i};
  }
  return {};
}

std::optional<std::uint64_t> StateSpace::find(const State& s) const {
  const std::uint64_t full = n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1;
  if (s.eta & ~full) return std::nullopt;
  if (tagged()) {
    if (s.x >= static_cast<Site>(n_) || !((s.eta >> s.x) & 1u)) return std::nullopt;
  } else if (s.x != no_site) {
    return std::nullopt;
  }
  switch (mode_) {
    case Mode::tagged_sector:
      if (std::popcount(s.eta) != k_) return std::nullopt;
      return s.x * per_site_ + colex_rank(compress_bit(s.eta, s.x));
    case Mode::kawasaki_sector:
      if (std::popcount(s.eta) != k_) return std::nullopt;
      return colex_rank(s.eta);
    case Mode::tagged_product:
      return s.x * per_site_ + compress_bit(s.eta, s.x);
    case Mode::kawasaki_product:
      return s.eta;
  }
  return std::nullopt;
}

std::uint64_t StateSpace::index(const State& s) const {
  auto r = find(s);
  if (!r) throw InvalidArgument("exact", "state is not in this space");
  return *r;
}

double StateSpace::weight(std::uint64_t i) const {
  switch (mode_) {
    case Mode::tagged_sector:
    case Mode::kawasaki_sector:
      return 1.0 / static_cast<double>(size_);
    case Mode::tagged_product:
      return conditional_weight(i) / n_;
    case Mode::kawasaki_product:
      return popcount_weight(std::popcount(i));
  }
  return 0;
}

double StateSpace::conditional_weight(std::uint64_t i) const {
  switch (mode_) {
    case Mode::tagged_sector:
      return 1.0 / static_cast<double>(per_site_);
    case Mode::kawasaki_sector:
      return 1.0 / static_cast<double>(size_);
    case Mode::tagged_product:
      return popcount_weight(std::popcount(i % per_site_) + 1);
    case Mode::kawasaki_product:
      return popcount_weight(std::popcount(i));
  }
  return 0;
}

namespace {

void check_capacity(const LatticeBox& lattice, Mode mode, int k, std::uint64_t capacity) {
  const u128 count = count_states(lattice.site_count(), k, mode);
  if (count > capacity) throw CapacityExceeded("exact", saturate(count), capacity);
}

}  // namespace

StateSpace enumerate_sector(const LatticeBox& lattice, int k, Mode mode, std::uint64_t capacity) {
  const std::size_t n = lattice.site_count();
  if (mode != Mode::tagged_sector && mode != Mode::kawasaki_sector)
    throw InvalidArgument("exact", "enumerate_sector takes a sector mode");
  if (k < 0 || static_cast<std::size_t>(k) > n)
    throw InvalidArgument("exact", "particle count " + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
  if (mode == Mode::tagged_sector && k < 1)
    throw InvalidArgument("exact", "a tagged sector needs at least one particle");
  check_capacity(lattice, mode, k, capacity);
  StateSpace s;
  s.lattice_ = lattice;
  s.mode_ = mode;
  s.k_ = k;
  s.n_ = static_cast<int>(n);
  s.rho_ = static_cast<double>(k) / static_cast<double>(n);
  s.size_ = static_cast<std::uint64_t>(count_states(n, k, mode));
  s.per_site_ = mode == Mode::tagged_sector ? binomial(s.n_ - 1, k - 1) : s.size_;
  return s;
}

StateSpace enumerate(const LatticeBox& lattice, double rho, Mode mode, std::uint64_t capacity) {
  const std::size_t n = lattice.site_count();
  if (mode == Mode::tagged_sector || mode == Mode::kawasaki_sector) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("exact", "rho must lie in [0,1]");
    StateSpace s = enumerate_sector(lattice, sector_particles(rho, n), mode, capacity);
    s.rho_ = rho;
    return s;
  }
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("exact", "product measures need rho in (0,1)");
  check_capacity(lattice, mode, 0, capacity);
  StateSpace s;
  s.lattice_ = lattice;
  s.mode_ = mode;
  s.rho_ = rho;
  s.k_ = -1;
  s.n_ = static_cast<int>(n);
  s.size_ = static_cast<std::uint64_t>(count_states(n, 0, mode));
  s.per_site_ = mode == Mode::tagged_product ? (std::uint64_t{1} << (n - 1)) : s.size_;
  // Weight of a full configuration with c particles.
  const bool tagged = mode == Mode::tagged_product;
  s.pop_weight_.assign(n + 1, 0.0);
  for (std::size_t c = 0; c <= n; ++c) {
    if (tagged && c == 0) continue;
    const double free_particles = tagged ? static_cast<double>(c - 1) : static_cast<double>(c);
    s.pop_weight_[c] = std::pow(rho, free_particles) * std::pow(1.0 - rho, static_cast<double>(n - c));
  }
  return s;
}

}  // namespace exclusim
