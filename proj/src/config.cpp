#include "exclusim/config.hpp"

#include <bit>
#include <string>

#include "exclusim/error.hpp"
#include "exclusim/rng.hpp"

namespace exclusim {

std::size_t Occupancy::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

Occupancy Occupancy::from_mask(std::size_t sites, std::uint64_t mask) {
  if (sites > 64) throw InvalidArgument("config", "mask form needs at most 64 sites");
  Occupancy o(sites);
  if (sites < 64) mask &= (std::uint64_t{1} << sites) - 1;
  if (!o.words_.empty()) o.words_[0] = mask;
  return o;
}

TaggedConfig make_config(const LatticeBox& lattice, Site x, const Occupancy& eta) {
  if (eta.size() != lattice.site_count())
    throw InvalidArgument("config", "occupancy has " + std::to_string(eta.size()) + " bits, lattice has " +
                                        std::to_string(lattice.site_count()) + " sites");
  if (x >= lattice.site_count()) throw InvalidArgument("config", "tagged site out of range");
  if (!eta[x]) throw InvalidArgument("config", "tagged site must be occupied");
  return {x, eta, eta.count()};
}

int conductance(const LatticeBox& lattice, const TaggedConfig& cfg, EdgeId e) {
  if (e >= lattice.edge_count()) throw InvalidArgument("config", "edge id out of range");
  const Edge& ed = lattice.edge(e);
  return cfg.eta[ed.u] != cfg.eta[ed.v] ? 1 : 0;
}

void flip_in_place(const LatticeBox& lattice, TaggedConfig& cfg, EdgeId e) {
  const Edge& ed = lattice.edge(e);
  cfg.eta.swap_bits(ed.u, ed.v);
  if (cfg.X == ed.u)
    cfg.X = ed.v;
  else if (cfg.X == ed.v)
    cfg.X = ed.u;
}

TaggedConfig apply_flip(const LatticeBox& lattice, TaggedConfig cfg, EdgeId e) {
  if (e >= lattice.edge_count()) throw InvalidArgument("config", "edge id out of range");
  flip_in_place(lattice, cfg, e);
  return cfg;
}

TaggedConfig sample_initial(const LatticeBox& lattice, double rho, Xoshiro256& rng) {
  if (!(rho > 0.0 && rho < 1.0))
    throw InvalidArgument("config", "rho must lie in (0,1), got " + std::to_string(rho));
  Occupancy eta(lattice.site_count());
  const Site o = lattice.origin();
  for (Site s = 0; s < lattice.site_count(); ++s) {
    // Draw for every site, origin included, so the stream layout is fixed.
    const bool b = rng.bernoulli(rho);
    eta.set(s, s == o ? true : b);
  }
  const std::size_t c = eta.count();
  return {o, std::move(eta), c};
}

TaggedConfig sample_initial(const LatticeBox& lattice, double rho, std::uint64_t seed) {
  auto rng = make_stream(seed, {stream_tag::initial, 0, 0, 0});
  return sample_initial(lattice, rho, rng);
}

std::string to_hex(const TaggedConfig& cfg) {
  static const char* digits = "0123456789abcdef";
  std::string s = std::to_string(cfg.X) + ":";
  for (std::size_t i = 0; i < cfg.eta.size(); i += 4) {
    unsigned nib = 0;
    for (std::size_t b = 0; b < 4 && i + b < cfg.eta.size(); ++b) nib |= (cfg.eta[i + b] ? 1u : 0u) << b;
    s.push_back(digits[nib]);
  }
  return s;
}

TaggedConfig from_hex(const LatticeBox& lattice, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0) throw InvalidArgument("config", "expected 'X:hexbits'");
  Site x = 0;
  try {
    x = static_cast<Site>(std::stoul(text.substr(0, colon)));
  } catch (const std::exception&) {
    throw InvalidArgument("config", "bad tagged site in '" + text + "'");
  }
  const std::string hex = text.substr(colon + 1);
  const std::size_t n = lattice.site_count();
  if (hex.size() != (n + 3) / 4) throw InvalidArgument("config", "hex payload has wrong length");
  Occupancy eta(n);
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const char c = hex[k];
    unsigned nib;
    if (c >= '0' && c <= '9')
      nib = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f')
      nib = static_cast<unsigned>(c - 'a' + 10);
    else
      throw InvalidArgument("config", "bad hex digit in '" + text + "'");
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = 4 * k + b;
      if (i < n)
        eta.set(i, (nib >> b) & 1u);
      else if ((nib >> b) & 1u)
        throw InvalidArgument("config", "hex payload sets bits beyond the lattice");
    }
  }
  return make_config(lattice, x, eta);
}

LocalFunction indicator_at_origin() {
  LocalFunction f;
  f.radius = 0;
  f.nonnegative = true;
  f.name = "indicator_origin";
  f.rule = [](const std::vector<int>& x, const std::vector<std::uint8_t>&) {
    for (int c : x)
      if (c != 0) return 0.0;
    return 1.0;
  };
  return f;
}

double evaluate(const LocalFunction& f, const LatticeBox& lattice, const TaggedConfig& cfg) {
  if (lattice.is_torus() ? 2 * f.radius + 1 > lattice.side() : f.radius > lattice.radius())
    throw InvalidArgument("config", "lattice does not contain B_" + std::to_string(f.radius));
  if (lattice.linf_norm(cfg.X) > f.radius) return 0.0;
  const auto sites = ball(lattice, f.radius);
  std::vector<std::uint8_t> local(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) local[i] = cfg.eta[sites[i]] ? 1 : 0;
  return f.rule(lattice.displacement(lattice.origin(), cfg.X), local);
}

}  // namespace exclusim
