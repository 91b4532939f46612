#include "exclusim/functionals.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_map>

#include "exclusim/error.hpp"
#include "exclusim/semigroup.hpp"

namespace exclusim {

namespace {

void check_length(const StateSpace& space, std::span<const double> h) {
  if (h.size() != space.size()) throw InvalidArgument("exact", "function length does not match the space");
}

void require_tagged_product_torus(const StateSpace& space, const char* what) {
  if (space.mode() != Mode::tagged_product || !space.lattice().is_torus())
    throw InvalidArgument("exact", std::string(what) + " needs a tagged product space on a torus");
}

std::uint64_t site_mask(std::span<const Site> sites) {
  std::uint64_t m = 0;
  for (Site s : sites) m |= std::uint64_t{1} << s;
  return m;
}

// Walks every (state, edge) pair with a_e = 1 and passes conditional weight,
// tagged site (0 for Kawasaki), edge id, state index and target index.
template <class Fn>
void for_each_flip(const StateSpace& space, Fn&& fn) {
  const auto& edges = space.lattice().edges();
  for_each_state(space, [&](std::uint64_t i, const State& s) {
    const double w = space.conditional_weight(i);
    const std::size_t row = space.tagged() ? s.x : 0;
    for (EdgeId e = 0; e < edges.size(); ++e) {
      const Edge& ed = edges[e];
      if (!(((s.eta >> ed.u) ^ (s.eta >> ed.v)) & 1u)) continue;
      fn(w, row, e, i, flip_target(space, s, ed), s);
    }
  });
}

double signed_pow(double v, double p) { return v < 0 ? -std::pow(-v, p) : std::pow(v, p); }

}  // namespace

std::vector<double> tabulate(const StateSpace& space, const LocalFunction& f) {
  if (!space.tagged()) throw InvalidArgument("exact", "local functions of (x, eta) need a tagged space");
  const LatticeBox& lat = space.lattice();
  if (lat.is_torus() ? 2 * f.radius + 1 > lat.side() : f.radius > lat.radius())
    throw InvalidArgument("exact", "lattice does not contain B_" + std::to_string(f.radius));
  const auto sites = ball(lat, f.radius);
  std::vector<double> out(space.size(), 0.0);
  std::vector<std::uint8_t> local(sites.size());
  for_each_state(space, [&](std::uint64_t i, const State& s) {
    if (lat.linf_norm(s.x) > f.radius) return;
    for (std::size_t j = 0; j < sites.size(); ++j) local[j] = (s.eta >> sites[j]) & 1u;
    out[i] = f.rule(lat.displacement(lat.origin(), s.x), local);
  });
  return out;
}

DirichletTable dirichlet_form(const StateSpace& space, std::span<const double> h) {
  check_length(space, h);
  DirichletTable t;
  t.rows = space.tagged() ? static_cast<std::size_t>(space.sites()) : 1;
  t.edges = space.lattice().edge_count();
  t.values.assign(t.rows * t.edges, 0.0);
  for_each_flip(space, [&](double w, std::size_t row, EdgeId e, std::uint64_t i, std::uint64_t j, const State&) {
    const double d = h[j] - h[i];
    t.values[row * t.edges + e] += w * d * d;
  });
  for (double v : t.values) t.total += v;
  return t;
}

double power_pairing(const StateSpace& space, std::span<const double> h, double p) {
  check_length(space, h);
  double total = 0;
  for_each_flip(space, [&](double w, std::size_t, EdgeId, std::uint64_t i, std::uint64_t j, const State&) {
    total += w * (signed_pow(h[j], 2 * p - 1) - signed_pow(h[i], 2 * p - 1)) * (h[j] - h[i]);
  });
  return total;
}

double power_dirichlet(const StateSpace& space, std::span<const double> h, double p) {
  check_length(space, h);
  double total = 0;
  for_each_flip(space, [&](double w, std::size_t, EdgeId, std::uint64_t i, std::uint64_t j, const State&) {
    const double d = signed_pow(h[j], p) - signed_pow(h[i], p);
    total += w * d * d;
  });
  return total;
}

double norm_derivative(const StateSpace& space, std::span<const double> u, double p) {
  return -p * power_pairing(space, u, p);
}

double lp_norm(const StateSpace& space, std::span<const double> h, double p) {
  check_length(space, h);
  if (!(p >= 1.0)) throw InvalidArgument("exact", "lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0;
    for (double v : h) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0;
  for (std::uint64_t i = 0; i < space.size(); ++i) s += space.conditional_weight(i) * std::pow(std::abs(h[i]), p);
  return std::pow(s, 1.0 / p);
}

double stationary_mean(const StateSpace& space, std::span<const double> h) {
  check_length(space, h);
  double s = 0;
  for (std::uint64_t i = 0; i < space.size(); ++i) s += space.weight(i) * h[i];
  return s;
}

std::vector<double> conditional_expectation_A(const StateSpace& space, std::span<const double> h, int k) {
  require_tagged_product_torus(space, "A_k");
  check_length(space, h);
  const auto inside = ball(space.lattice(), k);
  const std::size_t exterior = static_cast<std::size_t>(space.sites()) - inside.size();
  if (exterior > 24) throw CapacityExceeded("exact", std::uint64_t{1} << std::min<std::size_t>(exterior, 63), 1u << 24);
  const std::uint64_t keep = site_mask(inside);
  std::vector<double> out(space.size());
  const std::uint64_t per = space.per_site();
  std::unordered_map<std::uint64_t, std::pair<double, double>> acc;
  for (Site x = 0; x < static_cast<Site>(space.sites()); ++x) {
    acc.clear();
    const std::uint64_t base = x * per;
    for (std::uint64_t r = 0; r < per; ++r) {
      const std::uint64_t i = base + r;
      const std::uint64_t key = expand_bit(r, x) & keep;
      auto& a = acc[key];
      const double w = space.conditional_weight(i);
      a.first += w * h[i];
      a.second += w;
    }
    for (std::uint64_t r = 0; r < per; ++r) {
      const auto& a = acc[expand_bit(r, x) & keep];
      out[base + r] = a.first / a.second;
    }
  }
  return out;
}

std::vector<int> cell_counts(const BoxPartition& part, std::span<const Site> embedding, std::uint64_t eta) {
  std::vector<int> M(part.m, 0);
  for (std::size_t s = 0; s < embedding.size(); ++s)
    if ((eta >> embedding[s]) & 1u) ++M[part.cell_of[s]];
  return M;
}

int density_indicator(std::span<const int> M, double rho, std::size_t cell_size) {
  const double lo = rho * static_cast<double>(cell_size) / 2.0;
  const double hi = (rho + 1.0) * static_cast<double>(cell_size) / 2.0;
  for (int m : M)
    if (m < lo || m > hi) return 0;
  return 1;
}

namespace {

struct Placement {
  LatticeBox parent;
  std::vector<Site> embedding;
  std::vector<std::int64_t> torus_to_box;
};

Placement place(const StateSpace& space, const BoxPartition& part, std::span<const int> M) {
  if (M.size() != part.m)
    throw InvalidArgument("exact", "count vector has " + std::to_string(M.size()) + " entries, partition has " +
                                       std::to_string(part.m) + " cells");
  if (part.d != space.lattice().dim()) throw InvalidArgument("exact", "partition dimension differs from the torus");
  Placement p{build_box(part.d, part.L), {}, {}};
  p.embedding = embed(p.parent, space.lattice());
  p.torus_to_box.assign(static_cast<std::size_t>(space.sites()), -1);
  for (std::size_t s = 0; s < p.embedding.size(); ++s) p.torus_to_box[p.embedding[s]] = static_cast<std::int64_t>(s);
  for (int m : M)
    if (m < 0 || static_cast<std::size_t>(m) > part.cell_size)
      throw UnattainableCounts("exact", "cell count " + std::to_string(m) + " outside [0, " +
                                            std::to_string(part.cell_size) + "]");
  return p;
}

bool matches(const BoxPartition& part, std::span<const Site> embedding, std::uint64_t eta, std::span<const int> M) {
  std::vector<int> c = cell_counts(part, embedding, eta);
  return std::equal(c.begin(), c.end(), M.begin());
}

}  // namespace

double local_average_pi(const StateSpace& space, std::span<const double> h, const BoxPartition& part,
                        std::span<const int> M, Site x) {
  require_tagged_product_torus(space, "local_average_pi");
  check_length(space, h);
  const Placement pl = place(space, part, M);
  if (x >= static_cast<Site>(space.sites()) || pl.torus_to_box[x] < 0)
    throw InvalidArgument("exact", "site is outside the partitioned box");
  const auto cell = part.cell_of[static_cast<std::size_t>(pl.torus_to_box[x])];
  const std::uint64_t per = space.per_site();
  double sum = 0;
  for (Site bs : part.cells[cell]) {
    const Site y = pl.embedding[bs];
    double num = 0, den = 0;
    for (std::uint64_t r = 0; r < per; ++r) {
      const std::uint64_t i = y * per + r;
      if (!matches(part, pl.embedding, expand_bit(r, y), M)) continue;
      const double w = space.conditional_weight(i);
      num += w * h[i];
      den += w;
    }
    if (den <= 0)
      throw UnattainableCounts("exact", "counts are impossible with the tagged particle in its cell");
    sum += num / den;
  }
  return sum / static_cast<double>(part.cell_size);
}

ConditionalDensity conditional_density(const StateSpace& space, const BoxPartition& part, std::span<const int> M) {
  require_tagged_product_torus(space, "conditional_density");
  const Placement pl = place(space, part, M);
  for (int m : M)
    if (m < 1) throw UnattainableCounts("exact", "every cell count must be at least 1");
  const int n = space.sites();
  const double rho = space.rho();
  const std::uint64_t all = std::uint64_t{1} << n;
  ConditionalDensity cd;
  cd.tilde.assign(all, 0.0);
  std::vector<char> in_event(all, 0);
  double p_event = 0;
  for (std::uint64_t eta = 0; eta < all; ++eta) {
    if (!matches(part, pl.embedding, eta, M)) continue;
    in_event[eta] = 1;
    const int c = std::popcount(eta);
    p_event += std::pow(rho, c) * std::pow(1 - rho, n - c);
  }
  if (!(p_event > 0)) throw ZeroProbabilityEvent("exact", "the count event has probability zero");
  cd.event_probability = p_event;
  for (std::uint64_t eta = 0; eta < all; ++eta)
    if (in_event[eta]) cd.tilde[eta] = 1.0 / p_event;

  cd.tagged.assign(space.size(), 0.0);
  const std::uint64_t per = space.per_site();
  for (Site x = 0; x < static_cast<Site>(n); ++x) {
    if (pl.torus_to_box[x] < 0) continue;
    double px = 0;
    for (std::uint64_t r = 0; r < per; ++r)
      if (in_event[expand_bit(r, x)]) px += space.conditional_weight(x * per + r);
    if (!(px > 0)) throw ZeroProbabilityEvent("exact", "the count event has probability zero given X");
    for (std::uint64_t r = 0; r < per; ++r)
      if (in_event[expand_bit(r, x)]) cd.tagged[x * per + r] = 1.0 / px;
  }
  return cd;
}

ContractionReport kawasaki_contraction_check(const SparseGenerator& gen, std::span<const double> density, double t,
                                             double tol) {
  const StateSpace& space = gen.space();
  if (space.tagged()) throw InvalidArgument("exact", "the contraction check runs on a Kawasaki space");
  check_length(space, density);
  for (double v : density)
    if (v < 0) throw InvalidArgument("exact", "density must be nonnegative");
  ContractionReport r;
  auto l1 = [&](std::span<const double> v) {
    double s = 0;
    for (std::uint64_t i = 0; i < v.size(); ++i) s += space.weight(i) * std::abs(v[i]);
    return s;
  };
  r.mass_before = stationary_mean(space, density);
  r.l1_before = l1(density);
  const auto u = evolve(gen, density, t, tol);
  r.mass_after = stationary_mean(space, u);
  r.l1_after = l1(u);
  return r;
}

BoundaryTerms boundary_inequality_check(const StateSpace& space, std::span<const double> h, int k, double beta) {
  require_tagged_product_torus(space, "boundary_inequality_check");
  check_length(space, h);
  if (!(beta > 1.0)) throw InvalidArgument("exact", "beta must exceed 1");
  const int n = space.lattice().side();
  if (k < 0 || 2 * k + 1 >= n || 2 * k + 3 > n)
    throw InvalidArgument("exact", "boundary check needs 2k+1 < n and 2k+3 <= n");
  const std::size_t exterior = static_cast<std::size_t>(space.sites()) - ball(space.lattice(), k).size();
  if (exterior > 12) throw CapacityExceeded("exact", std::uint64_t{1} << exterior, 1u << 12);

  const auto Ak = conditional_expectation_A(space, h, k);
  const auto Ak1 = conditional_expectation_A(space, h, k + 1);
  const auto bnd = boundary_edges(space.lattice(), k);
  std::vector<char> on_boundary(space.lattice().edge_count(), 0);
  for (EdgeId e : bnd) on_boundary[e] = 1;

  BoundaryTerms t;
  t.beta = beta;
  for_each_flip(space, [&](double w, std::size_t, EdgeId e, std::uint64_t i, std::uint64_t j, const State& s) {
    if (!on_boundary[e]) return;
    const double dh = h[j] - h[i];
    t.boundary_dirichlet += w * dh * dh;
    const Edge& ed = space.lattice().edge(e);
    if (s.x == ed.u || s.x == ed.v) return;
    t.lhs += w * (Ak[j] - Ak[i]) * dh;
  });
  double sq1 = 0, sq0 = 0;
  for (std::uint64_t i = 0; i < space.size(); ++i) {
    const double w = space.conditional_weight(i);
    sq1 += w * Ak1[i] * Ak1[i];
    sq0 += w * Ak[i] * Ak[i];
  }
  t.increment = sq1 - sq0;
  return t;
}

}  // namespace exclusim
