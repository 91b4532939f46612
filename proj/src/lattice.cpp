#include "exclusim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "exclusim/error.hpp"

namespace exclusim {

namespace {

std::size_t checked_power(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (std::size_t{1} << 31) / static_cast<std::size_t>(base))
      throw InvalidArgument("lattice", "site count exceeds 2^31");
    r *= static_cast<std::size_t>(base);
  }
  return r;
}

int wrap(int c, int n) {
  int r = c % n;
  return r < 0 ? r + n : r;
}

// Minimal-image representative in (-n/2, n/2].
int min_image(int c, int n) {
  int r = wrap(c, n);
  return r > n / 2 ? r - n : r;
}

}  // namespace

std::vector<int> LatticeBox::coords(Site s) const {
  std::vector<int> c(static_cast<std::size_t>(d_));
  std::size_t rest = s;
  for (int i = d_ - 1; i >= 0; --i) {
    c[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(side_));
    rest /= static_cast<std::size_t>(side_);
  }
  if (!is_torus())
    for (auto& v : c) v -= radius_;
  return c;
}

std::optional<Site> LatticeBox::site_at(std::span<const int> c) const {
  if (c.size() != static_cast<std::size_t>(d_))
    throw InvalidArgument("lattice", "coordinate has wrong dimension");
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) {
    int v = c[static_cast<std::size_t>(i)];
    if (is_torus()) {
      v = wrap(v, side_);
    } else {
      if (v < -radius_ || v > radius_) return std::nullopt;
      v += radius_;
    }
    idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(v);
  }
  return static_cast<Site>(idx);
}

std::optional<Site> LatticeBox::neighbor(Site s, int axis, int sign) const {
  auto c = coords(s);
  c[static_cast<std::size_t>(axis)] += sign;
  return site_at(c);
}

std::optional<EdgeId> LatticeBox::edge_between(Site a, Site b) const {
  for (EdgeId e : incident(a)) {
    const Edge& ed = edges_[e];
    if ((ed.u == a && ed.v == b) || (ed.u == b && ed.v == a)) return e;
  }
  return std::nullopt;
}

std::vector<int> LatticeBox::displacement(Site a, Site b) const {
  auto ca = coords(a);
  auto cb = coords(b);
  std::vector<int> r(ca.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    r[i] = cb[i] - ca[i];
    if (is_torus()) r[i] = min_image(r[i], side_);
  }
  return r;
}

int LatticeBox::linf_norm(Site s) const {
  int m = 0;
  for (int v : displacement(origin_, s)) m = std::max(m, std::abs(v));
  return m;
}

int LatticeBox::l1_distance(Site a, Site b) const {
  int m = 0;
  for (int v : displacement(a, b)) m += std::abs(v);
  return m;
}

double LatticeBox::euclidean_distance(Site a, Site b) const {
  double s = 0;
  for (int v : displacement(a, b)) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

void LatticeBox::finish() {
  std::vector<std::size_t> deg(site_count_, 0);
  for (const Edge& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  incident_ptr_.assign(site_count_ + 1, 0);
  for (std::size_t s = 0; s < site_count_; ++s) incident_ptr_[s + 1] = incident_ptr_[s] + deg[s];
  incident_.assign(incident_ptr_.back(), 0);
  std::vector<std::size_t> fill(incident_ptr_.begin(), incident_ptr_.end() - 1);
  for (EdgeId i = 0; i < edges_.size(); ++i) {
    incident_[fill[edges_[i].u]++] = i;
    incident_[fill[edges_[i].v]++] = i;
  }
}

LatticeBox build_box(int d, int ell) {
  if (d <= 0) throw InvalidArgument("lattice", "dimension must be >= 1, got " + std::to_string(d));
  if (ell < 0) throw InvalidArgument("lattice", "box radius must be >= 0, got " + std::to_string(ell));
  LatticeBox b;
  b.d_ = d;
  b.geometry_ = Geometry::box;
  b.radius_ = ell;
  b.side_ = 2 * ell + 1;
  b.site_count_ = checked_power(b.side_, d);
  std::vector<int> zero(static_cast<std::size_t>(d), 0);
  b.origin_ = *b.site_at(zero);
  for (Site s = 0; s < b.site_count_; ++s) {
    auto c = b.coords(s);
    for (int a = 0; a < d; ++a) {
      if (c[static_cast<std::size_t>(a)] + 1 > ell) continue;
      ++c[static_cast<std::size_t>(a)];
      b.edges_.push_back({s, *b.site_at(c), a});
      --c[static_cast<std::size_t>(a)];
    }
  }
  b.finish();
  return b;
}

LatticeBox build_torus(int d, int n) {
  if (d <= 0) throw InvalidArgument("lattice", "dimension must be >= 1, got " + std::to_string(d));
  if (n < 3) throw InvalidArgument("lattice", "torus side must be >= 3, got " + std::to_string(n));
  LatticeBox b;
  b.d_ = d;
  b.geometry_ = Geometry::torus;
  b.radius_ = -1;
  b.side_ = n;
  b.site_count_ = checked_power(n, d);
  b.origin_ = 0;
  for (Site s = 0; s < b.site_count_; ++s) {
    auto c = b.coords(s);
    for (int a = 0; a < d; ++a) {
      ++c[static_cast<std::size_t>(a)];
      b.edges_.push_back({s, *b.site_at(c), a});
      --c[static_cast<std::size_t>(a)];
    }
  }
  b.finish();
  return b;
}

std::vector<bool> ball_mask(const LatticeBox& lattice, int k) {
  if (k < 0) throw InvalidArgument("lattice", "ball radius must be >= 0");
  if (lattice.is_torus() && 2 * k + 1 > lattice.side())
    throw InvalidArgument("lattice", "ball B_" + std::to_string(k) + " does not fit in a torus of side " +
                                         std::to_string(lattice.side()));
  std::vector<bool> in(lattice.site_count());
  for (Site s = 0; s < lattice.site_count(); ++s) in[s] = lattice.linf_norm(s) <= k;
  return in;
}

std::vector<Site> ball(const LatticeBox& lattice, int k) {
  auto in = ball_mask(lattice, k);
  std::vector<Site> r;
  for (Site s = 0; s < in.size(); ++s)
    if (in[s]) r.push_back(s);
  return r;
}

std::vector<EdgeId> boundary_edges(const LatticeBox& lattice, int k) {
  if (!lattice.is_torus() && (k < 0 || k >= lattice.radius()))
    throw InvalidArgument("lattice", "boundary of B_" + std::to_string(k) + " requires 0 <= k < " +
                                         std::to_string(lattice.radius()));
  auto in = ball_mask(lattice, k);
  std::vector<EdgeId> r;
  for (EdgeId e = 0; e < lattice.edge_count(); ++e) {
    const Edge& ed = lattice.edge(e);
    if (in[ed.u] != in[ed.v]) r.push_back(e);
  }
  return r;
}

BoxPartition partition(int L, int ell, int d) {
  if (d <= 0 || L < 0 || ell < 0) throw InvalidArgument("lattice", "partition needs d >= 1, L >= 0, l >= 0");
  if ((2 * L + 1) % (2 * ell + 1) != 0)
    throw InvalidArgument("lattice", "2L+1 = " + std::to_string(2 * L + 1) + " is not divisible by 2l+1 = " +
                                         std::to_string(2 * ell + 1));
  LatticeBox parent = build_box(d, L);
  BoxPartition p;
  p.L = L;
  p.ell = ell;
  p.d = d;
  const int per_axis = (2 * L + 1) / (2 * ell + 1);
  const int width = 2 * ell + 1;
  p.m = checked_power(per_axis, d);
  p.cell_size = checked_power(width, d);
  p.cell_of.assign(parent.site_count(), 0);
  p.cells.assign(p.m, {});
  for (Site s = 0; s < parent.site_count(); ++s) {
    auto c = parent.coords(s);
    std::size_t cell = 0;
    for (int a = 0; a < d; ++a)
      cell = cell * static_cast<std::size_t>(per_axis) +
             static_cast<std::size_t>((c[static_cast<std::size_t>(a)] + L) / width);
    p.cell_of[s] = static_cast<std::uint32_t>(cell);
    p.cells[cell].push_back(s);
  }
  return p;
}

std::vector<Site> embed(const LatticeBox& box, const LatticeBox& torus) {
  if (box.is_torus() || !torus.is_torus() || box.dim() != torus.dim())
    throw InvalidArgument("lattice", "embed maps a box into a torus of the same dimension");
  if (box.side() > torus.side())
    throw InvalidArgument("lattice", "box of side " + std::to_string(box.side()) +
                                         " does not fit in torus of side " + std::to_string(torus.side()));
  std::vector<Site> r(box.site_count());
  for (Site s = 0; s < box.site_count(); ++s) r[s] = *torus.site_at(box.coords(s));
  return r;
}

}  // namespace exclusim
