#include "exclusim/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <utility>
#include <sstream>
#include <cstdint>
#include <string>

#include "exclusim/error.hpp"

namespace exclusim {

namespace {

constexpr int unreachable = -1;

std::string where(const LatticeBox& box, Site s) {
  std::string r = "(";
  auto c = box.coords(s);
  for (std::size_t i = 0; i < c.size(); ++i) r += (i ? "," : "") + std::to_string(c[i]);
  return r + ")";
}

Site other_end(const Edge& e, Site s) { return e.u == s ? e.v : e.u; }

// BFS distances from `source` in the graph induced on sites not blocked.
std::vector<int> distances(const LatticeBox& box, Site source, const std::vector<char>& blocked) {
  std::vector<int> d(box.site_count(), unreachable);
  if (blocked[source]) return d;
  std::deque<Site> queue{source};
  d[source] = 0;
  while (!queue.empty()) {
    const Site s = queue.front();
    queue.pop_front();
    for (EdgeId e : box.incident(s)) {
      const Site t = other_end(box.edge(e), s);
      if (blocked[t] || d[t] != unreachable) continue;
      d[t] = d[s] + 1;
      queue.push_back(t);
    }
  }
  return d;
}

// Shortest path from `from` down to the BFS source, choosing the lowest-index
// neighbour at every step.
std::vector<Site> descend(const LatticeBox& box, Site from, const std::vector<int>& d) {
  std::vector<Site> path{from};
  Site s = from;
  while (d[s] > 0) {
    Site best = s;
    for (EdgeId e : box.incident(s)) {
      const Site t = other_end(box.edge(e), s);
      if (d[t] == d[s] - 1 && (best == s || t < best)) best = t;
    }
    path.push_back(best);
    s = best;
  }
  return path;
}

void check_pair(const LatticeBox& box, Site x, Site y) {
  if (x >= box.site_count() || y >= box.site_count()) throw InvalidArgument("combinatorics", "site out of range");
  if (!box.edge_between(x, y)) throw InvalidArgument("combinatorics", "x and y must be neighbours");
}

// Sorts the candidates of a search by (distance, index); unreachable sites last.
std::vector<Site> search_order(const std::vector<int>& d, const std::vector<char>& blocked) {
  std::vector<Site> order;
  for (Site s = 0; s < d.size(); ++s)
    if (!blocked[s] && d[s] != unreachable) order.push_back(s);
  std::stable_sort(order.begin(), order.end(), [&](Site a, Site b) { return d[a] < d[b]; });
  return order;
}

}  // namespace

UnitSquare unit_square(const LatticeBox& box, Site x, Site y) {
  check_pair(box, x, y);
  const int i = box.edge(*box.edge_between(x, y)).axis;
  if (box.dim() < 2) throw GeometryError("combinatorics", "a unit square needs d >= 2");
  const int j = i == 0 ? 1 : 0;
  for (int sign : {+1, -1}) {
    auto xt = box.neighbor(x, j, sign);
    auto yt = box.neighbor(y, j, sign);
    if (xt && yt) return {x, y, *xt, *yt};
  }
  throw GeometryError("combinatorics", "no unit square on edge " + where(box, x) + "-" + where(box, y) +
                                           " fits in the box (corner " + where(box, x) + ")");
}

HoleSearchResult find_holes(const LatticeBox& box, const Occupancy& eta, Site x, Site y) {
  check_pair(box, x, y);
  if (eta.size() != box.site_count()) throw InvalidArgument("combinatorics", "occupancy size mismatch");
  std::size_t holes = 0;
  for (Site s = 0; s < box.site_count(); ++s)
    if (s != x && s != y && !eta[s]) ++holes;
  if (holes < 2) throw NoHoles("combinatorics", "fewer than two empty sites outside {x, y}");
  const UnitSquare sq = unit_square(box, x, y);

  std::vector<char> blocked(box.site_count(), 0);
  blocked[x] = blocked[y] = 1;
  HoleSearchResult r;
  bool found1 = false, found2 = false;
  const auto d1 = distances(box, sq.xt, blocked);
  for (Site s : search_order(d1, blocked)) {
    if (!eta[s]) {
      r.z1 = s;
      found1 = true;
      break;
    }
    ++r.n2;
  }
  if (!found1) throw NoHoles("combinatorics", "no hole reachable from x~");
  blocked[sq.xt] = 1;
  const auto d2 = distances(box, sq.yt, blocked);
  for (Site s : search_order(d2, blocked)) {
    if (s == r.z1) continue;
    if (!eta[s]) {
      r.z2 = s;
      found2 = true;
      break;
    }
    ++r.n2;
  }
  if (!found2) throw NoHoles("combinatorics", "no second hole reachable from y~");
  return r;
}

namespace {

// Carries the hole at `first` to `first_target` inside R \ {second}, then the
// hole at `second` to `second_target` inside R \ {first_target}. Empty when a
// carry path does not exist.
std::optional<std::pair<std::vector<Site>, std::vector<Site>>> carries(const LatticeBox& box, Site x, Site y,
                                                                        Site first, Site first_target, Site second,
                                                                        Site second_target) {
  std::vector<char> blocked(box.site_count(), 0);
  blocked[x] = blocked[y] = 1;
  blocked[second] = 1;
  if (blocked[first_target]) return std::nullopt;
  const auto d1 = distances(box, first_target, blocked);
  if (d1[first] == unreachable) return std::nullopt;
  blocked[second] = 0;
  blocked[first_target] = 1;
  const auto d2 = distances(box, second_target, blocked);
  if (d2[second] == unreachable) return std::nullopt;
  return std::make_pair(descend(box, first, d1), descend(box, second, d2));
}

}  // namespace

FlipPath build_path(const LatticeBox& box, Site x, Site y, Site z1, Site z2) {
  check_pair(box, x, y);
  if (z1 >= box.site_count() || z2 >= box.site_count()) throw InvalidArgument("combinatorics", "site out of range");
  if (z1 == x || z1 == y || z2 == x || z2 == y)
    throw InvalidArgument("combinatorics", "holes must differ from x and y");
  if (z1 == z2) throw InvalidArgument("combinatorics", "the two holes must differ");
  const UnitSquare sq = unit_square(box, x, y);
  FlipPath p{x, y, z1, z2, {}};

  // The composite is symmetric in the two holes. Preferred plan: z1 goes to x~
  // first, then z2 to y~. If a hole is cut off (a corner fenced by the square
  // and the other hole), try the other assignments in a fixed order.
  struct Plan {
    Site first, first_target, second, second_target;
  };
  const Plan plans[] = {{z1, sq.xt, z2, sq.yt}, {z2, sq.xt, z1, sq.yt}, {z2, sq.yt, z1, sq.xt}, {z1, sq.yt, z2, sq.xt}};
  std::optional<std::pair<std::vector<Site>, std::vector<Site>>> found;
  for (const Plan& plan : plans) {
    // A hole already sitting on the other target would be displaced by the first carry.
    if (plan.second == plan.first_target) continue;
    found = carries(box, x, y, plan.first, plan.first_target, plan.second, plan.second_target);
    if (found) break;
  }
  if (!found)
    throw GeometryError("combinatorics", "holes " + where(box, z1) + " and " + where(box, z2) +
                                             " cannot both reach the square at " + where(box, x));

  auto edge = [&](Site a, Site b) { return *box.edge_between(a, b); };
  std::vector<EdgeId> carry1, carry2;
  const auto& [path1, path2] = *found;
  for (std::size_t i = 0; i + 1 < path1.size(); ++i) carry1.push_back(edge(path1[i], path1[i + 1]));
  for (std::size_t i = 0; i + 1 < path2.size(); ++i) carry2.push_back(edge(path2[i], path2[i + 1]));

  auto& out = p.edges;
  out.insert(out.end(), carry1.begin(), carry1.end());
  out.insert(out.end(), carry2.begin(), carry2.end());
  out.push_back(edge(y, sq.yt));
  out.push_back(edge(x, y));
  out.push_back(edge(sq.xt, sq.yt));
  out.push_back(edge(x, sq.xt));
  out.insert(out.end(), carry2.rbegin(), carry2.rend());
  out.insert(out.end(), carry1.rbegin(), carry1.rend());
  return p;
}

ReplayResult replay(const LatticeBox& box, const FlipPath& path, TaggedConfig start) {
  ReplayResult r;
  r.first_blocked = path.length();
  for (std::size_t i = 0; i < path.edges.size(); ++i) {
    const EdgeId e = path.edges[i];
    if (r.admissible && !conductance(box, start, e)) {
      r.admissible = false;
      r.first_blocked = i;
    }
    flip_in_place(box, start, e);
  }
  r.final_state = std::move(start);
  return r;
}

TaggedConfig transpose(const LatticeBox& box, const TaggedConfig& cfg, Site x, Site y) {
  TaggedConfig r = cfg;
  r.eta.swap_bits(x, y);
  if (r.X == x)
    r.X = y;
  else if (r.X == y)
    r.X = x;
  (void)box;
  return r;
}

std::string dump(const LatticeBox& box, const FlipPath& path) {
  std::ostringstream os;
  for (EdgeId e : path.edges) os << box.edge(e).u << ' ' << box.edge(e).v << '\n';
  return os.str();
}

PathSweepReport sweep_paths(const LatticeBox& box, double radius) {
  if (box.is_torus()) throw InvalidArgument("combinatorics", "path sweeps run on a box");
  if (box.site_count() > 64) throw CapacityExceeded("combinatorics", box.site_count(), 64);
  const std::size_t n = box.site_count();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  PathSweepReport rep;
  std::vector<Site> perm(n);
  for (const Edge& xy : box.edges()) {
    for (int dir = 0; dir < 2; ++dir) {
      const Site x = dir ? xy.v : xy.u;
      const Site y = dir ? xy.u : xy.v;
      for (Site z1 = 0; z1 < n; ++z1) {
        if (z1 == x || z1 == y || box.euclidean_distance(z1, x) > radius + 1e-12) continue;
        for (Site z2 = 0; z2 < n; ++z2) {
          if (z2 == x || z2 == y || z2 == z1 || box.euclidean_distance(z2, z1) > radius + 1e-12) continue;
          ++rep.quadruples;
          FlipPath path;
          try {
            path = build_path(box, x, y, z1, z2);
          } catch (const GeometryError&) {
            ++rep.geometry_errors;
            continue;
          }
          rep.max_length = std::max(rep.max_length, path.length());
          const double dist = box.euclidean_distance(z1, x) + box.euclidean_distance(z2, z1);
          rep.max_length_ratio = std::max(rep.max_length_ratio, static_cast<double>(path.length()) / (dist + 1));
          rep.max_length_ratio_strict = std::max(rep.max_length_ratio_strict, static_cast<double>(path.length()) / dist);

          // Composite permutation of positions.
          for (Site s = 0; s < n; ++s) perm[s] = s;
          std::vector<Site> at(n);  // at[s]: which original site's content sits at s
          for (Site s = 0; s < n; ++s) at[s] = s;
          std::uint64_t support = 0;
          for (EdgeId e : path.edges) {
            const Edge& b = box.edge(e);
            std::swap(at[b.u], at[b.v]);
            support |= (std::uint64_t{1} << b.u) | (std::uint64_t{1} << b.v);
          }
          for (Site s = 0; s < n; ++s) perm[at[s]] = s;
          bool perm_ok = true;
          for (Site s = 0; s < n; ++s) {
            Site want = s;
            if (s == x) want = y;
            else if (s == y) want = x;
            else if (s == z1) want = z2;
            else if (s == z2) want = z1;
            if (perm[s] != want) perm_ok = false;
          }
          if (!perm_ok) ++rep.permutation_failures;

          support |= (std::uint64_t{1} << x) | (std::uint64_t{1} << y);
          support &= ~((std::uint64_t{1} << z1) | (std::uint64_t{1} << z2));
          std::vector<Site> free_sites;
          for (Site s = 0; s < n; ++s)
            if ((support >> s) & 1u) free_sites.push_back(s);
          const std::uint64_t outside = all & ~support & ~((std::uint64_t{1} << z1) | (std::uint64_t{1} << z2));
          const std::uint64_t combos = std::uint64_t{1} << free_sites.size();
          for (std::uint64_t c = 0; c < combos; ++c) {
            std::uint64_t eta = outside;
            for (std::size_t i = 0; i < free_sites.size(); ++i)
              if ((c >> i) & 1u) eta |= std::uint64_t{1} << free_sites[i];
            ++rep.configurations;
            std::uint64_t cur = eta;
            bool admissible = true;
            for (EdgeId e : path.edges) {
              const Edge& b = box.edge(e);
              const bool bu = (cur >> b.u) & 1u, bv = (cur >> b.v) & 1u;
              if (bu == bv)
                admissible = false;
              else
                cur ^= (std::uint64_t{1} << b.u) | (std::uint64_t{1} << b.v);
            }
            std::uint64_t want = eta;
            if (((eta >> x) & 1u) != ((eta >> y) & 1u)) want ^= (std::uint64_t{1} << x) | (std::uint64_t{1} << y);
            if (cur != want) ++rep.transposition_failures;
            if (!admissible) ++rep.admissibility_failures;
            if (((eta >> x) & 1u) && ((eta >> y) & 1u)) {
              HoleSearchResult h;
              try {
                h = find_holes(box, Occupancy::from_mask(n, eta), x, y);
              } catch (const NoHoles&) {
                continue;
              }
              if (h.z1 == z1 && h.z2 == z2) {
                ++rep.event_configurations;
                if (!admissible || cur != want) ++rep.event_failures;
              }
            }
          }
        }
      }
    }
  }
  return rep;
}

CountingBound counting_bound(int N, int N1, int N2) {
  if (!(N > N1 && N1 > N2 && N2 > 0))
    throw InvalidArgument("combinatorics", "counting bound needs N > N1 > N2 > 0");
  auto log_binom = [](int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  CountingBound b;
  b.lhs = std::exp(log_binom(N - N2, N1 - N2) - log_binom(N, N1));
  b.rhs_without_c = std::sqrt(static_cast<double>(N1) * (N - N2) / (static_cast<double>(N) * (N1 - N2))) *
                    std::pow(static_cast<double>(N1) / N, N2);
  b.ratio = b.lhs / b.rhs_without_c;
  return b;
}

double f_rho(double rho, double x) {
  if (!(rho > 0 && rho < 1) || !(x >= 0 && x < rho))
    throw InvalidArgument("combinatorics", "f_rho needs rho in (0,1) and x in [0, rho)");
  auto xlogx = [](double v) { return v > 0 ? v * std::log(v) : 0.0; };
  return xlogx(rho) + xlogx(1 - x) - xlogx(rho - x);
}

}  // namespace exclusim
