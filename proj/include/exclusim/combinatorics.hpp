#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "exclusim/config.hpp"
#include "exclusim/lattice.hpp"

namespace exclusim {

/// The unit square x, y, x~, y~ used to exchange x and y. With x, y differing
/// along axis i, j is the smallest other axis and x~ = x + e_j, y~ = y + e_j,
/// falling back to -e_j when +e_j leaves the box.
struct UnitSquare {
  Site x, y, xt, yt;
};

UnitSquare unit_square(const LatticeBox& box, Site x, Site y);

struct HoleSearchResult {
  Site z1 = 0;
  Site z2 = 0;
  //! Occupied sites examined before both holes were found.
  std::size_t n2 = 0;
};

/// Z1 is the first hole of B \ {x, y} in the order (graph distance from x~
/// inside B \ {x, y}, site index). Z2 is the first remaining hole in the order
/// (graph distance from y~ inside B \ {x, y, x~}, site index).
HoleSearchResult find_holes(const LatticeBox& box, const Occupancy& eta, Site x, Site y);

struct FlipPath {
  Site x = 0, y = 0, z1 = 0, z2 = 0;
  std::vector<EdgeId> edges;
  std::size_t length() const noexcept { return edges.size(); }
};

/// Flip sequence exchanging x and y with the help of holes at z1 and z2:
/// carry the hole at z1 to x~, carry the hole at z2 to y~, exchange around the
/// square, then undo both carries. Depends on (x, y, z1, z2) only.
/// As a permutation of sites the composite is (x y)(z1 z2).
FlipPath build_path(const LatticeBox& box, Site x, Site y, Site z1, Site z2);

struct ReplayResult {
  //! Every flip had a_e = 1 when it was applied.
  bool admissible = true;
  //! Position of the first inadmissible flip, or length() if none.
  std::size_t first_blocked = 0;
  TaggedConfig final_state;
};

ReplayResult replay(const LatticeBox& box, const FlipPath& path, TaggedConfig start);

//! (x^{xy}, eta^{xy}): the image of cfg under the transposition of x and y.
TaggedConfig transpose(const LatticeBox& box, const TaggedConfig& cfg, Site x, Site y);

//! One "u v" pair per line.
std::string dump(const LatticeBox& box, const FlipPath& path);

/// Exhaustive replay of every flip path on a box. Quadruples are ordered pairs
/// x ~ y with holes z1 != z2 outside {x, y}, |z1 - x| <= radius and
/// |z2 - z1| <= radius (Euclidean). For each path, eta ranges over all
/// occupancies of the sites the path touches with eta(z1) = eta(z2) = 0; the
/// remaining sites are never flipped and are held occupied.
struct PathSweepReport {
  std::size_t quadruples = 0;
  std::size_t geometry_errors = 0;
  std::size_t configurations = 0;
  //! Paths whose composite site permutation is not (x y)(z1 z2).
  std::size_t permutation_failures = 0;
  //! eta with eta(z1) = eta(z2) = 0 whose image differs from eta^{xy}.
  std::size_t transposition_failures = 0;
  //! eta with eta(z1) = eta(z2) = 0 meeting an inadmissible flip.
  std::size_t admissibility_failures = 0;
  //! eta with eta(x) = eta(y) = 1 for which find_holes returns {z1, z2}.
  std::size_t event_configurations = 0;
  std::size_t event_failures = 0;
  std::size_t max_length = 0;
  //! max of n / (|z1 - x| + |z2 - z1| + 1).
  double max_length_ratio = 0;
  //! max of n / (|z1 - x| + |z2 - z1|).
  double max_length_ratio_strict = 0;
};

PathSweepReport sweep_paths(const LatticeBox& box, double radius);

struct CountingBound {
  double lhs = 0;
  double rhs_without_c = 0;
  double ratio = 0;
};

/// C(N-N2, N1-N2) / C(N, N1) against sqrt(N1 (N-N2) / (N (N1-N2))) (N1/N)^N2.
CountingBound counting_bound(int N, int N1, int N2);

//! rho log rho + (1-x) log(1-x) - (rho-x) log(rho-x) for x in [0, rho).
double f_rho(double rho, double x);

}  // namespace exclusim
