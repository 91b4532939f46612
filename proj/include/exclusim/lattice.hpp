#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace exclusim {

using Site = std::uint32_t;
using EdgeId = std::uint32_t;

/// Unordered nearest-neighbour pair. `v` is the +e_axis neighbour of `u`.
struct Edge {
  Site u;
  Site v;
  int axis;
};

enum class Geometry { box, torus };

/// Geometry of an open box {-l..l}^d or of a periodic torus of side n.
///
/// Sites are numbered row-major on coordinates with axis 0 most significant.
/// Box coordinates run over -l..l, torus coordinates over 0..n-1 with the
/// origin at coordinate 0.
class LatticeBox {
 public:
  int dim() const noexcept { return d_; }
  Geometry geometry() const noexcept { return geometry_; }
  bool is_torus() const noexcept { return geometry_ == Geometry::torus; }
  //! Box radius l, or -1 for a torus.
  int radius() const noexcept { return radius_; }
  //! Number of sites per axis: 2l+1 or n.
  int side() const noexcept { return side_; }

  std::size_t site_count() const noexcept { return site_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  //! Edges incident to `s`.
  std::span<const EdgeId> incident(Site s) const {
    return {incident_.data() + incident_ptr_[s], incident_.data() + incident_ptr_[s + 1]};
  }

  std::vector<int> coords(Site s) const;
  //! Box: nullopt outside the box. Torus: coordinates are reduced mod n.
  std::optional<Site> site_at(std::span<const int> c) const;
  Site origin() const noexcept { return origin_; }

  std::optional<Site> neighbor(Site s, int axis, int sign) const;
  std::optional<EdgeId> edge_between(Site a, Site b) const;

  //! Displacement b - a; minimal image on a torus.
  std::vector<int> displacement(Site a, Site b) const;
  //! Sup norm of the position of `s` relative to the origin (minimal image on a torus).
  int linf_norm(Site s) const;
  int l1_distance(Site a, Site b) const;
  double euclidean_distance(Site a, Site b) const;

 private:
  friend LatticeBox build_box(int d, int ell);
  friend LatticeBox build_torus(int d, int n);
  void finish();

  int d_ = 1;
  Geometry geometry_ = Geometry::box;
  int radius_ = 0;
  int side_ = 1;
  std::size_t site_count_ = 1;
  Site origin_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> incident_ptr_;
  std::vector<EdgeId> incident_;
};

LatticeBox build_box(int d, int ell);
LatticeBox build_torus(int d, int n);

//! Sites of B_k, i.e. sup-distance at most k from the origin, in index order.
//! On a torus this requires 2k+1 <= n.
std::vector<Site> ball(const LatticeBox& lattice, int k);
std::vector<bool> ball_mask(const LatticeBox& lattice, int k);

/// Edges with exactly one endpoint in B_k. On a box this requires 0 <= k < l.
/// On a torus it requires 2k+1 <= n (the result is empty when B_k is everything).
std::vector<EdgeId> boundary_edges(const LatticeBox& lattice, int k);

/// Partition of B_L into m translates of B_l, anchored at the lexicographically
/// minimal corner of B_L. Site indices refer to build_box(d, L).
struct BoxPartition {
  int L = 0;
  int ell = 0;
  int d = 1;
  std::size_t m = 1;
  std::size_t cell_size = 1;
  std::vector<std::uint32_t> cell_of;
  std::vector<std::vector<Site>> cells;
};

BoxPartition partition(int L, int ell, int d);

/// Maps the sites of a box into a torus of the same dimension by wrapping
/// coordinates. Requires 2l+1 <= n.
std::vector<Site> embed(const LatticeBox& box, const LatticeBox& torus);

}  // namespace exclusim
