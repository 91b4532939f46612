#include "doctest.h"

#include <algorithm>
#include <set>

#include "exclusim/error.hpp"
#include "exclusim/lattice.hpp"

using namespace exclusim;

TEST_SUITE("lattice") {
  TEST_CASE("box and torus counts") {
    CHECK(build_box(2, 1).site_count() == 9);
    CHECK(build_box(2, 1).edge_count() == 12);
    CHECK(build_box(2, 2).edge_count() == 40);
    CHECK(build_box(3, 1).edge_count() == 54);
    CHECK(build_box(1, 0).edge_count() == 0);
    CHECK(build_torus(2, 4).edge_count() == 32);
    CHECK(build_torus(1, 3).edge_count() == 3);
    // n = 2 would create doubled edges.
    CHECK_THROWS_AS(build_torus(1, 2), InvalidArgument);
    CHECK_THROWS_AS(build_box(0, 1), InvalidArgument);
  }

  TEST_CASE("edges join unit-distance neighbours, once each") {
    for (const LatticeBox& b : {build_box(2, 2), build_torus(2, 5), build_box(3, 1)}) {
      std::set<std::pair<Site, Site>> seen;
      for (const Edge& e : b.edges()) {
        CHECK(b.l1_distance(e.u, e.v) == 1);
        CHECK(seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second);
      }
      std::size_t deg = 0;
      for (Site s = 0; s < b.site_count(); ++s) deg += b.incident(s).size();
      CHECK(deg == 2 * b.edge_count());
    }
  }

  TEST_CASE("coordinates and the origin") {
    const auto b = build_box(2, 2);
    CHECK(b.coords(b.origin()) == std::vector<int>{0, 0});
    const int far[] = {3, 0};
    CHECK_FALSE(b.site_at(far).has_value());
    const auto t = build_torus(2, 5);
    const int wrap[] = {-1, 6};
    CHECK(t.coords(*t.site_at(wrap)) == std::vector<int>{4, 1});
    // Minimal image.
    CHECK(t.displacement(t.origin(), *t.site_at(wrap)) == std::vector<int>{-1, 1});
    CHECK(t.linf_norm(*t.site_at(wrap)) == 1);
  }

  TEST_CASE("balls and boundaries") {
    const auto b = build_box(2, 2);
    CHECK(ball(b, 0).size() == 1);
    CHECK(ball(b, 1).size() == 9);
    CHECK(boundary_edges(b, 0).size() == 4);
    CHECK(boundary_edges(b, 1).size() == 12);
    CHECK_THROWS_AS(boundary_edges(b, 2), InvalidArgument);
    CHECK(boundary_edges(build_torus(2, 3), 1).empty());
    for (EdgeId e : boundary_edges(b, 1)) {
      const auto in = ball_mask(b, 1);
      CHECK(in[b.edge(e).u] != in[b.edge(e).v]);
    }
  }

  TEST_CASE("partition tiles B_L") {
    for (auto [L, l, d] : {std::tuple{4, 1, 2}, std::tuple{7, 2, 2}, std::tuple{2, 0, 1}, std::tuple{4, 1, 1}}) {
      const auto p = partition(L, l, d);
      const auto box = build_box(d, L);
      std::vector<int> hits(box.site_count(), 0);
      for (std::size_t c = 0; c < p.m; ++c) {
        CHECK(p.cells[c].size() == p.cell_size);
        for (Site x : p.cells[c]) ++hits[x];
      }
      CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
    CHECK(partition(4, 1, 2).m == 9);
    CHECK_THROWS_AS(partition(3, 1, 2), InvalidArgument);
  }

  TEST_CASE("embedding a box into a torus") {
    const auto b = build_box(1, 1);
    const auto t = build_torus(1, 4);
    const auto m = embed(b, t);
    CHECK(m[b.origin()] == t.origin());
    CHECK(std::set<Site>(m.begin(), m.end()).size() == 3);
    CHECK_THROWS_AS(embed(build_box(1, 2), t), InvalidArgument);
  }
}
