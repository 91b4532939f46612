#include "doctest.h"

#include <cmath>

#include "exclusim/combinatorics.hpp"
#include "exclusim/error.hpp"
#include "exclusim/rng.hpp"

using namespace exclusim;

namespace {

Site at(const LatticeBox& b, int i, int j) {
  const int c[] = {i, j};
  return *b.site_at(c);
}

}  // namespace

TEST_SUITE("combinatorics") {
  TEST_CASE("unit square") {
    const auto b = build_box(2, 2);
    const auto sq = unit_square(b, at(b, 0, 0), at(b, 1, 0));
    CHECK(sq.xt == at(b, 0, 1));
    CHECK(sq.yt == at(b, 1, 1));
    // +e_j leaves the box, so the square folds to -e_j.
    const auto top = unit_square(b, at(b, 0, 2), at(b, 1, 2));
    CHECK(top.xt == at(b, 0, 1));
    CHECK_THROWS_AS(unit_square(b, at(b, 0, 0), at(b, 2, 0)), InvalidArgument);
    CHECK_THROWS_AS(unit_square(build_box(1, 2), 1, 2), GeometryError);
  }

  TEST_CASE("hole search") {
    const auto b = build_box(2, 2);
    Occupancy full(b.site_count());
    for (Site s = 0; s < b.site_count(); ++s) full.set(s, true);
    const Site x = at(b, 0, 0), y = at(b, 1, 0);
    CHECK_THROWS_AS(find_holes(b, full, x, y), NoHoles);
    auto eta = full;
    eta.set(at(b, -2, -2), false);
    eta.set(at(b, 0, 1), false);
    const auto h = find_holes(b, eta, x, y);
    // (0,1) is x~ itself.
    CHECK(h.z1 == at(b, 0, 1));
    CHECK(h.z2 == at(b, -2, -2));
  }

  TEST_CASE("paths exchange x and y on the hole event") {
    const auto b = build_box(2, 2);
    auto rng = make_stream(2, {stream_tag::user, 0, 0, 0});
    int tried = 0;
    for (int rep = 0; rep < 400; ++rep) {
      const auto e = b.edge(static_cast<EdgeId>(rng.below(b.edge_count())));
      Occupancy eta(b.site_count());
      for (Site s = 0; s < b.site_count(); ++s) eta.set(s, rng.bernoulli(0.7));
      eta.set(e.u, true);
      eta.set(e.v, true);
      HoleSearchResult h;
      try {
        h = find_holes(b, eta, e.u, e.v);
      } catch (const NoHoles&) {
        continue;
      }
      ++tried;
      const auto path = build_path(b, e.u, e.v, h.z1, h.z2);
      const auto start = make_config(b, e.u, eta);
      const auto r = replay(b, path, start);
      REQUIRE(r.admissible);
      REQUIRE(r.final_state == transpose(b, start, e.u, e.v));
    }
    CHECK(tried > 100);
  }

  TEST_CASE("path is a fixed flip sequence") {
    const auto b = build_box(2, 2);
    const auto p = build_path(b, at(b, 0, 0), at(b, 1, 0), at(b, -1, 1), at(b, 2, 2));
    CHECK(p.length() > 0);
    CHECK(dump(b, p).size() > 0);
    CHECK_THROWS_AS(build_path(b, at(b, 0, 0), at(b, 1, 0), at(b, 0, 0), at(b, 2, 2)), InvalidArgument);
  }

  TEST_CASE("exhaustive sweep at radius 2") {
    const auto s = sweep_paths(build_box(2, 2), 2.0);
    CHECK(s.quadruples == 4372);
    CHECK(s.geometry_errors == 0);
    CHECK(s.permutation_failures == 0);
    CHECK(s.transposition_failures == 0);
    CHECK(s.event_configurations == 2733);
    CHECK(s.event_failures == 0);
    CHECK(s.max_length == 38);
    CHECK(s.max_length_ratio == 12.0);
    // A flip touching an occupied z2 early cannot be admissible for every eta.
    CHECK(s.admissibility_failures > 0);
  }

  TEST_CASE("counting bound") {
    const auto c = counting_bound(10, 5, 2);
    CHECK(c.lhs == doctest::Approx(56.0 / 252.0));
    CHECK(c.rhs_without_c == doctest::Approx(std::sqrt(40.0 / 30.0) * 0.25));
    CHECK(c.ratio == doctest::Approx(0.770).epsilon(1e-3));
    double worst = 0;
    for (int N = 3; N <= 60; ++N)
      for (int N1 = 2; N1 < N; ++N1)
        for (int N2 = 1; N2 < N1; ++N2) worst = std::max(worst, counting_bound(N, N1, N2).ratio);
    CHECK(worst == doctest::Approx(0.999856352796691).epsilon(1e-12));
    CHECK_THROWS_AS(counting_bound(5, 2, 3), InvalidArgument);
  }

  TEST_CASE("f_rho") {
    CHECK(f_rho(0.5, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    for (double rho : {0.1, 0.5, 0.9})
      for (double x = 0; x < rho; x += rho / 37) CHECK(f_rho(rho, x) <= x * std::log(rho) + 1e-12);
    CHECK_THROWS_AS(f_rho(0.5, 0.5), InvalidArgument);
  }
}
