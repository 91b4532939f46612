#include "doctest.h"

#include "exclusim/config.hpp"
#include "exclusim/error.hpp"
#include "exclusim/rng.hpp"

using namespace exclusim;

TEST_SUITE("config") {
  TEST_CASE("occupancy bit operations") {
    Occupancy o(130);
    o.set(0, true);
    o.set(129, true);
    CHECK(o.count() == 2);
    o.swap_bits(0, 64);
    CHECK_FALSE(o[0]);
    CHECK(o[64]);
    CHECK(Occupancy::from_mask(5, 0b10110).count() == 3);
  }

  TEST_CASE("make_config needs eta(X) = 1") {
    const auto t = build_torus(1, 4);
    CHECK_THROWS_AS(make_config(t, 0, Occupancy(4)), InvalidArgument);
    CHECK(make_config(t, 0, Occupancy::from_mask(4, 1)).count == 1);
  }

  TEST_CASE("flips conserve particles and carry the tagged particle") {
    const auto t = build_torus(1, 4);
    // X at 0, a second particle at 1, holes at 2 and 3.
    const auto cfg = make_config(t, 0, Occupancy::from_mask(4, 0b0011));
    const auto e01 = *t.edge_between(0, 1);
    const auto e30 = *t.edge_between(3, 0);
    CHECK(conductance(t, cfg, e01) == 0);
    CHECK(conductance(t, cfg, e30) == 1);
    const auto moved = apply_flip(t, cfg, e30);
    CHECK(moved.X == 3);
    CHECK(moved.eta == Occupancy::from_mask(4, 0b1010));
    CHECK(apply_flip(t, moved, e30) == cfg);
    // On a concordant edge eta is unchanged but x^e still swaps X along e.
    const auto same = apply_flip(t, cfg, e01);
    CHECK(same.eta == cfg.eta);
    CHECK(same.X == 1);
  }

  TEST_CASE("random flips keep the invariants") {
    const auto t = build_torus(2, 5);
    auto rng = make_stream(9, {stream_tag::user, 0, 0, 0});
    auto cfg = sample_initial(t, 0.4, rng);
    for (int i = 0; i < 2000; ++i) {
      flip_in_place(t, cfg, static_cast<EdgeId>(rng.below(t.edge_count())));
      REQUIRE(cfg.eta[cfg.X]);
      REQUIRE(cfg.eta.count() == cfg.count);
    }
  }

  TEST_CASE("sample_initial") {
    const auto t = build_torus(2, 6);
    const auto a = sample_initial(t, 0.5, 42);
    CHECK(a.X == t.origin());
    CHECK(a.eta[t.origin()]);
    CHECK(sample_initial(t, 0.5, 42) == a);
    CHECK_THROWS_AS(sample_initial(t, 1.5, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_initial(t, 0.0, 1), InvalidArgument);
  }

  TEST_CASE("hex round trip") {
    const auto t = build_torus(2, 5);
    const auto c = sample_initial(t, 0.3, 7);
    const auto s = to_hex(c);
    CHECK(from_hex(t, s) == c);
    CHECK(to_hex(make_config(build_torus(1, 5), 2, Occupancy::from_mask(5, 0b10101))) == "2:51");
    CHECK_THROWS_AS(from_hex(t, "zz"), InvalidArgument);
  }

  TEST_CASE("local functions") {
    const auto t = build_torus(1, 5);
    const auto f = indicator_at_origin();
    CHECK(evaluate(f, t, make_config(t, 0, Occupancy::from_mask(5, 1))) == 1.0);
    CHECK(evaluate(f, t, make_config(t, 1, Occupancy::from_mask(5, 2))) == 0.0);
  }
}

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known answers") {
    using A = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("xoshiro256** reference outputs") {
    Xoshiro256 g({1, 2, 3, 4});
    CHECK(g() == 11520u);
    CHECK(g() == 0u);
    CHECK(g() == 1509978240u);
    CHECK(g() == 1215971899390074240u);
  }

  TEST_CASE("streams are reproducible and distinct") {
    auto a = make_stream(5, {1, 2, 3, 4});
    auto b = make_stream(5, {1, 2, 3, 4});
    auto c = make_stream(5, {1, 2, 3, 5});
    auto d = make_stream(6, {1, 2, 3, 4});
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }

  TEST_CASE("below and uniform stay in range") {
    auto g = make_stream(1, {});
    for (int i = 0; i < 10000; ++i) {
      REQUIRE(g.below(7) < 7);
      const double u = g.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
    }
  }
}
