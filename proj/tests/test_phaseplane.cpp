#include "doctest.h"

#include <cmath>
#include <random>

#include "walshpp/phaseplane.hpp"

using namespace walshpp;

namespace {

DiscreteSignal dyadic_signal(const GridSpec& g, std::mt19937_64& rng) {
  DiscreteSignal f(g);
  for (double& v : f.values) v = std::uniform_int_distribution<int>(-8, 8)(rng) / 4.0;
  return f;
}

double max_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace

TEST_SUITE("phaseplane") {
  TEST_CASE("bitile halves") {
    const Bitile p = make_bitile({0, 1}, {1, 1});  // [1, 2) x [2, 4)
    const Subtiles s = subtiles(p);
    CHECK(s.u == Tile{{0, 1}, {0, 3}});
    CHECK(s.l == Tile{{0, 1}, {0, 2}});
    CHECK(s.s == Tile{{-1, 2}, {1, 1}});
    CHECK(s.d == Tile{{-1, 3}, {1, 1}});
    CHECK_THROWS_AS(make_bitile({0, 0}, {0, 0}), Error);
    CHECK(leq(Tile{{0, 0}, {0, 1}}, Tile{{1, 0}, {-1, 2}}));
    CHECK_FALSE(leq(Tile{{1, 0}, {-1, 2}}, Tile{{0, 0}, {0, 1}}));
  }

  TEST_CASE("wave packets: unit norm, two routes, orthogonality") {
    const GridSpec g(2, 2);
    std::vector<Tile> tiles;
    for (int k = -g.b; k <= g.a; ++k)
      for (std::uint64_t t = 0; t < (std::uint64_t{1} << (g.a - k)); ++t)
        for (std::uint64_t n = 0; n < (std::uint64_t{1} << (g.b + k)); ++n) tiles.push_back({{k, t}, {-k, n}});
    for (const Tile& p : tiles) {
      const DiscreteSignal w = wave_packet(p, g);
      CHECK(lp_norm(w, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(max_diff(w.values, wave_packet_via_transform(p, g).values) <= 1e-12);
    }
    for (const Tile& p : tiles)
      for (const Tile& q : tiles)
        if (!p.intersects(q)) CHECK(std::abs(inner(wave_packet(p, g), wave_packet(q, g))) <= 1e-12);
  }

  TEST_CASE("packet constant on [0,1) x [0,1) is the unit indicator") {
    const GridSpec g(1, 2);
    const DiscreteSignal w = wave_packet(Tile{{0, 0}, {0, 0}}, g);
    CHECK(w.values == std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0});
  }

  TEST_CASE("projection onto the whole plane is the identity") {
    std::mt19937_64 rng(11);
    const GridSpec g(2, 3);
    const DiscreteSignal f = dyadic_signal(g, rng);
    const std::vector<Tile> cover = tile_cover(BitileSet::all(g));
    CHECK(pairwise_disjoint(cover));
    CHECK(max_diff(project(cover, f).values, f.values) <= 1e-12);
    CHECK(projection_energy(cover, f) == doctest::Approx(inner(f, f)).epsilon(1e-12));
    const std::vector<Tile> time_first = tile_cover(BitileSet::all(g), SplitOrder::time_first);
    CHECK(max_diff(project(time_first, f).values, f.values) <= 1e-12);
    const std::vector<Tile> overlap{{{0, 0}, {0, 0}}, {{1, 0}, {-1, 0}}};
    CHECK_THROWS_AS(project(overlap, f), Error);
  }

  TEST_CASE("fast fields agree with per-bitile summation") {
    std::mt19937_64 rng(5);
    for (const GridSpec g : {GridSpec(1, 2), GridSpec(2, 2), GridSpec(3, 2)}) {
      const DiscreteSignal f = dyadic_signal(g, rng);
      BitileSet P(g);
      const BitileSet all = BitileSet::all(g);
      for (std::size_t id = 0; id < all.capacity(); ++id)
        if (rng() % 3) P.insert(all.bitile(id));
      const WeightFn one = [](const Bitile&, int) { return std::optional<double>(1.0); };
      const TFField fast = partial_sum_field(f, P);
      const TFField ref = weighted_field_reference(f, P, {}, one);
      CHECK(max_diff(fast.values, ref.values) <= 1e-12);

      std::vector<int> ks;
      for (int k = 1 - g.b; k <= g.a + 1; ++k) ks.push_back(k);
      const WeightFn below = [](const Bitile& p, int k) { return std::optional<double>(p.time.scale < k); };
      CHECK(max_diff(truncated_field(f, P, ks).values, weighted_field_reference(f, P, ks, below).values) <= 1e-12);

      FieldEngine eng(f, &P);
      std::vector<double> out(static_cast<std::size_t>(eng.scale_count()));
      for (std::size_t x = 0; x < g.size(); ++x)
        for (std::size_t xi = 0; xi < g.size(); ++xi) {
          eng.contributions(x, xi, out);
          double s = 0.0;
          for (double v : out) s += v;
          CHECK(s == doctest::Approx(fast.at(x, xi)).epsilon(1e-12));
        }
    }
  }

  TEST_CASE("bitile sets") {
    const GridSpec g(1, 1);
    BitileSet s(g);
    const Bitile p = make_bitile({0, 0}, {1, 0});
    s.insert(p);
    s.insert(p);
    CHECK(s.size() == 1);
    CHECK(s.contains(p));
    CHECK(s.bitile(s.id(p)) == p);
    CHECK(s.is_convex());
    CHECK(s.is_subset_of(BitileSet::all(g)));
    s.erase(p);
    CHECK(s.empty());
  }
}
