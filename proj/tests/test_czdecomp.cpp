#include "doctest.h"

#include <algorithm>
#include <random>

#include "walshpp/czdecomp.hpp"

using namespace walshpp;

TEST_SUITE("czdecomp") {
  TEST_CASE("dyadic maximal function") {
    const GridSpec g(1, 1);
    const DiscreteSignal f(g, {4, 0, 0, 0});
    CHECK(hl_maximal(f).values == std::vector<double>{4, 2, 1, 1});
    const DiscreteSignal h(g, {0, -2, 6, 6});
    CHECK(hl_maximal(h).values == std::vector<double>{3.5, 3.5, 6, 6});
  }

  TEST_CASE("maximal intervals") {
    const GridSpec g(1, 1);
    const std::vector<std::uint8_t> cells{1, 1, 0, 1};
    CHECK(maximal_intervals(g, cells) == std::vector<DyadicInterval>{{0, 0}, {-1, 3}});
    const std::vector<std::uint8_t> full(4, 1);
    CHECK(maximal_intervals(g, full) == std::vector<DyadicInterval>{{1, 0}});
  }

  TEST_CASE("interval multipliers") {
    const GridSpec g(1, 1);  // frequency cells of 1/2 on [0, 2)
    const std::vector<FreqInterval> ups{{DyadicRational(), DyadicRational(1, -1), 2.0},
                                        {DyadicRational(1, 0), DyadicRational(2, 0), -1.0}};
    CHECK(interval_multiplier(g, ups) == Multiplier{2, 0, -1, -1});
    const std::vector<FreqInterval> overlap{{DyadicRational(), DyadicRational(1, 0), 1.0},
                                            {DyadicRational(1, -1), DyadicRational(2, 0), 1.0}};
    CHECK_THROWS_AS(interval_multiplier(g, overlap), Error);
  }

  TEST_CASE("decomposition properties on random inputs") {
    std::mt19937_64 rng(6);
    const GridSpec g(3, 3);
    for (int i = 0; i < 100; ++i) {
      DiscreteSignal f(g);
      for (double& v : f.values) v = std::uniform_int_distribution<int>(-8, 8)(rng) / 4.0;
      std::vector<DyadicRational> xi{g.freq_point(rng() % g.size()), g.freq_point(rng() % g.size())};
      std::sort(xi.begin(), xi.end());
      xi.erase(std::unique(xi.begin(), xi.end()), xi.end());
      const MultiplierFamily fam{g, xi, {}, 1.0, -g.a, g.b};
      const double lambda = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
      const CZResult r = cz_decompose(f, lambda, xi, {}, 1.0);
      CHECK(r.n == static_cast<double>(xi.size()));
      const CZReport rep = verify_bad_function(r, f, {}, fam);
      CHECK_MESSAGE(rep.ok(), rep.witness);
      for (std::size_t c = 0; c < g.size(); ++c) CHECK(r.good[c] + r.bad[c] == doctest::Approx(f[c]));
    }
  }

  TEST_CASE("large threshold leaves the input good") {
    const GridSpec g(2, 2);
    const DiscreteSignal f(g, std::vector<double>(g.size(), 0.5));
    const std::vector<DyadicRational> xi{DyadicRational()};
    const CZResult r = cz_decompose(f, 100.0, xi, {}, 1.0);
    CHECK(r.intervals.empty());
    CHECK(r.good.values == f.values);
    for (double v : r.bad.values) CHECK(v == 0.0);
  }
}
