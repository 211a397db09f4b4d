#include "doctest.h"

#include <cmath>
#include <random>

#include "walshpp/multnorm.hpp"

using namespace walshpp;

namespace {

DiscreteSignal dyadic_signal(const GridSpec& g, std::mt19937_64& rng) {
  DiscreteSignal f(g);
  for (double& v : f.values) v = std::uniform_int_distribution<int>(-8, 8)(rng) / 4.0;
  if (f[0] == 0.0) f[0] = 1.0;
  return f;
}

Multiplier random_multiplier(const GridSpec& g, std::mt19937_64& rng) {
  Multiplier m(g.size());
  for (double& v : m) v = std::uniform_int_distribution<int>(-16, 16)(rng) / 16.0;
  return m;
}

}  // namespace

TEST_SUITE("multnorm") {
  TEST_CASE("identity and averaging multipliers") {
    std::mt19937_64 rng(1);
    const GridSpec g(2, 2);
    const DiscreteSignal f = dyadic_signal(g, rng);
    const Multiplier one(g.size(), 1.0);
    CHECK(apply_multiplier(one, f).values == f.values);
    for (double q : {1.0, 1.5, 2.0, 4.0, double(INFINITY)}) {
      CHECK(mq_ratio(one, f, q) == doctest::Approx(1.0));
      CHECK(mq_upper_bound(g, one, q) == doctest::Approx(1.0));
    }
    // 1 on the lowest cell: g -> mean of g over [0, 2^a), which has M^q norm 1.
    Multiplier low(g.size(), 0.0);
    low[0] = 1.0;
    const DiscreteSignal avg = apply_multiplier(low, f);
    double mean = 0.0;
    for (double v : f.values) mean += v / static_cast<double>(g.size());
    for (double v : avg.values) CHECK(v == doctest::Approx(mean));
    const NormEstimate e = mq_norm_estimate(g, low, 1.5, {2, 20, 3});
    CHECK(e.lower == doctest::Approx(1.0));
    CHECK(e.lower <= e.upper);
    CHECK_THROWS_AS(mq_ratio(low, DiscreteSignal(g), 1.5), Error);
  }

  TEST_CASE("M^2 norm by power iteration") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
      const GridSpec g(1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 3));
      const Multiplier m = random_multiplier(g, rng);
      CHECK(std::abs(m2_power_iteration(g, m, 2000, rng()) - m2_norm(m)) <= 1e-6);
    }
  }

  TEST_CASE("estimates bracket and witnesses reproduce") {
    std::mt19937_64 rng(3);
    const GridSpec g(2, 3);
    const Multiplier m = random_multiplier(g, rng);
    const std::vector<Multiplier> fam{m, Multiplier(g.size(), 0.5), Multiplier(m.rbegin(), m.rend())};
    for (double q : {1.25, 1.5, 3.0}) {
      const NormEstimate a = mq_norm_estimate(g, m, q, {2, 30, 5});
      CHECK(a.lower <= a.upper);
      CHECK(mq_ratio(m, a.witness, q) == doctest::Approx(a.lower).epsilon(1e-9));
      const NormEstimate b = mqstar_norm_estimate(g, fam, q, {1, 10, 6});
      CHECK(b.lower <= b.upper);
      CHECK(b.lower >= a.lower * (1.0 - 1e-9));
      CHECK(mqstar_ratio(fam, b.witness, q) == doctest::Approx(b.lower).epsilon(1e-9));
      const NormEstimate c = mqs_norm_estimate(g, fam, q, 3.0, {1, 10, 7});
      CHECK(c.lower <= c.upper);
      CHECK(mqs_ratio(fam, c.witness, q, 3.0) == doctest::Approx(c.lower).epsilon(1e-9));
    }
  }

  TEST_CASE("variation family dominates the maximal family") {
    std::mt19937_64 rng(4);
    const GridSpec g(2, 2);
    const std::vector<Multiplier> fam{random_multiplier(g, rng), random_multiplier(g, rng), random_multiplier(g, rng)};
    for (int i = 0; i < 20; ++i) {
      const DiscreteSignal f = dyadic_signal(g, rng);
      const double star = mqstar_ratio(fam, f, 1.5);
      CHECK(mqs_ratio(fam, f, 1.5, 3.0) >= star);
      for (const Multiplier& m : fam) CHECK(star >= mq_ratio(m, f, 1.5) * (1.0 - 1e-12));
    }
  }

  TEST_CASE("D_k multipliers around a single frequency") {
    const GridSpec g(2, 2);
    const MultiplierFamily fam{g, {DyadicRational()}, {}, 1.0, -2, 2};
    const std::vector<Multiplier> ds = dk_family(fam);
    CHECK(ds.size() == 5);
    for (int k = -2; k <= 2; ++k) {
      const Multiplier m = dk_multiplier(fam, k);
      const std::size_t cells = std::size_t{1} << (k + 2);  // [0, 2^k) in cells of 2^-2
      for (std::size_t j = 0; j < g.size(); ++j) CHECK(m[j] == (j < cells ? 1.0 : 0.0));
    }
    CHECK_THROWS_AS(dk_multiplier(fam, 3), Error);
  }

  TEST_CASE("step function round trip") {
    const GridSpec g(1, 2);
    const Multiplier m{1, 1, 0, 0, 2, 2, 2, -1};
    CHECK(from_step_function(g, to_step_function(g, m)) == m);
  }
}
