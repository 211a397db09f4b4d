#include "doctest.h"

#include <cmath>
#include <random>

#include "walshpp/varnorm.hpp"

using namespace walshpp;

namespace {

StepFunction random_step(std::mt19937_64& rng) {
  StepFunction m;
  const std::size_t n = 1 + rng() % 12;
  std::uint64_t at = rng() % 3;
  for (std::size_t i = 0; i <= n; ++i) {
    m.breakpoints.push_back(DyadicRational(at, -3));
    at += 1 + rng() % 4;
  }
  for (std::size_t i = 0; i < n; ++i) m.values.push_back(std::uniform_int_distribution<int>(-16, 16)(rng) / 8.0);
  return m;
}

}  // namespace

TEST_SUITE("varnorm") {
  TEST_CASE("hand values") {
    const std::vector<double> m{0, 2, 1, 3};
    CHECK(variation_norm(m, 1.0) == 8.0);
    CHECK(variation_norm(m, 2.0) == 6.0);
    CHECK(variation_power(m, 2.0) == 9.0);
    CHECK_THROWS_AS(variation_norm(std::vector<double>{}, 2.0), Error);
    CHECK(variation_norm(std::vector<double>{-5}, 2.0) == 5.0);
    const std::vector<Point> pts{{0, 0}, {3, 4}};
    CHECK(variation_norm(pts, 3.0) == doctest::Approx(10.0));
  }

  TEST_CASE("dynamic program against enumeration") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 300; ++i) {
      std::vector<double> seq(1 + rng() % 10);
      for (double& v : seq) v = std::uniform_int_distribution<int>(-8, 8)(rng) / 4.0;
      for (double r : {1.0, 1.5, 2.0, 3.0}) CHECK(variation_norm(seq, r) == variation_norm_brute_force(seq, r));
    }
  }

  TEST_CASE("envelope against the quadratic program on long sequences") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 40; ++i) {
      std::vector<double> seq(64 + rng() % 400);
      double w = 0.0;
      for (double& v : seq) v = (w += normal(rng));
      for (double r : {1.25, 2.0, 3.0, 5.0}) {
        const double fast = variation_power(seq, r), slow = variation_power_quadratic(seq, r);
        CHECK(std::abs(fast - slow) <= 1e-12 * slow);
      }
    }
  }

  TEST_CASE("step functions") {
    StepFunction m{{DyadicRational(), DyadicRational(1, 0), DyadicRational(2, 0)}, {1.0, -1.0}};
    CHECK(m.value_sequence() == std::vector<double>{1, -1, 0});
    CHECK(variation_norm_step(m, 1.0) == 4.0);
    CHECK(m(DyadicRational(1, -1)) == 1.0);
    CHECK(m(DyadicRational(3, 0)) == 0.0);
    StepFunction late{{DyadicRational(1, -1), DyadicRational(1, 0)}, {2.0}};
    CHECK(late.value_sequence() == std::vector<double>{0, 2, 0});
    StepFunction bad{{DyadicRational(1, 0), DyadicRational(1, -1)}, {2.0}};
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("jump covers use open balls") {
    const std::vector<double> c{0, 0.5, 1.2, 1.3, 3};
    CHECK(jump_cover(c, 1.0).indices == std::vector<std::size_t>{0, 2, 4});
    CHECK(jump_cover(std::vector<double>{0, 1, 2}, 1.0).count() == 3);
    CHECK(jump_cover(c, 10.0).count() == 1);
  }

  TEST_CASE("parent maps") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 100; ++i) {
      std::vector<Point> c(2 + rng() % 20, Point(1 + rng() % 4));
      for (Point& p : c)
        for (double& v : p) v = normal(rng);
      const ParentMap pm = parent_map(c, default_lambda0(c));
      CHECK(check_parent_map(c, pm).ok());
      for (std::size_t k = 0; k < c.size(); ++k) CHECK(pm.at(pm.levels() - 1, k) == 0);
    }
    const std::vector<Point> two{{0.0}, {1.0}};
    CHECK_THROWS_AS(parent_map(two, 2.0), Error);
  }

  TEST_CASE("interval decomposition") {
    std::mt19937_64 rng(4);
    double worst_mean = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const StepFunction m = random_step(rng);
      const double r = (i % 2) ? 2.0 : 3.0;
      const StepDecomposition mid = interval_decomposition(m, r, 10);
      const DecompositionCheck cm = check_decomposition(m, mid);
      CHECK(cm.ok());
      CHECK(cm.worst_coefficient_ratio <= 1.0 + 1e-12);
      const DecompositionCheck ca = check_decomposition(m, interval_decomposition(m, r, 10, LevelValue::mean));
      CHECK(ca.count_ok);
      CHECK(ca.tail_ok);
      CHECK(ca.worst_coefficient_ratio <= std::pow(2.0, 1.0 / r) * (1.0 + 1e-12));
      worst_mean = std::max(worst_mean, ca.worst_coefficient_ratio);
    }
    // Length-weighted means do overshoot the unit-constant bound on some inputs.
    CHECK(worst_mean > 1.0);
  }

  TEST_CASE("decomposition reconstructs a constant exactly") {
    StepFunction m{{DyadicRational(), DyadicRational(2, 0)}, {0.75}};
    const StepDecomposition d = interval_decomposition(m, 2.0, 4);
    CHECK(d.norm == 0.75 + 0.75);
    CHECK(d.partial_sum(0, DyadicRational(1, 0)) == 0.75);
  }
}
