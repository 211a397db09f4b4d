#include "doctest.h"

#include <cmath>
#include <random>

#include "walshpp/kernels.hpp"
#include "walshpp/signal.hpp"

using namespace walshpp;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_SUITE("signal") {
  TEST_CASE("serial, parallel and direct transforms") {
    for (int bits = 0; bits <= 9; ++bits) {
      const auto v = gaussian(std::size_t{1} << bits, bits);
      auto s = v, p = v;
      kernels::wht_serial(s);
      kernels::wht_parallel(p);
      const auto d = kernels::wht_direct(v);
      CHECK(s == p);
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(s[i] == doctest::Approx(d[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("parallel path above the threading threshold is bitwise serial") {
    for (int bits = 12; bits <= 16; bits += 2) {
      const auto v = gaussian(std::size_t{1} << bits, 100 + bits);
      auto s = v, p = v;
      kernels::wht_serial(s);
      kernels::wht_parallel(p);
      CHECK(s == p);
      auto bs = v, bp = v;
      kernels::block_wht_serial(bs, 64);
      kernels::block_wht_parallel(bp, 64);
      CHECK(bs == bp);
    }
    std::vector<double> bad(6);
    CHECK_THROWS_AS(kernels::wht_serial(bad), Error);
  }

  TEST_CASE("indicator of the unit interval is self-dual") {
    const GridSpec g(2, 3);
    DiscreteSignal f(g);
    for (std::size_t c = 0; c < 8; ++c) f[c] = 1.0;
    const SpectralSignal F = walsh_transform(f);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(F[j] == (j < 4 ? 1.0 : 0.0));
    CHECK(inverse_transform(F).values == f.values);
  }

  TEST_CASE("Plancherel and involution") {
    const GridSpec g(3, 4);
    const DiscreteSignal f(g, gaussian(g.size(), 9));
    const SpectralSignal F = walsh_transform(f);
    CHECK(lp_norm(F, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-13));
    const DiscreteSignal back = inverse_transform(F);
    for (std::size_t c = 0; c < g.size(); ++c) CHECK(back[c] == doctest::Approx(f[c]).epsilon(1e-12));
  }

  TEST_CASE("norms, averages and convolution") {
    const GridSpec g(1, 1);  // cells of width 1/2 on [0, 2)
    const DiscreteSignal f(g, {1, 3, 5, -7});
    CHECK(lp_norm(f, 1.0) == 8.0);
    CHECK(lp_norm(f, INFINITY) == 7.0);
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(42.0)));
    const DiscreteSignal d0 = dyadic_average(f, 0);
    CHECK(d0.values == std::vector<double>{2, 2, -1, -1});
    CHECK(dyadic_average(f, 1).values == std::vector<double>{0.5, 0.5, 0.5, 0.5});
    CHECK(dyadic_average(f, -1).values == f.values);
    DiscreteSignal delta(g);
    delta[0] = 2.0;  // unit mass on the first cell
    CHECK(convolve(f, delta).values == f.values);
    DiscreteSignal shift(g);
    shift[1] = 2.0;  // x -> x xor 1/2
    CHECK(convolve(f, shift).values == std::vector<double>{3, 1, -7, 5});
    CHECK(inner(f, f) == doctest::Approx(42.0));
    CHECK_THROWS_AS(DiscreteSignal(g, {1, 2}), Error);
  }
}
