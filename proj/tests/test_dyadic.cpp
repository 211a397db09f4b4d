#include "doctest.h"

#include <cmath>
#include <random>

#include "walshpp/dyadic.hpp"

using namespace walshpp;

namespace {

unsigned __int128 naive_clmul(std::uint64_t x, std::uint64_t y) {
  unsigned __int128 acc = 0;
  for (int i = 0; i < 64; ++i)
    if ((y >> i) & 1u) acc ^= static_cast<unsigned __int128>(x) << i;
  return acc;
}

}  // namespace

TEST_SUITE("dyadic") {
  TEST_CASE("canonical form") {
    const DyadicRational x(12, -4);
    CHECK(x.mantissa() == 3);
    CHECK(x.exponent() == -2);
    CHECK(x == DyadicRational::fraction(3, 4));
    CHECK(DyadicRational(0, 5) == DyadicRational());
    CHECK(DyadicRational::from_double(0.375) == DyadicRational(3, -3));
    CHECK(DyadicRational::from_double(0.1).to_double() == 0.1);  // every finite double is dyadic
    CHECK_THROWS_AS(DyadicRational::from_double(NAN), Error);
    CHECK_THROWS_AS(DyadicRational::from_double(INFINITY), Error);
    CHECK_THROWS_AS(DyadicRational::from_double(-1.0), Error);
    CHECK_THROWS_AS(DyadicRational::fraction(1, 3), Error);
  }

  TEST_CASE("digits and ordering") {
    const DyadicRational x = DyadicRational::fraction(13, 8);  // 1.101
    CHECK(x.digit(0) == 1);
    CHECK(x.digit(-1) == 1);
    CHECK(x.digit(-2) == 0);
    CHECK(x.digit(-3) == 1);
    CHECK(x.digit(3) == 0);
    CHECK(x.top_digit() == 0);
    CHECK(x.floor_div_pow2(-2) == 6);
    CHECK(DyadicRational(1, -1) < DyadicRational(3, -2));
    CHECK(character(DyadicRational(1, -1)) == -1);
    CHECK(character(DyadicRational(1, -2)) == 1);
  }

  TEST_CASE("xor and carry-less product agree with integer arithmetic") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      const std::uint64_t u = rng() >> 40, v = rng() >> 40;
      const int e = static_cast<int>(rng() % 9) - 4;
      CHECK(bxor(DyadicRational(u, e), DyadicRational(v, e)) == DyadicRational(u ^ v, e));
      const auto p = naive_clmul(u, v);
      CHECK(clmul(u, v) == p);
      CHECK(bmul(DyadicRational(u, e), DyadicRational(v, -3)) ==
            DyadicRational(static_cast<std::uint64_t>(p), e - 3));
    }
    CHECK(clmul(~0ull, ~0ull) == naive_clmul(~0ull, ~0ull));
  }

  TEST_CASE("intervals") {
    const DyadicInterval I{-1, 3};  // [3/2, 2)
    CHECK(I.contains(DyadicRational(7, -2)));
    CHECK_FALSE(I.contains(DyadicRational::integer(2)));
    CHECK(I.parent() == DyadicInterval{0, 1});
    CHECK(I.ancestor(1) == DyadicInterval{1, 0});
    CHECK(I.halves().second == DyadicInterval{-2, 7});
    CHECK(DyadicInterval{0, 1}.contains(I));
    CHECK_FALSE(I.intersects(DyadicInterval{-1, 2}));
    CHECK(smallest_containing(DyadicRational(1, -2), DyadicRational(3, -2)) == DyadicInterval{0, 0});
    CHECK(smallest_containing(DyadicRational(1, -1), DyadicRational(1, -1), std::nullopt, -3) ==
          DyadicInterval{-3, 4});
    CHECK_THROWS_AS(smallest_containing(DyadicRational(1, 0), DyadicRational(5, 0), 1), Error);
  }

  TEST_CASE("bit reversal") {
    CHECK(bit_reverse(0b0011, 4) == 0b1100);
    CHECK(bit_reverse(0b101, 3) == 0b101);
    for (std::uint64_t v = 0; v < 64; ++v) CHECK(bit_reverse(bit_reverse(v, 6), 6) == v);
  }
}
