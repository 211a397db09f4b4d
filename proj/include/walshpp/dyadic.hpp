#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace walshpp {

/// Library-wide error for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact nonnegative dyadic number mantissa * 2^exponent.
///
/// Always stored canonically: the mantissa is odd, or zero with exponent 0.
/// Digit extraction uses the terminating binary expansion.
class DyadicRational {
 public:
  constexpr DyadicRational() = default;
  DyadicRational(std::uint64_t mantissa, int exponent);

  static DyadicRational integer(std::uint64_t n) { return {n, 0}; }
  /// num / den, rejected unless den is a power of two.
  static DyadicRational fraction(std::uint64_t num, std::uint64_t den);
  /// Rejects values that are negative, non-finite, or not exactly dyadic.
  static DyadicRational from_double(double v);

  std::uint64_t mantissa() const { return mantissa_; }
  int exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == 0; }

  /// d_n(x): the coefficient of 2^n in the terminating expansion.
  int digit(int n) const;
  /// Index of the highest nonzero digit; requires nonzero value.
  int top_digit() const;

  /// floor(x / 2^k) as an integer; throws if it does not fit in 64 bits.
  std::uint64_t floor_div_pow2(int k) const;

  double to_double() const;
  std::string to_string() const;

  friend bool operator==(const DyadicRational&, const DyadicRational&) = default;
  friend std::strong_ordering operator<=>(const DyadicRational& x, const DyadicRational& y);

 private:
  std::uint64_t mantissa_ = 0;
  int exponent_ = 0;
};

/// Digitwise binary addition.
DyadicRational bxor(const DyadicRational& x, const DyadicRational& y);
/// Carry-less (GF(2) polynomial) multiplication of the digit expansions.
DyadicRational bmul(const DyadicRational& x, const DyadicRational& y);
/// e(x) = (-1)^{d_{-1}(x)}.
int character(const DyadicRational& x);

/// Half-open dyadic interval [index * 2^scale, (index + 1) * 2^scale).
struct DyadicInterval {
  int scale = 0;
  std::uint64_t index = 0;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
  friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;

  DyadicRational lower() const { return {index, scale}; }
  DyadicRational upper() const { return {index + 1, scale}; }

  bool contains(const DyadicRational& x) const;
  bool contains(const DyadicInterval& other) const;
  bool intersects(const DyadicInterval& other) const {
    return contains(other) || other.contains(*this);
  }

  DyadicInterval parent() const { return {scale + 1, index >> 1}; }
  std::pair<DyadicInterval, DyadicInterval> halves() const {
    return {{scale - 1, index << 1}, {scale - 1, (index << 1) | 1}};
  }
  /// Ancestor at a coarser (or equal) scale.
  DyadicInterval ancestor(int coarser) const;

  static DyadicInterval containing(const DyadicRational& x, int scale) {
    return {scale, x.floor_div_pow2(scale)};
  }
};

/// Smallest dyadic interval containing both points.
///
/// When x == y there is no smallest interval; `min_scale` must then be given
/// and bounds the answer from below. Throws when the required scale exceeds
/// `max_scale`.
DyadicInterval smallest_containing(const DyadicRational& x, const DyadicRational& y,
                                   std::optional<int> max_scale = std::nullopt,
                                   std::optional<int> min_scale = std::nullopt);

// Integer helpers used by the grid kernels.

inline int popcount(std::uint64_t v) { return __builtin_popcountll(v); }

/// Reverse the low `bits` bits of v.
inline std::uint64_t bit_reverse(std::uint64_t v, int bits) {
  std::uint64_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | ((v >> i) & 1u);
  }
  return r;
}

/// Carry-less 64x64 -> 128 bit product.
unsigned __int128 clmul(std::uint64_t x, std::uint64_t y);

}  // namespace walshpp
