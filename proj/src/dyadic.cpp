#include "walshpp/dyadic.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace walshpp {

DyadicRational::DyadicRational(std::uint64_t mantissa, int exponent)
    : mantissa_(mantissa), exponent_(exponent) {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  int tz = std::countr_zero(mantissa_);
  mantissa_ >>= tz;
  exponent_ += tz;
}

DyadicRational DyadicRational::fraction(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || !std::has_single_bit(den)) {
    throw Error("denominator " + std::to_string(den) + " is not a power of two");
  }
  return {num, -std::countr_zero(den)};
}

DyadicRational DyadicRational::from_double(double v) {
  if (!std::isfinite(v) || v < 0) {
    throw Error("not a nonnegative finite value");
  }
  if (v == 0) return {};
  int e = 0;
  double frac = std::frexp(v, &e);  // v = frac * 2^e, frac in [0.5, 1)
  auto m = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  if (std::ldexp(static_cast<double>(m), e - 53) != v) {
    throw Error("value is not exactly representable");
  }
  return {m, e - 53};
}

int DyadicRational::digit(int n) const {
  if (mantissa_ == 0) return 0;
  int shift = n - exponent_;
  if (shift < 0 || shift >= 64) return 0;
  return static_cast<int>((mantissa_ >> shift) & 1u);
}

int DyadicRational::top_digit() const {
  if (mantissa_ == 0) throw Error("zero has no top digit");
  return exponent_ + 63 - std::countl_zero(mantissa_);
}

std::uint64_t DyadicRational::floor_div_pow2(int k) const {
  if (mantissa_ == 0) return 0;
  int shift = exponent_ - k;
  if (shift >= 0) {
    if (shift >= 64 || (shift > 0 && (mantissa_ >> (64 - shift)) != 0)) {
      throw Error("dyadic quotient overflows 64 bits");
    }
    return mantissa_ << shift;
  }
  if (-shift >= 64) return 0;
  return mantissa_ >> (-shift);
}

double DyadicRational::to_double() const {
  return std::ldexp(static_cast<double>(mantissa_), exponent_);
}

std::string DyadicRational::to_string() const {
  std::ostringstream os;
  if (exponent_ >= 0) {
    os << mantissa_ << "*2^" << exponent_;
  } else {
    os << mantissa_ << "/2^" << -exponent_;
  }
  return os.str();
}

std::strong_ordering operator<=>(const DyadicRational& x, const DyadicRational& y) {
  if (x.is_zero() || y.is_zero()) return x.mantissa() <=> y.mantissa();
  int tx = x.top_digit(), ty = y.top_digit();
  if (tx != ty) return tx <=> ty;
  // Same magnitude: align to the smaller exponent; the shift stays below 64
  // because both mantissas end at the same top digit.
  int e = std::min(x.exponent(), y.exponent());
  std::uint64_t mx = x.mantissa() << (x.exponent() - e);
  std::uint64_t my = y.mantissa() << (y.exponent() - e);
  return mx <=> my;
}

namespace {

std::uint64_t aligned(const DyadicRational& x, int e) {
  int shift = x.exponent() - e;
  if (x.is_zero()) return 0;
  if (shift >= 64 || (shift > 0 && (x.mantissa() >> (64 - shift)) != 0)) {
    throw Error("dyadic operands span more than 64 digits");
  }
  return x.mantissa() << shift;
}

}  // namespace

DyadicRational bxor(const DyadicRational& x, const DyadicRational& y) {
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  int e = std::min(x.exponent(), y.exponent());
  return {aligned(x, e) ^ aligned(y, e), e};
}

unsigned __int128 clmul(std::uint64_t x, std::uint64_t y) {
  unsigned __int128 acc = 0;
  while (y) {
    int i = std::countr_zero(y);
    acc ^= static_cast<unsigned __int128>(x) << i;
    y &= y - 1;
  }
  return acc;
}

DyadicRational bmul(const DyadicRational& x, const DyadicRational& y) {
  if (x.is_zero() || y.is_zero()) return {};
  unsigned __int128 p = clmul(x.mantissa(), y.mantissa());
  if ((p >> 64) != 0) throw Error("carry-less product exceeds 64 digits");
  return {static_cast<std::uint64_t>(p), x.exponent() + y.exponent()};
}

int character(const DyadicRational& x) { return x.digit(-1) ? -1 : 1; }

bool DyadicInterval::contains(const DyadicRational& x) const {
  if (!x.is_zero() && x.top_digit() - scale >= 64) return false;
  return x.floor_div_pow2(scale) == index;
}

bool DyadicInterval::contains(const DyadicInterval& other) const {
  if (other.scale > scale) return false;
  int d = scale - other.scale;
  if (d >= 64) return index == 0 && other.index == 0;
  return (other.index >> d) == index;
}

DyadicInterval DyadicInterval::ancestor(int coarser) const {
  if (coarser < scale) throw Error("ancestor scale finer than interval");
  int d = coarser - scale;
  return {coarser, d >= 64 ? 0 : index >> d};
}

DyadicInterval smallest_containing(const DyadicRational& x, const DyadicRational& y,
                                   std::optional<int> max_scale, std::optional<int> min_scale) {
  int k;
  if (x == y) {
    if (!min_scale) throw Error("equal points have no smallest containing interval");
    k = *min_scale;
  } else {
    // The first differing digit from the top decides the scale.
    DyadicRational diff = bxor(x, y);
    k = diff.top_digit() + 1;
    if (min_scale && k < *min_scale) k = *min_scale;
  }
  if (max_scale && k > *max_scale) {
    throw Error("smallest containing interval exceeds the scale cap");
  }
  return DyadicInterval::containing(x, k);
}

}  // namespace walshpp
