#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "walshpp/dyadic.hpp"

namespace walshpp {

/// Finite dyadic model: time domain [0, 2^a) sampled with cells of width
/// 2^-b, frequency domain [0, 2^b) with cells of width 2^-a. Both carry
/// N = 2^(a+b) cells.
struct GridSpec {
  int a = 0;
  int b = 0;

  GridSpec() = default;
  GridSpec(int a_, int b_);

  int bits() const { return a + b; }
  std::size_t size() const { return std::size_t{1} << bits(); }
  double time_weight() const;  // 2^-b
  double freq_weight() const;  // 2^-a

  /// Left endpoint of time cell i, as an exact dyadic number.
  DyadicRational time_point(std::uint64_t i) const { return {i, -b}; }
  DyadicRational freq_point(std::uint64_t j) const { return {j, -a}; }
  /// Cell containing a point; throws if outside the domain.
  std::uint64_t time_cell(const DyadicRational& x) const;
  std::uint64_t freq_cell(const DyadicRational& xi) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Real function on the time grid, piecewise constant on cells.
struct DiscreteSignal {
  GridSpec grid;
  std::vector<double> values;

  DiscreteSignal() = default;
  explicit DiscreteSignal(GridSpec g) : grid(g), values(g.size(), 0.0) {}
  DiscreteSignal(GridSpec g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Real function on the frequency grid, piecewise constant on cells.
struct SpectralSignal {
  GridSpec grid;
  std::vector<double> values;

  SpectralSignal() = default;
  explicit SpectralSignal(GridSpec g) : grid(g), values(g.size(), 0.0) {}
  SpectralSignal(GridSpec g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

SpectralSignal walsh_transform(const DiscreteSignal& f);
DiscreteSignal inverse_transform(const SpectralSignal& F);

/// Dyadic (xor) convolution: (f*g)(x) = integral of f(x xor y) g(y) dy.
DiscreteSignal convolve(const DiscreteSignal& f, const DiscreteSignal& g);

/// D_k f: mean of f over the dyadic interval of length 2^k containing x.
DiscreteSignal dyadic_average(const DiscreteSignal& f, int k);

/// Weighted L^p norm (cell weight 2^-b); p = +inf gives the sup norm.
double lp_norm(const DiscreteSignal& f, double p);
/// Same over the frequency grid with the dual weight 2^-a.
double lp_norm(const SpectralSignal& F, double p);
/// Raw weighted norm of a span with an explicit cell weight.
double lp_norm(std::span<const double> v, double p, double weight);

/// L^2 inner product with the time weight.
double inner(const DiscreteSignal& f, const DiscreteSignal& g);

}  // namespace walshpp
