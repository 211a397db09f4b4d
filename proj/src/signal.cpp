#include "walshpp/signal.hpp"

#include <cmath>
#include <limits>

#include "walshpp/kernels.hpp"

namespace walshpp {

GridSpec::GridSpec(int a_, int b_) : a(a_), b(b_) {
  if (a + b < 1) throw Error("grid needs a + b >= 1");
  if (a + b > 30) throw Error("grid larger than 2^30 cells");
}

double GridSpec::time_weight() const { return std::ldexp(1.0, -b); }
double GridSpec::freq_weight() const { return std::ldexp(1.0, -a); }

std::uint64_t GridSpec::time_cell(const DyadicRational& x) const {
  std::uint64_t i = x.is_zero() ? 0 : (x.top_digit() + b >= 64 ? size() : x.floor_div_pow2(-b));
  if (i >= size()) throw Error("point outside the time domain");
  return i;
}

std::uint64_t GridSpec::freq_cell(const DyadicRational& xi) const {
  std::uint64_t j = xi.is_zero() ? 0 : (xi.top_digit() + a >= 64 ? size() : xi.floor_div_pow2(-a));
  if (j >= size()) throw Error("point outside the frequency domain");
  return j;
}

DiscreteSignal::DiscreteSignal(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw Error("signal length does not match grid");
}

SpectralSignal::SpectralSignal(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw Error("spectrum length does not match grid");
}

SpectralSignal walsh_transform(const DiscreteSignal& f) {
  const GridSpec g = f.grid;
  if (f.size() != g.size()) throw Error("grid mismatch");
  std::vector<double> w = f.values;
  kernels::wht_parallel(w);
  // Hadamard order to frequency-cell order: cell j pairs against rev(j).
  SpectralSignal out(g);
  const double scale = g.time_weight();
  for (std::size_t j = 0; j < g.size(); ++j) {
    out[j] = scale * w[bit_reverse(j, g.bits())];
  }
  return out;
}

DiscreteSignal inverse_transform(const SpectralSignal& F) {
  const GridSpec g = F.grid;
  if (F.size() != g.size()) throw Error("grid mismatch");
  std::vector<double> w(g.size());
  for (std::size_t u = 0; u < g.size(); ++u) w[u] = F[bit_reverse(u, g.bits())];
  kernels::wht_parallel(w);
  const double scale = g.freq_weight();
  for (double& v : w) v *= scale;
  return {g, std::move(w)};
}

DiscreteSignal convolve(const DiscreteSignal& f, const DiscreteSignal& g) {
  if (!(f.grid == g.grid)) throw Error("grid mismatch");
  SpectralSignal F = walsh_transform(f);
  SpectralSignal G = walsh_transform(g);
  for (std::size_t j = 0; j < F.size(); ++j) F[j] *= G[j];
  return inverse_transform(F);
}

DiscreteSignal dyadic_average(const DiscreteSignal& f, int k) {
  const GridSpec g = f.grid;
  if (k < -g.b || k > g.a) throw Error("averaging scale out of range");
  const std::size_t block = std::size_t{1} << (k + g.b);
  DiscreteSignal out(g);
  for (std::size_t s = 0; s < g.size(); s += block) {
    double acc = 0.0;
    for (std::size_t i = s; i < s + block; ++i) acc += f[i];
    const double mean = acc / static_cast<double>(block);
    for (std::size_t i = s; i < s + block; ++i) out[i] = mean;
  }
  return out;
}

double lp_norm(std::span<const double> v, double p, double weight) {
  if (!(p >= 1)) throw Error("lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double acc = 0.0;
  if (p == 1) {
    for (double x : v) acc += std::abs(x);
    return weight * acc;
  }
  if (p == 2) {
    for (double x : v) acc += x * x;
    return std::sqrt(weight * acc);
  }
  for (double x : v) acc += std::pow(std::abs(x), p);
  return std::pow(weight * acc, 1.0 / p);
}

double lp_norm(const DiscreteSignal& f, double p) {
  return lp_norm(f.values, p, f.grid.time_weight());
}

double lp_norm(const SpectralSignal& F, double p) {
  return lp_norm(F.values, p, F.grid.freq_weight());
}

double inner(const DiscreteSignal& f, const DiscreteSignal& g) {
  if (!(f.grid == g.grid)) throw Error("grid mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * g[i];
  return f.grid.time_weight() * acc;
}

}  // namespace walshpp
