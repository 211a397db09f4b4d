#include "walshpp/multnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace walshpp {

namespace {

// Relative allowance for rounding in the evaluated lower bounds.
constexpr double kRounding = 1e-12;

void check_q(double q) {
  if (!(q >= 1.0)) throw Error("multiplier norms need q >= 1");
}

void check_multiplier(const GridSpec& g, std::span<const double> m) {
  if (m.size() != g.size()) throw Error("multiplier resolution does not match the grid");
}

void check_family(const GridSpec& g, std::span<const Multiplier> ms) {
  if (ms.empty()) throw Error("empty multiplier family");
  for (const Multiplier& m : ms) check_multiplier(g, m);
}

double raw_norm(std::span<const double> v, double q) { return lp_norm(v, q, 1.0); }

DiscreteSignal impulse(const GridSpec& g) {
  DiscreteSignal d(g);
  d[0] = 1.0 / g.time_weight();
  return d;
}

// Kernel kappa = T delta; T g = g * kappa.
std::vector<double> kernel(const GridSpec& g, std::span<const double> m) {
  return apply_multiplier(m, impulse(g)).values;
}

// Riesz-Thorin between the q = 1, 2, inf bounds.
double interpolate(double b1, double b2, double binf, double q) {
  if (std::isinf(q)) return binf;
  if (q <= 2.0) {
    const double theta = 2.0 - 2.0 / q;
    return std::pow(b1, 1.0 - theta) * std::pow(b2, theta);
  }
  const double theta = 2.0 / q;
  return std::pow(b2, theta) * std::pow(binf, 1.0 - theta);
}

// Pointwise objectives on a family for one input.
std::vector<std::vector<double>> outputs(std::span<const Multiplier> ms, const DiscreteSignal& g) {
  const SpectralSignal G = walsh_transform(g);
  std::vector<std::vector<double>> y;
  y.reserve(ms.size());
  SpectralSignal F(g.grid);
  for (const Multiplier& m : ms) {
    for (std::size_t j = 0; j < F.size(); ++j) F[j] = G[j] * m[j];
    y.push_back(inverse_transform(F).values);
  }
  return y;
}

enum class Kind { single, maximal, variation };

struct Objective {
  GridSpec grid;
  std::span<const Multiplier> ms;
  double q;
  double s = 2.0;
  Kind kind;

  double value(const DiscreteSignal& g) const {
    switch (kind) {
      case Kind::single: return mq_ratio(ms[0], g, q);
      case Kind::maximal: return mqstar_ratio(ms, g, q);
      case Kind::variation: return mqs_ratio(ms, g, q, s);
    }
    return 0.0;
  }

  // Gradient of log ratio on raw cell vectors; empty when not available.
  std::vector<double> gradient(const DiscreteSignal& g) const {
    if (kind == Kind::variation || std::isinf(q) || q == 1.0) return {};
    const std::size_t n = grid.size();
    const auto y = outputs(ms, g);
    std::vector<double> lin(n, 0.0);
    std::vector<std::size_t> pick(n, 0);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t k = 1; k < y.size(); ++k)
        if (std::abs(y[k][x]) > std::abs(y[pick[x]][x])) pick[x] = k;
      lin[x] = y[pick[x]][x];
    }
    const double ny = std::pow(raw_norm(lin, q), q);
    const double ng = std::pow(raw_norm(g.values, q), q);
    if (ny == 0.0 || ng == 0.0) return {};
    std::vector<double> grad(n, 0.0);
    for (std::size_t k = 0; k < ms.size(); ++k) {
      DiscreteSignal v(grid);
      bool any = false;
      for (std::size_t x = 0; x < n; ++x)
        if (pick[x] == k && lin[x] != 0.0) {
          v[x] = std::copysign(std::pow(std::abs(lin[x]), q - 1.0), lin[x]);
          any = true;
        }
      if (!any) continue;
      const DiscreteSignal back = apply_multiplier(ms[k], v);
      for (std::size_t x = 0; x < n; ++x) grad[x] += back[x] / ny;
    }
    for (std::size_t x = 0; x < n; ++x)
      if (g[x] != 0.0) grad[x] -= std::copysign(std::pow(std::abs(g[x]), q - 1.0), g[x]) / ng;
    return grad;
  }
};

void normalize(DiscreteSignal& g) {
  const double n = raw_norm(g.values, 2.0);
  if (n > 0)
    for (double& v : g.values) v /= n;
}

// Backtracking gradient ascent, or random search when no gradient exists.
DiscreteSignal ascend(const Objective& obj, DiscreteSignal g, int iterations, std::uint64_t seed) {
  double best = obj.value(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double eta = 0.5;
  for (int it = 0; it < iterations && eta > 1e-7; ++it) {
    std::vector<double> dir = obj.gradient(g);
    if (dir.empty()) {
      dir.resize(g.size());
      for (double& v : dir) v = normal(rng);
    }
    const double dn = raw_norm(dir, 2.0);
    if (!(dn > 0) || !std::isfinite(dn)) break;
    const double gn = raw_norm(g.values, 2.0);
    DiscreteSignal trial = g;
    for (std::size_t x = 0; x < g.size(); ++x) trial[x] += eta * gn * dir[x] / dn;
    normalize(trial);
    const double v = obj.value(trial);
    if (v > best) {
      best = v;
      g = std::move(trial);
      eta = std::min(eta * 1.5, 2.0);
    } else {
      eta *= 0.5;
    }
  }
  return g;
}

std::vector<DiscreteSignal> structured_starts(const GridSpec& g, std::span<const Multiplier> ms) {
  std::vector<DiscreteSignal> starts;
  starts.push_back(impulse(g));
  starts.push_back(DiscreteSignal(g, std::vector<double>(g.size(), 1.0)));
  for (const Multiplier& m : ms) {
    const std::vector<double> kap = kernel(g, m);
    DiscreteSignal sgn(g);
    for (std::size_t c = 0; c < g.size(); ++c) sgn[c] = kap[c] > 0 ? 1.0 : (kap[c] < 0 ? -1.0 : 0.0);
    if (raw_norm(sgn.values, 1.0) > 0) starts.push_back(std::move(sgn));
    std::size_t top = 0;
    for (std::size_t j = 1; j < g.size(); ++j)
      if (std::abs(m[j]) > std::abs(m[top])) top = j;
    SpectralSignal e(g);
    e[top] = 1.0;
    starts.push_back(inverse_transform(e));
  }
  return starts;
}

NormEstimate run_estimate(const Objective& obj, std::vector<DiscreteSignal> starts, double upper,
                          const EstimateBudget& budget, std::vector<std::string> methods) {
  std::mt19937_64 rng(budget.seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < budget.starts; ++i) {
    DiscreteSignal r(obj.grid);
    for (double& v : r.values) v = normal(rng);
    starts.push_back(std::move(r));
  }
  std::vector<DiscreteSignal> found(starts.size());
  std::vector<double> value(starts.size(), 0.0);
  const bool smooth = obj.kind != Kind::variation && !std::isinf(obj.q) && obj.q > 1.0;
  const int iters = (smooth || obj.kind == Kind::variation) ? budget.iterations : 0;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (raw_norm(starts[i].values, 2.0) == 0.0) continue;
    found[i] = ascend(obj, starts[i], iters, budget.seed + 7919 * (i + 1));
    value[i] = obj.value(found[i]);
  }
  NormEstimate est;
  est.upper = upper * (1.0 + kRounding);
  est.methods = std::move(methods);
  std::size_t best = starts.size();
  for (std::size_t i = 0; i < starts.size(); ++i)
    if (!found[i].values.empty() && (best == starts.size() || value[i] > value[best])) best = i;
  if (best == starts.size()) throw Error("no admissible start");
  est.witness = found[best];
  est.lower = obj.value(est.witness);
  return est;
}

}  // namespace

double MultiplierFamily::coeff(const DyadicInterval& w) const {
  const auto it = coeffs.find(w);
  return it == coeffs.end() ? default_coeff : it->second;
}

DiscreteSignal apply_multiplier(std::span<const double> m, const DiscreteSignal& g) {
  check_multiplier(g.grid, m);
  SpectralSignal F = walsh_transform(g);
  for (std::size_t j = 0; j < F.size(); ++j) F[j] *= m[j];
  return inverse_transform(F);
}

Multiplier dk_multiplier(const MultiplierFamily& fam, int k) {
  const GridSpec& g = fam.grid;
  if (k < -g.a || k > g.b) throw Error("D_k scale outside the frequency grid");
  Multiplier d(g.size(), 0.0);
  std::set<DyadicInterval> hit;
  const DyadicRational end = DyadicRational::integer(std::uint64_t{1} << g.b);
  for (const DyadicRational& xi : fam.xi)
    if (xi < end) hit.insert(DyadicInterval::containing(xi, k));
  const int sh = k + g.a;
  for (const DyadicInterval& w : hit) {
    const double a = fam.coeff(w);
    for (std::uint64_t q = w.index << sh; q < ((w.index + 1) << sh); ++q) d[q] += a;
  }
  return d;
}

std::vector<Multiplier> dk_family(const MultiplierFamily& fam) {
  std::vector<Multiplier> out;
  for (int k = fam.k_min; k <= fam.k_max; ++k) out.push_back(dk_multiplier(fam, k));
  return out;
}

Multiplier from_step_function(const GridSpec& g, const StepFunction& m) {
  m.validate();
  for (const DyadicRational& x : m.breakpoints)
    if (!x.is_zero() && x.exponent() < -g.a) throw Error("step function finer than the frequency cells");
  Multiplier out(g.size());
  for (std::size_t q = 0; q < g.size(); ++q) out[q] = m(g.freq_point(q));
  return out;
}

StepFunction to_step_function(const GridSpec& g, std::span<const double> m) {
  check_multiplier(g, m);
  StepFunction s;
  for (std::size_t q = 0; q < m.size(); ++q) {
    if (q == 0 || m[q] != m[q - 1]) {
      s.breakpoints.push_back(g.freq_point(q));
      s.values.push_back(m[q]);
    }
  }
  s.breakpoints.push_back(g.freq_point(g.size()));
  return s;
}

double m2_norm(std::span<const double> m) {
  double s = 0.0;
  for (double v : m) s = std::max(s, std::abs(v));
  return s;
}

double m2_power_iteration(const GridSpec& g, std::span<const double> m, int iterations, std::uint64_t seed) {
  check_multiplier(g, m);
  Multiplier sq(m.begin(), m.end());
  for (double& v : sq) v *= v;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DiscreteSignal v(g);
  for (double& x : v.values) x = normal(rng);
  normalize(v);
  double rq = 0.0;
  for (int it = 0; it < iterations; ++it) {
    DiscreteSignal w = apply_multiplier(sq, v);
    rq = inner(v, w) / inner(v, v);
    if (raw_norm(w.values, 2.0) == 0.0) return 0.0;
    normalize(w);
    v = std::move(w);
  }
  return std::sqrt(std::max(rq, 0.0));
}

double mq_ratio(std::span<const double> m, const DiscreteSignal& g, double q) {
  check_q(q);
  const double ng = lp_norm(g, q);
  if (ng == 0.0) throw Error("ratio of the zero function");
  return lp_norm(apply_multiplier(m, g), q) / ng;
}

double mqstar_ratio(std::span<const Multiplier> ms, const DiscreteSignal& g, double q) {
  check_q(q);
  check_family(g.grid, ms);
  const double ng = lp_norm(g, q);
  if (ng == 0.0) throw Error("ratio of the zero function");
  DiscreteSignal sup(g.grid);
  for (const std::vector<double>& y : outputs(ms, g))
    for (std::size_t x = 0; x < y.size(); ++x) sup[x] = std::max(sup[x], std::abs(y[x]));
  return lp_norm(sup, q) / ng;
}

double mqs_ratio(std::span<const Multiplier> ms, const DiscreteSignal& g, double q, double s) {
  check_q(q);
  check_family(g.grid, ms);
  const double ng = lp_norm(g, q);
  if (ng == 0.0) throw Error("ratio of the zero function");
  const auto y = outputs(ms, g);
  DiscreteSignal v(g.grid);
  std::vector<double> seq(ms.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t k = 0; k < ms.size(); ++k) seq[k] = y[k][x];
    v[x] = variation_norm(seq, s);
  }
  return lp_norm(v, q) / ng;
}

double mq_upper_bound(const GridSpec& g, std::span<const double> m, double q) {
  check_q(q);
  check_multiplier(g, m);
  const double b1 = lp_norm(kernel(g, m), 1.0, g.time_weight());
  return interpolate(b1, m2_norm(m), b1, q);
}

double mqstar_upper_bound(const GridSpec& g, std::span<const Multiplier> ms, double q) {
  check_q(q);
  check_family(g, ms);
  std::vector<double> env(g.size(), 0.0);
  double binf = 0.0, b2sq = 0.0;
  for (const Multiplier& m : ms) {
    const std::vector<double> kap = kernel(g, m);
    for (std::size_t c = 0; c < g.size(); ++c) env[c] = std::max(env[c], std::abs(kap[c]));
    binf = std::max(binf, lp_norm(kap, 1.0, g.time_weight()));
    b2sq += m2_norm(m) * m2_norm(m);
  }
  const double b1 = lp_norm(env, 1.0, g.time_weight());
  return interpolate(b1, std::sqrt(b2sq), binf, q);
}

double mqs_upper_bound(const GridSpec& g, std::span<const Multiplier> ms, double q, double s) {
  if (!(s > 1.0)) throw Error("variation exponent must exceed 1");
  const double n = static_cast<double>(ms.size());
  return (1.0 + 2.0 * std::pow(n - 1.0, 1.0 / s)) * mqstar_upper_bound(g, ms, q);
}

NormEstimate mq_norm_estimate(const GridSpec& g, std::span<const double> m, double q,
                              const EstimateBudget& budget) {
  check_q(q);
  check_multiplier(g, m);
  const Multiplier one(m.begin(), m.end());
  const std::vector<Multiplier> fam{one};
  const Objective obj{g, fam, q, 2.0, Kind::single};
  return run_estimate(obj, structured_starts(g, fam), mq_upper_bound(g, m, q), budget,
                      {"structured-starts", "gradient-ascent", "kernel-bounds", "riesz-thorin"});
}

NormEstimate mqstar_norm_estimate(const GridSpec& g, std::span<const Multiplier> ms, double q,
                                  const EstimateBudget& budget) {
  check_q(q);
  check_family(g, ms);
  std::vector<DiscreteSignal> starts = structured_starts(g, ms);
  if (budget.member_witnesses)
    for (const Multiplier& m : ms) starts.push_back(mq_norm_estimate(g, m, q, budget).witness);
  const Objective obj{g, ms, q, 2.0, Kind::maximal};
  return run_estimate(obj, std::move(starts), mqstar_upper_bound(g, ms, q), budget,
                      {"structured-starts", "member-witnesses", "subgradient-ascent", "kernel-bounds",
                       "riesz-thorin"});
}

NormEstimate mqs_norm_estimate(const GridSpec& g, std::span<const Multiplier> ms, double q, double s,
                               const EstimateBudget& budget) {
  check_q(q);
  check_family(g, ms);
  std::vector<DiscreteSignal> starts = structured_starts(g, ms);
  if (budget.member_witnesses) starts.push_back(mqstar_norm_estimate(g, ms, q, budget).witness);
  const Objective obj{g, ms, q, s, Kind::variation};
  return run_estimate(obj, std::move(starts), mqs_upper_bound(g, ms, q, s), budget,
                      {"structured-starts", "maximal-witness", "random-search", "chain-bound"});
}

}  // namespace walshpp
