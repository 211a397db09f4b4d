#include "walshpp/czdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace walshpp {

namespace {

std::uint64_t cell_of_bound(const GridSpec& g, const DyadicRational& x) {
  if (!x.is_zero() && x.exponent() < -g.a) throw Error("interval endpoint finer than the frequency cells");
  const DyadicRational end = DyadicRational::integer(std::uint64_t{1} << g.b);
  if (end < x) throw Error("interval endpoint outside the frequency domain");
  return x == end ? g.size() : g.freq_cell(x);
}

}  // namespace

Multiplier interval_multiplier(const GridSpec& g, std::span<const FreqInterval> ups) {
  Multiplier m(g.size(), 0.0);
  std::vector<std::uint8_t> used(g.size(), 0);
  for (const FreqInterval& u : ups) {
    const std::uint64_t lo = cell_of_bound(g, u.lo), hi = cell_of_bound(g, u.hi);
    if (!(lo < hi)) throw Error("empty or reversed frequency interval");
    for (std::uint64_t q = lo; q < hi; ++q) {
      if (used[q]) throw Error("frequency intervals overlap");
      used[q] = 1;
      m[q] = u.b;
    }
  }
  return m;
}

DiscreteSignal hl_maximal(const DiscreteSignal& g) {
  const GridSpec& gs = g.grid;
  DiscreteSignal out(gs);
  std::vector<double> mass(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mass[i] = std::abs(g[i]);
  // mass holds block sums of |g| over 2^j cells.
  for (int j = 0; j <= gs.bits(); ++j) {
    const std::size_t len = std::size_t{1} << j;
    for (std::size_t blk = 0; blk < g.size() / len; ++blk) {
      const double mean = mass[blk] / static_cast<double>(len);
      for (std::size_t c = blk * len; c < (blk + 1) * len; ++c) out[c] = std::max(out[c], mean);
    }
    for (std::size_t blk = 0; 2 * blk + 1 < g.size() / len; ++blk) mass[blk] = mass[2 * blk] + mass[2 * blk + 1];
  }
  return out;
}

std::vector<DyadicInterval> maximal_intervals(const GridSpec& g, std::span<const std::uint8_t> cells) {
  if (cells.size() != g.size()) throw Error("cell mask does not match the grid");
  const int bits = g.bits();
  // full[j][blk]: all cells of the block of 2^j cells lie in the set.
  std::vector<std::vector<std::uint8_t>> full(static_cast<std::size_t>(bits) + 1);
  full[0].assign(cells.begin(), cells.end());
  for (int j = 1; j <= bits; ++j) {
    const auto& lo = full[static_cast<std::size_t>(j) - 1];
    auto& cur = full[static_cast<std::size_t>(j)];
    cur.resize(lo.size() / 2);
    for (std::size_t blk = 0; blk < cur.size(); ++blk) cur[blk] = lo[2 * blk] && lo[2 * blk + 1];
  }
  std::vector<DyadicInterval> out;
  for (int j = bits; j >= 0; --j) {
    const auto& cur = full[static_cast<std::size_t>(j)];
    for (std::size_t blk = 0; blk < cur.size(); ++blk) {
      if (!cur[blk]) continue;
      if (j < bits && full[static_cast<std::size_t>(j) + 1][blk >> 1]) continue;
      out.push_back({j - g.b, blk});
    }
  }
  std::sort(out.begin(), out.end(), [](const DyadicInterval& x, const DyadicInterval& y) {
    return x.lower() < y.lower();
  });
  return out;
}

std::vector<Tile> cz_tiles(const CZResult& res, const DyadicInterval& I) {
  const DyadicRational end = DyadicRational::integer(std::uint64_t{1} << res.grid.b);
  std::set<DyadicInterval> ws;
  for (const DyadicRational& x : res.Lambda)
    if (x < end) ws.insert(DyadicInterval::containing(x, -I.scale));
  std::vector<Tile> out;
  for (const DyadicInterval& w : ws) out.push_back({I, w});
  return out;
}

CZResult cz_decompose(const DiscreteSignal& g, double lambda, std::span<const DyadicRational> xi,
                      std::span<const FreqInterval> ups, double B) {
  if (!(lambda > 0)) throw Error("lambda must be positive");
  if (!(B > 0)) throw Error("B must be positive");
  const GridSpec& gs = g.grid;
  interval_multiplier(gs, ups);  // validates the intervals
  CZResult res;
  res.grid = gs;
  res.lambda = lambda;
  res.B = B;
  res.n = static_cast<double>(xi.size() + ups.size());
  if (res.n == 0) throw Error("Xi and Upsilon are both empty");
  res.threshold = lambda / (std::sqrt(res.n) * B);
  res.Lambda.assign(xi.begin(), xi.end());
  for (const FreqInterval& u : ups) {
    res.Lambda.push_back(u.lo);
    res.Lambda.push_back(u.hi);
  }
  std::sort(res.Lambda.begin(), res.Lambda.end());
  res.Lambda.erase(std::unique(res.Lambda.begin(), res.Lambda.end()), res.Lambda.end());

  const DiscreteSignal M = hl_maximal(g);
  res.in_e.assign(g.size(), 0);
  std::size_t count = 0;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (M[c] > res.threshold) {
      res.in_e[c] = 1;
      ++count;
    }
  res.degenerate = count == g.size();
  res.intervals = maximal_intervals(gs, res.in_e);

  res.good0 = DiscreteSignal(gs);
  for (const DyadicInterval& I : res.intervals) {
    const std::uint64_t lo = I.index << (I.scale + gs.b), hi = (I.index + 1) << (I.scale + gs.b);
    for (const Tile& p : cz_tiles(res, I))
      for (std::uint64_t c = lo; c < hi; ++c) res.good0[c] += packet_term(g, p, c);
  }
  res.good = res.good0;
  res.bad = DiscreteSignal(gs);
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (res.in_e[c])
      res.bad[c] = g[c] - res.good0[c];
    else
      res.good[c] += g[c];
  }
  return res;
}

double cz_constant(const MultiplierFamily& fam, std::span<const FreqInterval> ups, double r) {
  const double n = static_cast<double>(fam.xi.size() + ups.size());
  if (n == 0) throw Error("Xi and Upsilon are both empty");
  double var = 0.0;
  for (const DyadicRational& x : fam.xi) {
    std::vector<double> seq;
    for (int k = fam.k_min; k <= fam.k_max; ++k) seq.push_back(fam.coeff(DyadicInterval::containing(x, k)));
    if (!seq.empty()) var = std::max(var, variation_norm(seq, r));
  }
  double bmax = 0.0;
  for (const FreqInterval& u : ups) bmax = std::max(bmax, std::abs(u.b));
  return (1.0 + std::log(n)) * std::pow(n, 0.5 - 1.0 / r) * var * bmax;
}

CZReport verify_bad_function(const CZResult& res, const DiscreteSignal& g, std::span<const FreqInterval> ups,
                             const MultiplierFamily& fam) {
  const GridSpec& gs = res.grid;
  CZReport rep;
  const auto fail = [&](bool& flag, const std::string& w) {
    if (flag && rep.witness.empty()) rep.witness = w;
    flag = false;
  };
  double gmax = 0.0;
  for (double v : g.values) gmax = std::max(gmax, std::abs(v));
  const double tol = 1e-10 * std::max(1.0, gmax);

  for (std::size_t c = 0; c < g.size(); ++c) {
    const double r = std::abs(res.good[c] + res.bad[c] - g[c]);
    rep.max_residual = std::max(rep.max_residual, r);
    if (r != 0.0) fail(rep.sum_exact, "good + bad differs from g at cell " + std::to_string(c));
    if (!res.in_e[c]) {
      if (res.bad[c] != 0.0) fail(rep.bad_support, "bad nonzero off E at cell " + std::to_string(c));
      if (std::abs(res.good[c] - res.good0[c]) > res.threshold)
        fail(rep.good_bound, "good - good0 above threshold at cell " + std::to_string(c));
    }
  }

  const DiscreteSignal h = apply_multiplier(interval_multiplier(gs, ups), res.bad);
  for (std::size_t c = 0; c < g.size(); ++c)
    if (!res.in_e[c] && std::abs(h[c]) > tol) fail(rep.h_support, "h nonzero off E at cell " + std::to_string(c));

  for (const DyadicInterval& I : res.intervals) {
    for (const Tile& p : cz_tiles(res, I)) {
      if (std::abs(coefficient(res.bad, p)) > tol) fail(rep.bad_cancellation, "bad against " + to_string(p));
      if (std::abs(coefficient(h, p)) > tol) fail(rep.h_cancellation, "h against " + to_string(p));
      if (!res.degenerate) {
        const double bound = 2.0 * std::sqrt(std::ldexp(1.0, I.scale)) * res.threshold;
        if (std::abs(coefficient(g, p)) > bound * (1.0 + 1e-12))
          fail(rep.coefficient_bound, "coefficient bound at " + to_string(p));
      }
    }
  }

  for (int k = fam.k_min; k <= fam.k_max; ++k) {
    const DiscreteSignal y = apply_multiplier(dk_multiplier(fam, k), h);
    for (std::size_t c = 0; c < g.size(); ++c)
      if (!res.in_e[c] && std::abs(y[c]) > tol)
        fail(rep.dk_support, "D_k h nonzero off E, k=" + std::to_string(k) + " cell=" + std::to_string(c));
  }

  double measure = 0.0;
  for (std::uint8_t e : res.in_e) measure += e;
  measure *= gs.time_weight();
  if (measure > lp_norm(g, 1.0) / res.threshold * (1.0 + 1e-12))
    fail(rep.measure_bound, "|E| above the weak-type bound");
  return rep;
}

}  // namespace walshpp
