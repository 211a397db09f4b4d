#include "walshpp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "walshpp/czdecomp.hpp"
#include "walshpp/kernels.hpp"
#include "walshpp/multnorm.hpp"
#include "walshpp/partition.hpp"
#include "walshpp/phaseplane.hpp"
#include "walshpp/trees.hpp"
#include "walshpp/varnorm.hpp"

namespace walshpp::verify {

namespace {

using Suite = std::function<void(SuiteResult&, const Options&)>;

int count(const Options& opt, int full) {
  return std::max(1, static_cast<int>(std::lround(full * opt.scale)));
}

std::mt19937_64 rng_for(const Options& opt, const std::string& name) {
  std::seed_seq seq(name.begin(), name.end());
  std::mt19937_64 base(seq);
  return std::mt19937_64(base() ^ opt.seed);
}

GridSpec small_grid(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(1, 3);
  const int a = d(rng);
  return {a, d(rng)};
}

DiscreteSignal dyadic_signal(const GridSpec& g, std::mt19937_64& rng, int den = 16) {
  std::uniform_int_distribution<int> v(-den, den);
  DiscreteSignal f(g);
  for (double& x : f.values) x = v(rng) / static_cast<double>(den);
  return f;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(std::span<const double> x, std::span<const double> y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

std::vector<Tile> all_tiles(const GridSpec& g) {
  std::vector<Tile> out;
  for (int k = -g.b; k <= g.a; ++k)
    for (std::uint64_t t = 0; t < (std::uint64_t{1} << (g.a - k)); ++t)
      for (std::uint64_t w = 0; w < (std::uint64_t{1} << (g.b + k)); ++w) out.push_back({{k, t}, {-k, w}});
  return out;
}

void transform_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "transform");
  std::normal_distribution<double> normal;
  const int n = count(opt, 1000);
  for (int bits = 1; bits <= 12; ++bits) {
    const GridSpec g(bits / 2, bits - bits / 2);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      DiscreteSignal f(g);
      for (double& v : f.values) v = normal(rng);
      const SpectralSignal F = walsh_transform(f);
      const DiscreteSignal back = inverse_transform(F);
      const double scale = max_abs(f.values);
      worst = std::max(worst, max_diff(back.values, f.values) / scale);
      const double l2 = lp_norm(f, 2.0);
      worst = std::max(worst, std::abs(lp_norm(F, 2.0) - l2) / l2);
    }
    res.record(worst <= 1e-10, "involution/Plancherel error " + std::to_string(worst) + " on 2^" + std::to_string(bits));
  }
  // Parallel and serial kernels against the direct sum.
  for (int bits = 1; bits <= 13; ++bits) {
    std::vector<double> v(std::size_t{1} << bits);
    for (double& x : v) x = std::uniform_int_distribution<int>(-8, 8)(rng);
    std::vector<double> s = v, p = v;
    kernels::wht_serial(s);
    kernels::wht_parallel(p);
    const std::vector<double> d = kernels::wht_direct(v);
    res.record(s == d && p == d, "kernel mismatch on 2^" + std::to_string(bits));
  }
}

void indicator_suite(SuiteResult& res, const Options&) {
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b) {
      if (a + b == 0) continue;
      const GridSpec g(a, b);
      DiscreteSignal f(g);
      for (std::size_t c = 0; c < (std::size_t{1} << b); ++c) f[c] = 1.0;
      const SpectralSignal F = walsh_transform(f);
      bool ok = true;
      for (std::size_t q = 0; q < g.size(); ++q) ok = ok && F[q] == (q < (std::size_t{1} << a) ? 1.0 : 0.0);
      res.record(ok, "transform of 1_[0,1) on grid a=" + std::to_string(a) + " b=" + std::to_string(b));
    }
}

void wavepacket_suite(SuiteResult& res, const Options&) {
  const GridSpec g(3, 3);
  const double r2 = std::sqrt(2.0);
  for (const Bitile& p : BitileSet::all(g).members()) {
    const Subtiles st = subtiles(p);
    bool exact = true;
    for (std::uint64_t c = 0; c < g.size(); ++c) {
      const int s = packet_sign(st.s, g, c), d = packet_sign(st.d, g, c);
      exact = exact && packet_sign(st.u, g, c) == s - d && packet_sign(st.l, g, c) == s + d;
    }
    res.record(exact, "sign relations at " + to_string(p));
    const DiscreteSignal u = wave_packet(st.u, g), l = wave_packet(st.l, g);
    const DiscreteSignal s = wave_packet(st.s, g), d = wave_packet(st.d, g);
    double err = 0.0;
    for (std::uint64_t c = 0; c < g.size(); ++c) {
      err = std::max(err, std::abs(u[c] - (s[c] - d[c]) / r2));
      err = std::max(err, std::abs(l[c] - (s[c] + d[c]) / r2));
    }
    res.record(err <= 1e-12, "float relations at " + to_string(p));
  }
  const std::vector<Tile> tiles = all_tiles(g);
  std::vector<DiscreteSignal> packets;
  for (const Tile& t : tiles) {
    packets.push_back(wave_packet(t, g));
    const DiscreteSignal alt = wave_packet_via_transform(t, g);
    res.record(max_diff(packets.back().values, alt.values) <= 1e-12, "two packet routes at " + to_string(t));
    res.record(std::abs(inner(packets.back(), packets.back()) - 1.0) <= 1e-12, "unit norm at " + to_string(t));
  }
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (std::size_t j = i + 1; j < tiles.size(); ++j) {
      if (tiles[i].intersects(tiles[j])) continue;
      long dot = 0;
      for (std::uint64_t c = 0; c < g.size(); ++c)
        dot += packet_sign(tiles[i], g, c) * packet_sign(tiles[j], g, c);
      const double fl = inner(packets[i], packets[j]);
      res.record(dot == 0 && std::abs(fl) <= 1e-12, "orthogonality " + to_string(tiles[i]) + " " + to_string(tiles[j]));
    }
}

void projection_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "projections");
  const int n = count(opt, 100);
  int done = 0;
  for (int attempt = 0; done < n && attempt < 100 * n; ++attempt) {
    const GridSpec g = small_grid(rng);
    const BitileSet big = random_convex_set(g, rng);
    BitileSet small = big;
    small &= random_convex_set(g, rng);
    if (small.empty()) continue;
    std::vector<Tile> cb, cs, cs_time;
    try {
      cb = tile_cover(big);
      cs = tile_cover(small);
      cs_time = tile_cover(small, SplitOrder::time_first);
    } catch (const Error&) {
      continue;  // region without a disjoint tile cover
    }
    ++done;
    const DiscreteSignal f = dyadic_signal(g, rng);
    const DiscreteSignal ps = project(cs, f), pb = project(cb, f);
    res.record(max_diff(ps.values, project(cs_time, f).values) <= 1e-12, "cover independence");
    res.record(max_diff(project(cs, pb).values, ps.values) <= 1e-12, "Pi_S Pi_S' = Pi_S");
    res.record(max_diff(project(cb, ps).values, ps.values) <= 1e-12, "Pi_S' Pi_S = Pi_S");
    res.record(max_diff(project(cs, ps).values, ps.values) <= 1e-12, "idempotence");
  }
  res.record(done == n, "generated " + std::to_string(done) + " nested regions of " + std::to_string(n));
}

void sorting_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "sorting");
  const int n = count(opt, 1000);
  for (int i = 0; i < n; ++i) {
    const GridSpec g = small_grid(rng);
    const BitileSet p0 = random_convex_set(g, rng);
    const std::vector<Tree> trees = random_maximal_trees(p0, 1 + rng() % 5, rng);
    const SortedForest out = proper_sort(trees);
    const ConditionReport a = check_sorted_forest(out, trees);
    const ConditionReport b = check_properly_sorted(out.l_trees);
    res.record(a.ok, "sorted forest: " + a.condition + " " + a.witness);
    res.record(b.ok, "properly sorted: " + b.condition + " " + b.witness);
  }
}

void partition_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "partitions");
  const int n = count(opt, 1000);
  for (int i = 0; i < n; ++i) {
    const GridSpec g = small_grid(rng);
    const Stack u = random_u_stack(g, 1 + rng() % 4, rng);
    const ConditionReport ru = check_partition(partition_u(u.x, u.trees), u.trees);
    res.record(ru.ok, "u partition: " + ru.condition + " " + ru.witness);
    const Stack l = random_l_stack(g, 1 + rng() % 4, rng);
    if (l.trees.empty()) continue;
    const ConditionReport rl = check_partition(partition_l(l.x, l.trees), l.trees);
    res.record(rl.ok, "l partition: " + rl.condition + " " + rl.witness);
  }
}

void absorb(SuiteResult& res, const IdentityReport& r, const std::string& what) {
  res.checked += r.checked;
  res.failures += r.failures;
  if (r.failures && res.first_failure.empty()) res.first_failure = what + ": " + r.first_failure;
}

void truncation_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "truncation");
  const int n = count(opt, 1000);
  for (int i = 0; i < n; ++i) {
    const GridSpec g = small_grid(rng);
    const std::vector<double> c = random_coefficients(g, rng);
    const Stack u = random_u_stack(g, 1 + rng() % 4, rng);
    const DiscreteSignal f = dyadic_signal(g, rng);
    for (const Tree& t : u.trees) {
      absorb(res, tree_truncation_identities(t, c), "u-tree");
      for (int k = -g.b; k <= g.a; ++k) {
        const TruncationSides s = tree_truncation_identity(t, f, k);
        res.record(s.lhs.values == s.rhs.values, "martingale form at k=" + std::to_string(k));
      }
    }
    absorb(res, u_stack_truncation_identities(u.trees, c), "u-stack");
    const Stack l = random_l_stack(g, 1 + rng() % 4, rng);
    for (const Tree& t : l.trees) absorb(res, tree_truncation_identities(t, c), "l-tree");
    if (!l.trees.empty()) absorb(res, l_stack_truncation_identities(l.trees, c), "l-stack");
  }
}

void vdp_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "vdp");
  const int n = count(opt, 10000);
  const double rs[] = {1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
  for (int i = 0; i < n; ++i) {
    std::vector<double> seq(1 + rng() % 12);
    for (double& v : seq) v = std::uniform_int_distribution<int>(-16, 16)(rng) / 8.0;
    const double r = rs[rng() % 6];
    res.record(variation_norm(seq, r) == variation_norm_brute_force(seq, r), "DP against enumeration");
  }
}

std::vector<Point> random_points(std::mt19937_64& rng) {
  const std::size_t d = 1 + rng() % 4, len = 1 + rng() % 24;
  std::vector<Point> c(len, Point(d));
  std::normal_distribution<double> normal;
  for (Point& p : c)
    for (double& v : p) v = normal(rng);
  return c;
}

void jump_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "jumps");
  const int n = count(opt, 1000);
  const double rs[] = {1.0, 2.0, 3.0};
  for (int i = 0; i < n; ++i) {
    const std::vector<Point> c = random_points(rng);
    for (double r : rs) {
      const double v = variation_norm(c, r);
      for (double frac : {0.05, 0.2, 0.5, 1.0}) {
        const double lambda = frac * (v > 0 ? v : 1.0);
        const JumpCover jc = jump_cover(c, lambda);
        const double lhs = lambda * std::pow(static_cast<double>(jc.count() - 1), 1.0 / r);
        res.record(lhs <= v * (1.0 + 1e-12), "jump bound, r=" + std::to_string(r));
      }
    }
    if (c.size() < 2) continue;
    const ParentMap pm = parent_map(c, default_lambda0(c));
    const ParentMapCheck chk = check_parent_map(c, pm);
    res.record(chk.telescoping, "parent map telescoping");
    res.record(chk.increments, "parent map increments");
    res.record(chk.monotone, "parent map monotone");
    res.record(chk.terminal, "parent map terminal level");
  }
}

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

void interval_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "intervals");
  const int n = count(opt, 1000);
  const double rs[] = {1.0, 1.5, 2.0, 3.0};
  for (int i = 0; i < n; ++i) {
    const StepFunction m = random_step(rng);
    const double r = rs[rng() % 4];
    const StepDecomposition d = interval_decomposition(m, r, 10);
    const DecompositionCheck c = check_decomposition(m, d);
    res.record(c.count_ok, "level count");
    res.record(c.coefficient_ok, "coefficient bound, worst ratio " + std::to_string(c.worst_coefficient_ratio));
    res.record(c.disjoint_ok, "disjoint level sets");
    res.record(c.tail_ok, "geometric tail, worst ratio " + std::to_string(c.worst_tail_ratio));
  }
}

void cz_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "cz");
  const int n = count(opt, 1000);
  for (int i = 0; i < n; ++i) {
    const GridSpec g(4, 4);
    const DiscreteSignal f = dyadic_signal(g, rng);
    std::vector<DyadicRational> xi;
    for (std::size_t j = 0, nx = 1 + rng() % 3; j < nx; ++j) xi.push_back(g.freq_point(rng() % g.size()));
    std::sort(xi.begin(), xi.end());
    xi.erase(std::unique(xi.begin(), xi.end()), xi.end());
    std::vector<FreqInterval> ups;
    std::uint64_t at = rng() % 64;
    for (std::size_t j = 0, nu = rng() % 3; j < nu && at < g.size(); ++j) {
      const std::uint64_t hi = std::min<std::uint64_t>(g.size(), at + 1 + rng() % 64);
      ups.push_back({g.freq_point(at), hi == g.size() ? DyadicRational::integer(std::uint64_t{1} << g.b)
                                                      : g.freq_point(hi),
                     std::uniform_int_distribution<int>(-4, 4)(rng) / 4.0});
      at = hi + rng() % 32;
    }
    MultiplierFamily fam{g, xi, {}, 1.0, -g.a, g.b};
    const double nn = static_cast<double>(xi.size() + ups.size());
    const double tau = std::uniform_real_distribution<double>(0.05, 1.0)(rng) * max_abs(f.values);
    if (!(tau > 0)) continue;
    const double B = 1.0;
    const CZResult r = cz_decompose(f, tau * std::sqrt(nn) * B, xi, ups, B);
    const CZReport rep = verify_bad_function(r, f, ups, fam);
    res.record(rep.ok(), "cz: " + rep.witness);
  }
}

void m2_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "m2");
  const int n = count(opt, 100);
  for (int i = 0; i < n; ++i) {
    const GridSpec g = small_grid(rng);
    Multiplier m(g.size());
    for (double& v : m) v = std::uniform_int_distribution<int>(-16, 16)(rng) / 16.0;
    const double exact = m2_norm(m);
    const double est = m2_power_iteration(g, m, 2000, rng());
    res.record(std::abs(est - exact) <= 1e-6, "power iteration against sup|m|");
    const double qs[] = {1.0, 1.25, 1.5, 2.0, 3.0, 6.0, std::numeric_limits<double>::infinity()};
    const double q = qs[rng() % 7];
    const EstimateBudget budget{2, 40, rng()};
    const NormEstimate e = mq_norm_estimate(g, m, q, budget);
    res.record(e.lower <= e.upper, "M^q bracket");
    res.record(std::abs(mq_ratio(m, e.witness, q) - e.lower) <= 1e-9 * std::max(1.0, e.lower), "M^q witness");
    if (i % 10 == 0) {
      const std::vector<Multiplier> fam{m, Multiplier(g.size(), 0.5), Multiplier(m.rbegin(), m.rend())};
      const EstimateBudget small{1, 10, rng()};
      const NormEstimate s = mqstar_norm_estimate(g, fam, q, small);
      res.record(s.lower <= s.upper && std::abs(mqstar_ratio(fam, s.witness, q) - s.lower) <= 1e-9 * std::max(1.0, s.lower),
                 "M^{q,*} witness");
      const NormEstimate v = mqs_norm_estimate(g, fam, q, 3.0, small);
      res.record(v.lower <= v.upper && std::abs(mqs_ratio(fam, v.witness, q, 3.0) - v.lower) <= 1e-9 * std::max(1.0, v.lower),
                 "M^{q,s} witness");
    }
  }
}

void stack_suite(SuiteResult& res, const Options& opt) {
  auto rng = rng_for(opt, "stack");
  const int n = count(opt, 10000);
  const double rs[] = {1.0, 1.5, 2.0, 3.0, 4.0};
  for (int i = 0; i < n; ++i) {
    const GridSpec g = small_grid(rng);
    const std::vector<double> c = random_coefficients(g, rng);
    const double r = rs[rng() % 5];
    const Stack st = (i % 2 == 0) ? random_u_stack(g, 1 + rng() % 4, rng) : random_l_stack(g, 1 + rng() % 4, rng);
    if (st.trees.empty()) continue;
    const StackRatio s = stack_variation_ratio(st.trees, c, r);
    res.record(s.ok, "stack variation ratio " + std::to_string(s.ratio));
    const StackRatio a = truncated_stack_ratio(st.trees, c, r, TruncMode::sup_k_var_xi);
    res.record(a.ok, "truncated sup_k V_xi ratio " + std::to_string(a.ratio));
    const StackRatio b = truncated_stack_ratio(st.trees, c, r, TruncMode::sup_xi_var_k);
    res.record(b.ok, "truncated sup_xi V_k ratio " + std::to_string(b.ratio));
  }
}

const std::vector<std::pair<std::string, Suite>>& registry() {
  static const std::vector<std::pair<std::string, Suite>> r{
      {"transform", transform_suite},   {"indicator", indicator_suite}, {"wavepackets", wavepacket_suite},
      {"projections", projection_suite}, {"sorting", sorting_suite},     {"partitions", partition_suite},
      {"truncation", truncation_suite}, {"vdp", vdp_suite},             {"jumps", jump_suite},
      {"intervals", interval_suite},    {"cz", cz_suite},               {"m2", m2_suite},
      {"stack", stack_suite},
  };
  return r;
}

}  // namespace

void SuiteResult::record(bool pass, const std::string& what) {
  ++checked;
  if (!pass) {
    if (failures == 0) first_failure = what;
    ++failures;
  }
}

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

SuiteResult run_suite(const std::string& name, const Options& opt) {
  for (const auto& [n, fn] : registry()) {
    if (n != name) continue;
    SuiteResult res;
    res.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(res, opt);
    } catch (const std::exception& e) {
      res.record(false, std::string("exception: ") + e.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }
  throw Error("unknown verify suite '" + name + "'");
}

std::vector<SuiteResult> run_all(const Options& opt) {
  std::vector<SuiteResult> out;
  for (const std::string& n : suite_names()) out.push_back(run_suite(n, opt));
  return out;
}

bool preflight() {
  static const bool ok = [] {
    Options o;
    o.scale = 0.01;
    for (const SuiteResult& r : run_all(o))
      if (!r.ok()) return false;
    return true;
  }();
  return ok;
}

}  // namespace walshpp::verify
