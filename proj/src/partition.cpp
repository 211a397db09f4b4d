#include "walshpp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "walshpp/multnorm.hpp"
#include "walshpp/varnorm.hpp"

namespace walshpp {

namespace {

struct Cells {
  std::uint64_t lo, hi;
  bool has(std::uint64_t q) const { return lo <= q && q < hi; }
};

Cells cells_of(const GridSpec& g, const DyadicInterval& w) {
  const int sh = w.scale + g.a;
  return {w.index << sh, (w.index + 1) << sh};
}

bool time_has(const GridSpec& g, const DyadicInterval& I, std::uint64_t x) {
  return (x >> (I.scale + g.b)) == I.index;
}

// Dyadic interval of the given scale containing xi, in cells (scale >= -a).
Cells around(const GridSpec& g, std::uint64_t cell, int scale) {
  const int sh = scale + g.a;
  return {(cell >> sh) << sh, ((cell >> sh) + 1) << sh};
}

const GridSpec& common_grid(std::span<const Tree> trees) {
  if (trees.empty()) throw Error("empty forest");
  const GridSpec& g = trees.front().grid();
  for (const Tree& t : trees)
    if (!(t.grid() == g)) throw Error("trees on different grids");
  return g;
}

BitileSet forest_union(std::span<const Tree> trees) {
  BitileSet u(common_grid(trees));
  for (const Tree& t : trees) u |= t.members;
  return u;
}

BitileSet restrict_to_time(const BitileSet& s, std::uint64_t x) {
  BitileSet out(s.grid());
  for (const Bitile& p : s.members())
    if (time_has(s.grid(), p.time, x)) out.insert(p);
  return out;
}

void require_through_x(const Tree& t, std::uint64_t x, std::size_t i) {
  for (const Bitile& p : t.members.members())
    if (!time_has(t.grid(), p.time, x))
      throw Error("tree " + std::to_string(i) + ": member " + to_string(p) + " misses time cell " +
                  std::to_string(x));
}

template <class Keep>
std::vector<double> upper_sum_if(const BitileSet& s, std::span<const double> c, Keep keep) {
  if (c.size() != s.capacity()) throw Error("coefficient count does not match the grid");
  const GridSpec& g = s.grid();
  std::vector<double> m(g.size(), 0.0);
  for (const Bitile& p : s.members()) {
    if (!keep(p.time.scale)) continue;
    const double v = c[s.id(p)];
    if (v == 0.0) continue;
    const Cells w = cells_of(g, p.upper().freq);
    for (std::uint64_t q = w.lo; q < w.hi; ++q) m[q] += v;
  }
  return m;
}

double ratio_of(double lhs, double rhs) {
  if (rhs > 0) return lhs / rhs;
  return lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

// k_xi = sup{k : xi in the dyadic interval of length 2^-k about xi_T}.
std::optional<int> k_xi(const DyadicRational& xi, const DyadicRational& top) {
  if (xi == top) return std::nullopt;
  return -bxor(xi, top).top_digit() - 1;
}

}  // namespace

std::size_t FreqPartition::owner(std::uint64_t cell) const {
  for (const FreqPiece& p : pieces)
    if (p.lo <= cell && cell < p.hi) return p.tree;
  throw Error("frequency cell outside the partition");
}

FreqPartition partition_u(std::uint64_t x, std::span<const Tree> trees) {
  const GridSpec& g = common_grid(trees);
  if (x >= g.size()) throw Error("time cell out of range");
  const BitileSet all = forest_union(trees);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const Tree& t = trees[i];
    if (t.members.empty()) continue;
    require_through_x(t, x, i);
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.u_overlapping)
      throw Error("tree " + std::to_string(i) + " is not a u-overlapping tree");
    if (!(maximal_tree(all, t.top_freq, t.top_interval, Overlap::upper).members == t.members))
      throw Error("tree " + std::to_string(i) + " is not td-maximal among u-overlapping trees");
  }

  std::vector<bool> alive(trees.size(), true);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    BitileSet others(g);
    for (std::size_t j = 0; j < trees.size(); ++j)
      if (j != i && alive[j]) others |= trees[j].members;
    if (trees[i].members.is_subset_of(others)) alive[i] = false;
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < trees.size(); ++i)
    if (alive[i]) order.push_back(i);

  FreqPartition part{g, {}};
  for (std::size_t i = 0; i < trees.size(); ++i) part.pieces.push_back({i, 0, 0});
  if (order.empty()) {
    part.pieces[0].hi = g.size();
    return part;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return trees[i].top_freq < trees[j].top_freq; });
  for (std::size_t n = 1; n < order.size(); ++n)
    if (trees[order[n]].top_freq == trees[order[n - 1]].top_freq)
      throw Error("trees " + std::to_string(order[n - 1]) + " and " + std::to_string(order[n]) +
                  " share a top frequency after pruning");

  std::vector<std::uint64_t> lo(order.size());
  BitileSet earlier(g);
  for (std::size_t n = 0; n < order.size(); ++n) {
    BitileSet fresh = trees[order[n]].members;
    fresh -= earlier;
    const Bitile pmin = fresh.members().front();
    lo[n] = cells_of(g, pmin.upper().freq).lo;
    if (n > 0 && !(lo[n] > lo[n - 1]))
      throw Error("left endpoints do not increase at tree " + std::to_string(order[n]));
    earlier |= trees[order[n]].members;
  }
  for (std::size_t n = 0; n < order.size(); ++n) {
    FreqPiece& p = part.pieces[order[n]];
    p.lo = n == 0 ? 0 : lo[n];
    p.hi = n + 1 == order.size() ? g.size() : lo[n + 1];
  }
  return part;
}

FreqPartition partition_l(std::uint64_t x, std::span<const Tree> trees) {
  const GridSpec& g = common_grid(trees);
  if (x >= g.size()) throw Error("time cell out of range");
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const Tree& t = trees[i];
    if (t.members.empty()) continue;
    require_through_x(t, x, i);
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.l_overlapping)
      throw Error("tree " + std::to_string(i) + " is not an l-overlapping tree");
  }
  const ConditionReport sorted = check_properly_sorted(trees);
  if (!sorted.ok) throw Error("forest not properly sorted: " + sorted.condition + ": " + sorted.witness);

  struct Span {
    std::size_t tree;
    CellRange r;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const CellRange r = upper_union(trees[i].members, x);
    if (r.lo == r.hi) continue;
    if (!r.interval) throw Error("upper union of tree " + std::to_string(i) + " is not an interval");
    spans.push_back({i, r});
  }
  std::sort(spans.begin(), spans.end(), [](const Span& u, const Span& v) { return u.r.lo < v.r.lo; });
  for (std::size_t n = 1; n < spans.size(); ++n)
    if (spans[n].r.lo < spans[n - 1].r.hi)
      throw Error("upper unions of trees " + std::to_string(spans[n - 1].tree) + " and " +
                  std::to_string(spans[n].tree) + " overlap");

  FreqPartition part{g, {}};
  for (std::size_t i = 0; i < trees.size(); ++i) part.pieces.push_back({i, 0, 0});
  if (spans.empty()) {
    part.pieces[0].hi = g.size();
    return part;
  }
  for (std::size_t n = 0; n < spans.size(); ++n) {
    FreqPiece& p = part.pieces[spans[n].tree];
    p.lo = n == 0 ? 0 : spans[n].r.lo;
    p.hi = n + 1 == spans.size() ? g.size() : spans[n + 1].r.lo;
  }
  return part;
}

ConditionReport check_partition(const FreqPartition& part, std::span<const Tree> trees) {
  const GridSpec& g = common_grid(trees);
  if (!(part.grid == g)) return ConditionReport::fail("grid", "partition and forest grids differ");
  if (part.pieces.size() != trees.size()) return ConditionReport::fail("pieces", "one piece per tree expected");
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(g.size(), none);
  for (const FreqPiece& p : part.pieces) {
    if (p.tree >= trees.size() || p.lo > p.hi || p.hi > g.size())
      return ConditionReport::fail("pieces", "malformed piece for tree " + std::to_string(p.tree));
    for (std::uint64_t q = p.lo; q < p.hi; ++q) {
      if (owner[q] != none)
        return ConditionReport::fail("disjoint", "cell " + std::to_string(q) + " assigned twice");
      owner[q] = p.tree;
    }
  }
  for (std::uint64_t q = 0; q < g.size(); ++q)
    if (owner[q] == none) return ConditionReport::fail("cover", "cell " + std::to_string(q) + " unassigned");
  const BitileSet all = forest_union(trees);
  for (const Bitile& p : all.members()) {
    const Cells w = cells_of(g, p.upper().freq);
    for (std::uint64_t q = w.lo; q < w.hi; ++q)
      if (!trees[owner[q]].members.contains(p))
        return ConditionReport::fail("containment", "cell " + std::to_string(q) + " lies in the upper tile of " +
                                                        to_string(p) + " outside tree " +
                                                        std::to_string(owner[q]));
  }
  return ConditionReport::pass();
}

std::vector<double> upper_sum(const BitileSet& s, std::span<const double> c, int k) {
  return upper_sum_if(s, c, [k](int scale) { return scale < k; });
}

std::vector<double> upper_sum(const BitileSet& s, std::span<const double> c) {
  return upper_sum(s, c, s.grid().a + 1);
}

double cell_variation_norm(std::span<const double> m, double r) {
  std::vector<double> v;
  v.reserve(m.size() + 1);
  for (double y : m)
    if (v.empty() || v.back() != y) v.push_back(y);
  if (v.empty() || v.back() != 0.0) v.push_back(0.0);
  return variation_norm(v, r);
}

StackRatio stack_variation_ratio(std::span<const Tree> trees, std::span<const double> c, double r) {
  StackRatio out;
  out.constant = 4.0;
  out.lhs = cell_variation_norm(upper_sum(forest_union(trees), c), r);
  double sup = 0.0;
  for (const Tree& t : trees) sup = std::max(sup, cell_variation_norm(upper_sum(t.members, c), r));
  out.rhs = std::pow(static_cast<double>(trees.size()), 1.0 / r) * sup;
  out.ratio = ratio_of(out.lhs, out.rhs);
  out.ok = out.lhs <= out.constant * out.rhs;
  return out;
}

StackRatio truncated_stack_ratio(std::span<const Tree> trees, std::span<const double> c, double r,
                                 TruncMode mode) {
  const GridSpec& g = common_grid(trees);
  const BitileSet all = forest_union(trees);
  double sup = 0.0;
  for (const Tree& t : trees) sup = std::max(sup, cell_variation_norm(upper_sum(t.members, c), r));
  StackRatio out;
  const int k0 = min_bitile_scale(g), k1 = g.a + 1;
  if (mode == TruncMode::sup_k_var_xi) {
    out.constant = 4.0 * (1.0 + std::pow(2.0, 1.0 / r));
    for (int k = k0; k <= k1; ++k) out.lhs = std::max(out.lhs, cell_variation_norm(upper_sum(all, c, k), r));
    out.rhs = std::pow(static_cast<double>(trees.size()), 1.0 / r) * sup;
  } else {
    out.constant = 2.0;
    std::vector<std::vector<double>> byk;
    for (int k = k0; k <= k1; ++k) byk.push_back(upper_sum(all, c, k));
    std::vector<double> seq(byk.size());
    for (std::uint64_t q = 0; q < g.size(); ++q) {
      for (std::size_t i = 0; i < byk.size(); ++i) seq[i] = byk[i][q];
      out.lhs = std::max(out.lhs, variation_norm(seq, r));
    }
    out.rhs = sup;
  }
  out.ratio = ratio_of(out.lhs, out.rhs);
  out.ok = out.lhs <= out.constant * out.rhs;
  return out;
}

void IdentityReport::record(bool pass, const std::string& what) {
  ++checked;
  if (pass) return;
  if (failures == 0) first_failure = what;
  ++failures;
}

IdentityReport& IdentityReport::operator+=(const IdentityReport& o) {
  if (failures == 0 && o.failures > 0) first_failure = o.first_failure;
  checked += o.checked;
  failures += o.failures;
  return *this;
}

IdentityReport tree_truncation_identities(const Tree& t, std::span<const double> c) {
  IdentityReport rep;
  if (t.members.empty()) return rep;
  const GridSpec& g = t.grid();
  const TreeKind kind = classify(t);
  if (!kind.is_tree || (!kind.u_overlapping && !kind.l_overlapping))
    throw Error("truncation identities need a u- or l-overlapping tree");
  const std::uint64_t qt = g.freq_cell(t.top_freq);
  const int k0 = min_bitile_scale(g), k1 = g.a + 1;
  const std::vector<double> full = upper_sum(t.members, c);
  std::vector<std::vector<double>> tr;
  for (int k = k0; k <= k1; ++k) tr.push_back(upper_sum(t.members, c, k));
  const auto trunc = [&](int k) -> const std::vector<double>& { return tr[static_cast<std::size_t>(k - k0)]; };

  // Sums of c_P over members with |I_P| < 2^k, in the order upper_sum adds them.
  const std::vector<Bitile> mem = t.members.members();
  const auto below = [&](int k) {
    double s = 0.0;
    for (const Bitile& p : mem)
      if (p.time.scale < k && c[t.members.id(p)] != 0.0) s += c[t.members.id(p)];
    return s;
  };
  const auto tag = [](const char* name, int k, std::uint64_t q) {
    return std::string(name) + " k=" + std::to_string(k) + " cell=" + std::to_string(q);
  };

  if (kind.u_overlapping) {
    for (int k = k0; k <= g.a; ++k) {
      const Cells wk = around(g, qt, -k), wk1 = around(g, qt, 1 - k);
      const std::uint64_t sib = wk.lo == wk1.lo ? wk.hi : wk1.lo;
      for (std::uint64_t q = 0; q < g.size(); ++q) {
        if (!wk.has(q))
          rep.record(trunc(k)[q] == full[q], tag("kredundant", k, q));
        else
          rep.record(trunc(k)[q] == full[sib], tag("substitution", k, q));
      }
    }
    for (std::uint64_t q = 0; q < g.size(); ++q) {
      const std::optional<int> kx = k_xi(g.freq_point(q), t.top_freq);
      for (int k = k0; k <= k1; ++k) {
        const bool early = !kx || k <= *kx + 1;
        rep.record(trunc(k)[q] == (early ? below(k) : below(*kx + 1)), tag("k_xi form", k, q));
      }
    }
    std::optional<DyadicRational> prev;
    for (int k = k0; k <= k1; ++k) {
      DyadicRational xk = t.top_freq;
      for (int s = std::min(1 - k, g.b); s - 1 >= t.top_freq.exponent(); --s) {
        if (t.top_freq.digit(s - 1) == 1) {
          xk = DyadicRational(t.top_freq.floor_div_pow2(s), s);
          break;
        }
      }
      rep.record(below(k) == full[g.freq_cell(xk)], tag("ktoxi", k, g.freq_cell(xk)));
      if (prev) rep.record(*prev <= xk, tag("ktoxi monotone", k, g.freq_cell(xk)));
      prev = xk;
    }
  } else {
    for (int k = k0; k <= k1; ++k) {
      const Cells w = around(g, qt, 1 - k);
      for (std::uint64_t q = 0; q < g.size(); ++q) {
        if (!w.has(q))
          rep.record(trunc(k)[q] == full[q], tag("kredundant", k, q));
        else
          rep.record(trunc(k)[q] == 0.0, tag("kzero", k, q));
      }
    }
    for (std::uint64_t q = 0; q < g.size(); ++q) {
      const std::optional<int> kx = k_xi(g.freq_point(q), t.top_freq);
      for (int k = k0; k <= k1; ++k) {
        const bool late = kx && k > *kx + 1;
        rep.record(trunc(k)[q] == (late ? full[q] : 0.0), tag("k_xi form", k, q));
      }
    }
  }
  return rep;
}

namespace {

// Cells of the intervals of length 2^-k meeting the top frequencies.
std::vector<std::uint8_t> critical_mask(const GridSpec& g, std::span<const Tree> trees, int k) {
  std::vector<std::uint8_t> w(g.size(), 0);
  for (const Tree& t : trees) {
    if (t.members.empty()) continue;
    const Cells c = around(g, g.freq_cell(t.top_freq), -k);
    for (std::uint64_t q = c.lo; q < c.hi; ++q) w[q] = 1;
  }
  return w;
}

}  // namespace

IdentityReport u_stack_truncation_identities(std::span<const Tree> trees, std::span<const double> c) {
  const GridSpec& g = common_grid(trees);
  for (const Tree& t : trees) {
    if (t.members.empty()) continue;
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.u_overlapping) throw Error("u-stack identities need u-overlapping trees");
  }
  const BitileSet all = forest_union(trees);
  const std::vector<double> full = upper_sum(all, c);
  MultiplierFamily fam{g, {}, {}, 1.0, -g.a, g.b};
  for (const Tree& t : trees)
    if (!t.members.empty()) fam.xi.push_back(t.top_freq);
  IdentityReport rep;
  const auto tag = [](const char* name, int k, std::uint64_t q) {
    return std::string(name) + " k=" + std::to_string(k) + " cell=" + std::to_string(q);
  };
  for (int k = min_bitile_scale(g); k <= g.a; ++k) {
    const std::vector<double> tr = upper_sum(all, c, k);
    const std::vector<std::uint8_t> crit = critical_mask(g, trees, k);
    const int sh = g.a - k;  // cells per interval of length 2^-k is 2^sh
    std::vector<double> aw(std::size_t{1} << (g.b + k), 0.0);
    for (const Bitile& p : all.members()) {
      if (p.time.scale >= k || c[all.id(p)] == 0.0) continue;
      const Cells u = cells_of(g, p.upper().freq);
      for (std::uint64_t w = u.lo >> sh; w < (u.hi >> sh); ++w) aw[w] += c[all.id(p)];
    }
    const Multiplier d = dk_multiplier(fam, -k);
    for (std::uint64_t q = 0; q < g.size(); ++q) {
      const double one = crit[q] ? 1.0 : 0.0;
      const double a = aw[q >> sh];
      if (!crit[q]) rep.record(tr[q] == full[q], tag("off critical set", k, q));
      rep.record(tr[q] == a, tag("interval value", k, q));
      rep.record(tr[q] == (1.0 - one) * full[q] + one * a, tag("combined form", k, q));
      rep.record(one * full[q] == d[q] * full[q], tag("D_k form", k, q));
    }
  }
  return rep;
}

IdentityReport l_stack_truncation_identities(std::span<const Tree> trees, std::span<const double> c) {
  const GridSpec& g = common_grid(trees);
  for (const Tree& t : trees) {
    if (t.members.empty()) continue;
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.l_overlapping) throw Error("l-stack identities need l-overlapping trees");
  }
  const BitileSet all = forest_union(trees);
  const std::vector<double> full = upper_sum(all, c);
  IdentityReport rep;
  for (int k = -g.b; k <= g.a; ++k) {
    const std::vector<double> big = upper_sum_if(all, c, [k](int s) { return s > k; });
    const std::vector<double> small = upper_sum_if(all, c, [k](int s) { return s <= k; });
    const std::vector<std::uint8_t> crit = critical_mask(g, trees, k);
    for (std::uint64_t q = 0; q < g.size(); ++q) {
      const double one = crit[q] ? 1.0 : 0.0;
      const std::string where = " k=" + std::to_string(k) + " cell=" + std::to_string(q);
      rep.record(big[q] == one * full[q], "coarse part" + where);
      rep.record(small[q] == (1.0 - one) * full[q], "fine part" + where);
    }
  }
  return rep;
}

Stack random_u_stack(const GridSpec& g, std::size_t count, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const BitileSet p0 = random_convex_set(g, rng);
    if (p0.empty()) continue;
    const std::uint64_t x = std::uniform_int_distribution<std::uint64_t>(0, g.size() - 1)(rng);
    std::vector<Bitile> through;
    for (const Bitile& p : p0.members())
      if (time_has(g, p.time, x)) through.push_back(p);
    if (through.empty()) continue;
    Stack st{x, {}};
    std::vector<std::pair<DyadicRational, DyadicInterval>> seen;
    for (std::size_t n = 0; n < 4 * count && st.trees.size() < count; ++n) {
      const Bitile& p = through[std::uniform_int_distribution<std::size_t>(0, through.size() - 1)(rng)];
      const Cells u = cells_of(g, p.upper().freq);
      const DyadicRational xi = g.freq_point(std::uniform_int_distribution<std::uint64_t>(u.lo, u.hi - 1)(rng));
      const int up = std::uniform_int_distribution<int>(0, g.a - p.time.scale)(rng);
      const DyadicInterval I = p.time.ancestor(p.time.scale + up);
      if (std::find(seen.begin(), seen.end(), std::make_pair(xi, I)) != seen.end()) continue;
      seen.emplace_back(xi, I);
      Tree t = maximal_tree(p0, xi, I, Overlap::upper);
      t.members = restrict_to_time(t.members, x);
      st.trees.push_back(std::move(t));
    }
    return st;
  }
  throw Error("no nonempty convex set generated");
}

Stack random_l_stack(const GridSpec& g, std::size_t count, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const BitileSet p0 = random_convex_set(g, rng);
    if (p0.empty()) continue;
    const std::vector<Tree> trees = random_maximal_trees(p0, count, rng);
    if (trees.empty()) continue;
    const SortedForest sorted = proper_sort(trees);
    std::vector<Bitile> pool;
    for (const Tree& t : sorted.l_trees)
      for (const Bitile& p : t.members.members()) pool.push_back(p);
    if (pool.empty()) continue;
    const Bitile& p = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const int sh = p.time.scale + g.b;
    const std::uint64_t x = (p.time.index << sh) +
                            std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << sh) - 1)(rng);
    Stack st{x, {}};
    for (const Tree& t : sorted.l_trees) {
      Tree r = t;
      r.members = restrict_to_time(t.members, x);
      if (!r.members.empty()) st.trees.push_back(std::move(r));
    }
    return st;
  }
  throw Error("no l-overlapping forest generated");
}

std::vector<double> random_coefficients(const GridSpec& g, std::mt19937_64& rng) {
  std::vector<double> c(BitileSet(g).capacity());
  std::uniform_int_distribution<int> d(-16, 16);
  for (double& v : c) v = d(rng) / 8.0;
  return c;
}

}  // namespace walshpp
