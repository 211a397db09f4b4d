#include "walshpp/trees.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace walshpp {

namespace {

std::uint64_t freq_index(const DyadicRational& xi, int scale) { return xi.floor_div_pow2(scale); }

bool xi_in(const DyadicRational& xi, const DyadicInterval& w) { return w.contains(xi); }

void check_freq(const GridSpec& g, const DyadicRational& xi) {
  if (xi >= DyadicRational(1, g.b)) throw Error("top frequency outside the frequency domain");
}

std::string describe_top(const DyadicRational& xi, const DyadicInterval& I) {
  return "xi=" + xi.to_string() + " I=" + to_string(I);
}

// Tile ids: time scale k in [-b, a], id = (k + b) N + t 2^(b+k) + n.
std::size_t tile_id(const GridSpec& g, int k, std::uint64_t t, std::uint64_t n) {
  return static_cast<std::size_t>(k + g.b) * g.size() + (t << (g.b + k)) + n;
}

std::vector<std::uint8_t> lower_tile_mask(const BitileSet& s) {
  const GridSpec& g = s.grid();
  std::vector<std::uint8_t> m(static_cast<std::size_t>(g.bits() + 1) * g.size(), 0);
  for (const Bitile& p : s.members()) {
    const Tile lo = p.lower();
    m[tile_id(g, lo.time.scale, lo.time.index, lo.freq.index)] = 1;
  }
  return m;
}

}  // namespace

bool has_tree_shape(const BitileSet& s, const DyadicRational& xi, const DyadicInterval& I) {
  for (const Bitile& p : s.members())
    if (!I.contains(p.time) || !xi_in(xi, p.freq)) return false;
  return true;
}

bool is_l_convex(const BitileSet& s) {
  const GridSpec& g = s.grid();
  const std::vector<std::uint8_t> L = lower_tile_mask(s);
  std::vector<std::uint8_t> below(L.size(), 0), above(L.size(), 0);
  // below[q]: some member lower tile <= q; above[q]: some member lower tile >= q.
  for (int k = -g.b; k <= g.a; ++k) {
    const std::uint64_t nt = std::uint64_t{1} << (g.a - k), nf = std::uint64_t{1} << (g.b + k);
    for (std::uint64_t t = 0; t < nt; ++t)
      for (std::uint64_t n = 0; n < nf; ++n) {
        const std::size_t id = tile_id(g, k, t, n);
        below[id] = L[id];
        if (!below[id] && k > -g.b)
          below[id] = below[tile_id(g, k - 1, 2 * t, n >> 1)] || below[tile_id(g, k - 1, 2 * t + 1, n >> 1)];
      }
  }
  for (int k = g.a; k >= -g.b; --k) {
    const std::uint64_t nt = std::uint64_t{1} << (g.a - k), nf = std::uint64_t{1} << (g.b + k);
    for (std::uint64_t t = 0; t < nt; ++t)
      for (std::uint64_t n = 0; n < nf; ++n) {
        const std::size_t id = tile_id(g, k, t, n);
        above[id] = L[id];
        if (!above[id] && k < g.a)
          above[id] = above[tile_id(g, k + 1, t >> 1, 2 * n)] || above[tile_id(g, k + 1, t >> 1, 2 * n + 1)];
      }
  }
  // Only lower tiles of genuine bitiles (even frequency index) can be P'_l.
  for (int k = min_bitile_scale(g); k <= g.a; ++k) {
    const std::uint64_t nt = std::uint64_t{1} << (g.a - k), nf = std::uint64_t{1} << (g.b + k);
    for (std::uint64_t t = 0; t < nt; ++t)
      for (std::uint64_t n = 0; n < nf; n += 2) {
        const std::size_t id = tile_id(g, k, t, n);
        if (!L[id] && below[id] && above[id]) return false;
      }
  }
  return true;
}

TreeKind classify(const Tree& t) {
  TreeKind kind;
  kind.is_tree = has_tree_shape(t.members, t.top_freq, t.top_interval);
  kind.l_overlapping = kind.u_overlapping = true;
  for (const Bitile& p : t.members.members()) {
    if (!xi_in(t.top_freq, p.lower().freq)) kind.l_overlapping = false;
    if (!xi_in(t.top_freq, p.upper().freq)) kind.u_overlapping = false;
  }
  kind.l_convex = is_l_convex(t.members);
  kind.convex = t.members.is_convex();
  return kind;
}

Tree maximal_tree(const BitileSet& within, const DyadicRational& xi, const DyadicInterval& I,
                  Overlap kind) {
  const GridSpec& g = within.grid();
  check_freq(g, xi);
  if (I.scale > g.a || I.index >= (std::uint64_t{1} << (g.a - I.scale))) throw Error("top interval outside the grid");
  Tree t{BitileSet(g), xi, I};
  for (int j = min_bitile_scale(g); j <= std::min(I.scale, g.a); ++j) {
    const std::uint64_t m = freq_index(xi, 1 - j);
    const std::uint64_t half = freq_index(xi, -j) & 1;
    if (kind == Overlap::upper && !half) continue;
    if (kind == Overlap::lower && half) continue;
    const std::uint64_t t0 = I.index << (I.scale - j), tl = std::uint64_t{1} << (I.scale - j);
    for (std::uint64_t ti = t0; ti < t0 + tl; ++ti) {
      const Bitile p{{j, ti}, {1 - j, m}};
      if (within.contains(p)) t.members.insert(p);
    }
  }
  return t;
}

double tree_energy(const BitileSet& t, const DiscreteSignal& f) {
  if (t.empty()) return 0.0;
  const std::vector<Tile> cover = tile_cover(t);
  double acc = 0.0;
  for (const Tile& p : cover) {
    const double c = coefficient(f, p);
    acc += c * c;
  }
  return acc;
}

double tree_size_of(const Tree& t, const DiscreteSignal& f) {
  return std::sqrt(std::ldexp(tree_energy(t.members, f), -t.top_interval.scale));
}

namespace {

struct Candidate {
  DyadicRational xi;
  DyadicInterval I;
  double size;
};

DyadicInterval time_hull(const BitileSet& s) {
  const auto ms = s.members();
  DyadicInterval h = ms.front().time;
  for (const Bitile& p : ms) {
    DyadicInterval q = p.time;
    if (q.scale < h.scale) q = q.ancestor(h.scale);
    else h = h.ancestor(q.scale);
    while (q.index != h.index) {
      q = q.parent();
      h = h.parent();
    }
  }
  return h;
}

// Every top datum whose maximal tree has that exact top interval.
std::vector<Candidate> size_candidates(const BitileSet& P, const DiscreteSignal& f) {
  const GridSpec& g = P.grid();
  std::set<DyadicRational> xis;
  for (const Bitile& p : P.members()) xis.insert(p.freq.lower());
  std::vector<Candidate> out;
  for (const DyadicRational& xi : xis) {
    std::set<DyadicInterval> Is;
    for (const Bitile& p : P.members()) {
      if (!xi_in(xi, p.freq)) continue;
      for (DyadicInterval I = p.time; I.scale <= g.a; I = I.parent()) {
        if (!Is.insert(I).second) break;
      }
    }
    for (const DyadicInterval& I : Is) {
      Tree t = maximal_tree(P, xi, I);
      if (t.members.empty() || !(time_hull(t.members) == I)) continue;
      out.push_back({xi, I, tree_size_of(t, f)});
    }
  }
  return out;
}

}  // namespace

SizeWitness tree_size_witness(const BitileSet& P, const DiscreteSignal& f) {
  if (!(P.grid() == f.grid)) throw Error("grid mismatch");
  if (!P.is_convex()) throw Error("tree_size needs a convex bitile set");
  SizeWitness w;
  for (const Candidate& c : size_candidates(P, f)) {
    if (!w.found || c.size > w.size) {
      w.size = c.size;
      w.xi = c.xi;
      w.I = c.I;
      w.found = true;
    }
  }
  return w;
}

double tree_size(const BitileSet& P, const DiscreteSignal& f) { return tree_size_witness(P, f).size; }

std::vector<double> counting_function(const GridSpec& g, std::span<const Tree> trees) {
  std::vector<double> n(g.size(), 0.0);
  for (const Tree& t : trees) {
    const int lbits = t.top_interval.scale + g.b;
    const std::size_t s = t.top_interval.index << lbits;
    for (std::size_t i = s; i < s + (std::size_t{1} << lbits); ++i) n[i] += 1.0;
  }
  return n;
}

double dyadic_bmo(const GridSpec& g, std::span<const double> v) {
  double best = 0.0;
  for (int k = -g.b; k <= g.a; ++k) {
    const std::size_t L = std::size_t{1} << (k + g.b);
    for (std::size_t s = 0; s < v.size(); s += L) {
      double mean = 0.0;
      for (std::size_t i = s; i < s + L; ++i) mean += v[i];
      mean /= static_cast<double>(L);
      double dev = 0.0;
      for (std::size_t i = s; i < s + L; ++i) dev += std::abs(v[i] - mean);
      best = std::max(best, dev / static_cast<double>(L));
    }
  }
  return best;
}

Selection select_trees(const BitileSet& P, const DiscreteSignal& f, int k) {
  const double cap = std::ldexp(1.0, -k);
  if (tree_size(P, f) > cap * (1 + 1e-12)) throw Error("size(P, f) exceeds 2^-k");
  const double threshold = std::ldexp(1.0, -k - 1);
  Selection sel{P, {}, {}};
  for (;;) {
    const std::vector<Candidate> cands = size_candidates(sel.remainder, f);
    const Candidate* best = nullptr;
    for (const Candidate& c : cands) {
      if (!(c.size > threshold)) continue;
      if (!best || std::tie(c.xi, c.I.scale, c.I.index) < std::tie(best->xi, best->I.scale, best->I.index))
        best = &c;
    }
    if (!best) break;
    Tree t = maximal_tree(sel.remainder, best->xi, best->I);
    sel.remainder -= t.members;
    sel.trees.push_back(std::move(t));
  }
  BitileSet U(P.grid());
  for (const Tree& t : sel.trees) U |= t.members;
  for (Tree& t : sel.trees) t = maximal_tree(U, t.top_freq, t.top_interval);

  const std::vector<double> n = counting_function(P.grid(), sel.trees);
  sel.counting.l1_mass = lp_norm(n, 1, P.grid().time_weight());
  sel.counting.bmo = dyadic_bmo(P.grid(), n);
  const double l2 = lp_norm(f, 2), linf = lp_norm(f, INFINITY);
  const double scale = std::ldexp(1.0, 2 * k);
  sel.counting.l1_ratio = l2 > 0 ? sel.counting.l1_mass / (scale * l2 * l2) : 0.0;
  sel.counting.bmo_ratio = linf > 0 ? sel.counting.bmo / (scale * linf * linf) : 0.0;
  return sel;
}

ConditionReport check_selection(const BitileSet& P, const DiscreteSignal& f, int k,
                                const Selection& sel) {
  BitileSet U(P.grid());
  for (const Tree& t : sel.trees) U |= t.members;
  BitileSet both = U;
  both &= sel.remainder;
  if (!both.empty()) return ConditionReport::fail("disjoint", to_string(both.members().front()));
  BitileSet all = U;
  all |= sel.remainder;
  if (!(all == P)) return ConditionReport::fail("union", "remainder and trees do not recover P");
  if (!sel.remainder.is_convex()) return ConditionReport::fail("remainder convex", "");
  const SizeWitness w = tree_size_witness(sel.remainder, f);
  if (w.size > std::ldexp(1.0, -k - 1))
    return ConditionReport::fail("size halving", describe_top(w.xi, w.I) + " size=" + std::to_string(w.size));
  for (std::size_t i = 0; i < sel.trees.size(); ++i) {
    const Tree& t = sel.trees[i];
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.convex || t.members.empty())
      return ConditionReport::fail("convex tree", "tree " + std::to_string(i));
    if (!(maximal_tree(U, t.top_freq, t.top_interval).members == t.members))
      return ConditionReport::fail("td-maximal", "tree " + std::to_string(i));
  }
  return ConditionReport::pass();
}

// ---------------------------------------------------------------------------
// Proper sorting

SortedForest proper_sort(std::span<const Tree> trees) {
  if (trees.empty()) return {};
  const GridSpec g = trees.front().grid();
  BitileSet P(g);
  for (const Tree& t : trees) {
    if (!(t.grid() == g)) throw Error("trees on different grids");
    P |= t.members;
  }
  std::vector<Tree> work;
  std::set<std::tuple<DyadicRational, int, std::uint64_t>> seen;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const Tree& t = trees[i];
    const TreeKind kind = classify(t);
    if (!kind.is_tree) throw Error("input " + std::to_string(i) + " is not a tree: " + describe_top(t.top_freq, t.top_interval));
    if (!kind.convex) throw Error("input tree " + std::to_string(i) + " is not convex");
    if (!(maximal_tree(P, t.top_freq, t.top_interval).members == t.members))
      throw Error("input tree " + std::to_string(i) + " is not td-maximal: " +
                  describe_top(t.top_freq, t.top_interval));
    if (seen.insert({t.top_freq, t.top_interval.scale, t.top_interval.index}).second) work.push_back(t);
  }

  // Drop trees covered by the others until none is redundant.
  std::vector<int> cover(P.capacity(), 0);
  for (const Tree& t : work)
    for (const Bitile& p : t.members.members()) ++cover[P.id(p)];
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const auto ms = work[i].members.members();
      const bool redundant =
          std::all_of(ms.begin(), ms.end(), [&](const Bitile& p) { return cover[P.id(p)] >= 2; });
      if (redundant) {
        for (const Bitile& p : ms) --cover[P.id(p)];
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }

  std::sort(work.begin(), work.end(), [](const Tree& x, const Tree& y) {
    return std::tie(x.top_freq, x.top_interval.scale, x.top_interval.index) <
           std::tie(y.top_freq, y.top_interval.scale, y.top_interval.index);
  });

  const std::size_t n = work.size();
  SortedForest out;
  out.u_trees.resize(n);
  out.l_trees.resize(n);
  BitileSet rest = P;
  for (std::size_t i = n; i-- > 0;) {
    const Tree& t = work[i];
    out.u_trees[i] = maximal_tree(rest, t.top_freq, t.top_interval, Overlap::upper);
    out.l_trees[i] = maximal_tree(rest, t.top_freq, t.top_interval, Overlap::lower);
    rest -= out.u_trees[i].members;
    rest -= out.l_trees[i].members;
  }
  BitileSet Uu(g);
  for (const Tree& t : out.u_trees) Uu |= t.members;
  for (Tree& t : out.u_trees) t = maximal_tree(Uu, t.top_freq, t.top_interval, Overlap::upper);
  return out;
}

ConditionReport check_properly_sorted(std::span<const Tree> l_trees) {
  if (l_trees.empty()) return ConditionReport::pass();
  const GridSpec g = l_trees.front().grid();
  std::vector<int> owner;
  for (std::size_t i = 0; i < l_trees.size(); ++i) {
    const Tree& t = l_trees[i];
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.l_overlapping)
      return ConditionReport::fail("l-overlapping tree", "tree " + std::to_string(i));
    if (!kind.l_convex) return ConditionReport::fail("(1) l-convex", "tree " + std::to_string(i));
  }
  owner.assign(l_trees.front().members.capacity(), -1);
  std::vector<Tile> uppers;
  for (std::size_t i = 0; i < l_trees.size(); ++i) {
    for (const Bitile& p : l_trees[i].members.members()) {
      int& o = owner[l_trees[i].members.id(p)];
      if (o >= 0)
        return ConditionReport::fail("(2) disjoint", to_string(p) + " in trees " + std::to_string(o) +
                                                          " and " + std::to_string(i));
      o = static_cast<int>(i);
      uppers.push_back(p.upper());
    }
  }
  for (std::size_t i = 0; i < l_trees.size(); ++i) {
    for (const Bitile& p : l_trees[i].members.members()) {
      const Tile u = p.upper();
      for (std::size_t j = 0; j < l_trees.size(); ++j) {
        const Tree& o = l_trees[j];
        if (o.top_interval.intersects(p.time) && xi_in(o.top_freq, u.freq))
          return ConditionReport::fail("(3) top frequency exclusion",
                                       "P=" + to_string(p) + " tree " + std::to_string(i) + ", T'=" +
                                           std::to_string(j) + " " + describe_top(o.top_freq, o.top_interval));
      }
    }
  }
  if (!pairwise_disjoint(uppers)) return ConditionReport::fail("upper tiles disjoint", "");
  (void)g;
  return ConditionReport::pass();
}

ConditionReport check_sorted_forest(const SortedForest& out, std::span<const Tree> input) {
  if (input.empty()) {
    if (out.u_trees.empty() && out.l_trees.empty()) return ConditionReport::pass();
    return ConditionReport::fail("(4) top data", "output trees from empty input");
  }
  const GridSpec g = input.front().grid();
  BitileSet P(g), Uu(g), Ul(g);
  for (const Tree& t : input) P |= t.members;
  for (const Tree& t : out.u_trees) Uu |= t.members;
  for (const Tree& t : out.l_trees) Ul |= t.members;

  for (std::size_t i = 0; i < out.u_trees.size(); ++i) {
    const Tree& t = out.u_trees[i];
    const TreeKind kind = classify(t);
    if (!kind.is_tree || !kind.u_overlapping)
      return ConditionReport::fail("(1) u-overlapping", "u-tree " + std::to_string(i));
    if (!(maximal_tree(Uu, t.top_freq, t.top_interval, Overlap::upper).members == t.members))
      return ConditionReport::fail("(1) td-maximal", "u-tree " + std::to_string(i) + " " +
                                                         describe_top(t.top_freq, t.top_interval));
  }
  if (ConditionReport r = check_properly_sorted(out.l_trees); !r.ok) {
    r.condition = "(2) " + r.condition;
    return r;
  }
  BitileSet both = Uu;
  both &= Ul;
  if (!both.empty()) return ConditionReport::fail("(3) disjoint unions", to_string(both.members().front()));
  BitileSet all = Uu;
  all |= Ul;
  if (!(all == P)) return ConditionReport::fail("union", "output does not recover the input union");

  using Top = std::tuple<DyadicRational, int, std::uint64_t>;
  auto tops = [](std::span<const Tree> ts) {
    std::set<Top> s;
    for (const Tree& t : ts) s.insert({t.top_freq, t.top_interval.scale, t.top_interval.index});
    return s;
  };
  const std::set<Top> tu = tops(out.u_trees), tl = tops(out.l_trees), ti = tops(input);
  if (tu != tl) return ConditionReport::fail("(4) top data", "u- and l-trees differ");
  for (const Top& t : tu)
    if (!ti.count(t)) return ConditionReport::fail("(4) top data", "output top data not in input");
  return ConditionReport::pass();
}

CellRange upper_union(const BitileSet& t, std::uint64_t x) {
  const GridSpec& g = t.grid();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> iv;
  for (int j = min_bitile_scale(g); j <= g.a; ++j) {
    const std::uint64_t ti = x >> (j + g.b);
    const std::size_t per_time = std::size_t{1} << (g.b - 1 + j);
    for (std::uint64_t m = 0; m < per_time; ++m) {
      const Bitile p{{j, ti}, {1 - j, m}};
      if (!t.contains(p)) continue;
      const Tile u = p.upper();
      const int sh = g.a + u.freq.scale;
      iv.emplace_back(u.freq.index << sh, (u.freq.index + 1) << sh);
    }
  }
  CellRange r;
  if (iv.empty()) return r;
  std::sort(iv.begin(), iv.end());
  r.lo = iv.front().first;
  r.hi = iv.front().second;
  for (const auto& [lo, hi] : iv) {
    if (lo > r.hi) r.interval = false;
    r.hi = std::max(r.hi, hi);
  }
  return r;
}

DiscreteSignal lower_tile_sum(const BitileSet& s, const DiscreteSignal& g, int kmax) {
  DiscreteSignal out(g.grid);
  for (const Bitile& p : s.members()) {
    if (p.time.scale > kmax) continue;
    const Tile lo = p.lower();
    const int lbits = lo.time.scale + g.grid.b;
    const std::uint64_t start = lo.time.index << lbits;
    for (std::uint64_t x = start; x < start + (std::uint64_t{1} << lbits); ++x) out[x] += packet_term(g, lo, x);
  }
  return out;
}

TruncationSides tree_truncation_identity(const Tree& t, const DiscreteSignal& g, int k) {
  const GridSpec& G = g.grid;
  if (!(t.grid() == G)) throw Error("grid mismatch");
  const TreeKind kind = classify(t);
  if (!kind.is_tree || !kind.u_overlapping) throw Error("truncation identity needs a u-overlapping tree");
  if (k < -G.b || k > G.a) throw Error("averaging scale out of range");
  const DyadicInterval& I = t.top_interval;
  const Tile pT{I, DyadicInterval::containing(t.top_freq, -I.scale)};
  if (!fits(pT, G)) throw Error("top tile outside the grid");

  TruncationSides sides{lower_tile_sum(t.members, g, k), DiscreteSignal(G)};
  const DiscreteSignal F = lower_tile_sum(t.members, g, G.a);
  DiscreteSignal sF(G);
  std::vector<int> sg(G.size());
  for (std::uint64_t x = 0; x < G.size(); ++x) {
    const int s = packet_sign(pT, G, x);
    sg[x] = s == 0 ? 1 : s;
    sF[x] = sg[x] * F[x];
  }
  const DiscreteSignal avg = dyadic_average(sF, k);
  for (std::uint64_t x = 0; x < G.size(); ++x) sides.rhs[x] = F[x] - sg[x] * avg[x];
  return sides;
}

// ---------------------------------------------------------------------------
// Random instances

namespace {

Bitile random_bitile(const GridSpec& g, std::mt19937_64& rng, int kmin, int kmax) {
  std::uniform_int_distribution<int> ks(kmin, kmax);
  const int k = ks(rng);
  std::uniform_int_distribution<std::uint64_t> ts(0, (std::uint64_t{1} << (g.a - k)) - 1);
  std::uniform_int_distribution<std::uint64_t> ms(0, (std::uint64_t{1} << (g.b - 1 + k)) - 1);
  return {{k, ts(rng)}, {1 - k, ms(rng)}};
}

// Closure of `gen` under moving up (I larger, w smaller) or down.
BitileSet closure(const BitileSet& gen, bool upward) {
  const GridSpec& g = gen.grid();
  BitileSet out = gen;
  const int kmin = min_bitile_scale(g), kmax = max_bitile_scale(g);
  if (upward) {
    for (int k = kmin + 1; k <= kmax; ++k)
      for (std::uint64_t t = 0; t < (std::uint64_t{1} << (g.a - k)); ++t)
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << (g.b - 1 + k)); ++m) {
          const Bitile p{{k, t}, {1 - k, m}};
          const DyadicInterval w = p.freq.parent();
          if (out.contains({{k - 1, 2 * t}, w}) || out.contains({{k - 1, 2 * t + 1}, w})) out.insert(p);
        }
  } else {
    for (int k = kmax - 1; k >= kmin; --k)
      for (std::uint64_t t = 0; t < (std::uint64_t{1} << (g.a - k)); ++t)
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << (g.b - 1 + k)); ++m) {
          const Bitile p{{k, t}, {1 - k, m}};
          const DyadicInterval I = p.time.parent();
          if (out.contains({I, {-k, 2 * m}}) || out.contains({I, {-k, 2 * m + 1}}))
            out.insert(p);
        }
  }
  return out;
}

}  // namespace

BitileSet random_convex_set(const GridSpec& g, std::mt19937_64& rng) {
  const int kmin = min_bitile_scale(g), kmax = max_bitile_scale(g);
  std::uniform_int_distribution<int> count(1, 4);
  BitileSet tops(g), bottoms(g);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const Bitile h = random_bitile(g, rng, kmin, kmax);
    tops.insert(h);
    // A generator below h keeps the closure intersection nonempty.
    Bitile p = h;
    std::uniform_int_distribution<int> depth(0, h.time.scale - kmin);
    for (int d = depth(rng); d > 0; --d) {
      const auto halves = p.time.halves();
      p = {(rng() & 1) ? halves.second : halves.first, p.freq.parent()};
    }
    bottoms.insert(p);
  }
  BitileSet s = closure(bottoms, true);
  s &= closure(tops, false);
  if (rng() % 3 == 0) {
    // Scale slab containing at least one generator scale.
    std::uniform_int_distribution<int> lo(kmin, kmax);
    int a = lo(rng), b = lo(rng);
    if (a > b) std::swap(a, b);
    BitileSet slab(g);
    for (std::size_t id = 0; id < s.capacity(); ++id) {
      const Bitile p = s.bitile(id);
      if (s.contains_id(id) && p.time.scale >= a && p.time.scale <= b) slab.insert(p);
    }
    if (!slab.empty()) s = slab;
  }
  if (rng() % 3 == 0) {
    // Time window: keep members with I_P inside a random dyadic interval.
    const auto ms = s.members();
    const Bitile anchor = ms[rng() % ms.size()];
    std::uniform_int_distribution<int> up(anchor.time.scale, g.a);
    const DyadicInterval J = anchor.time.ancestor(up(rng));
    BitileSet w(g);
    for (const Bitile& p : ms)
      if (J.contains(p.time)) w.insert(p);
    s = w;
  }
  return s;
}

std::vector<Tree> random_maximal_trees(const BitileSet& within, std::size_t count, std::mt19937_64& rng) {
  const GridSpec& g = within.grid();
  std::vector<Tree> out;
  if (within.empty()) return out;
  const auto ms = within.members();
  std::set<std::tuple<DyadicRational, int, std::uint64_t>> tops;
  for (std::size_t attempt = 0; attempt < 8 * count + 8 && out.size() < count; ++attempt) {
    const Bitile p = ms[rng() % ms.size()];
    const int sh = g.a + p.freq.scale;
    const std::uint64_t cell = (p.freq.index << sh) + (sh > 0 ? rng() % (std::uint64_t{1} << sh) : 0);
    const DyadicRational xi(cell, -g.a);
    std::uniform_int_distribution<int> up(p.time.scale, g.a);
    const DyadicInterval I = p.time.ancestor(up(rng));
    if (!tops.insert({xi, I.scale, I.index}).second) continue;
    Tree t = maximal_tree(within, xi, I);
    bool dup = false;
    for (const Tree& o : out) dup = dup || o.members == t.members;
    if (!dup) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace walshpp
