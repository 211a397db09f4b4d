#include "walshpp/varnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace walshpp {

namespace {

double powr(double d, double r) {
  if (r == 1.0) return d;
  if (r == 2.0) return d * d;
  return std::pow(d, r);
}

double root(double s, double r) {
  if (r == 1.0) return s;
  if (r == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / r);
}

void check_r(double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw Error("variation exponent must satisfy 1 <= r < inf");
}

double dist(const Point& x, const Point& y) {
  if (x.size() != y.size()) throw Error("points of different dimension");
  if (x.size() == 1) return std::abs(x[0] - y[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

double magnitude(const Point& x) {
  if (x.size() == 1) return std::abs(x[0]);
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

template <class Dist>
double dp_power(std::size_t n, double r, Dist d) {
  std::vector<double> best(n, 0.0);
  double top = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) b = std::max(b, best[i] + powr(d(i, j), r));
    best[j] = b;
    top = std::max(top, b);
  }
  return top;
}

// Max-envelope of t -> e_f + |t - c_f|^r on sorted abscissae. Two members
// differ by a monotone function of t, which is what the Li Chao tree needs.
class Envelope {
 public:
  Envelope(std::span<const double> xs, double r) : xs_(xs), r_(r), node_(4 * xs.size(), -1) {}

  void insert(double e, double c) {
    e_.push_back(e);
    c_.push_back(c);
    int f = static_cast<int>(e_.size()) - 1;
    std::size_t id = 1, lo = 0, hi = xs_.size() - 1;
    while (true) {
      int& cur = node_[id];
      if (cur < 0) {
        cur = f;
        return;
      }
      const std::size_t mid = (lo + hi) / 2;
      const bool left = eval(f, lo) > eval(cur, lo);
      const bool at_mid = eval(f, mid) > eval(cur, mid);
      if (at_mid) std::swap(cur, f);
      if (lo == hi) return;
      if (left != at_mid) {
        hi = mid;
        id = 2 * id;
      } else {
        lo = mid + 1;
        id = 2 * id + 1;
      }
    }
  }

  double query(std::size_t p) const {
    double best = 0.0;
    std::size_t id = 1, lo = 0, hi = xs_.size() - 1;
    while (true) {
      if (node_[id] >= 0) best = std::max(best, eval(node_[id], p));
      if (lo == hi) return best;
      const std::size_t mid = (lo + hi) / 2;
      if (p <= mid) {
        hi = mid;
        id = 2 * id;
      } else {
        lo = mid + 1;
        id = 2 * id + 1;
      }
    }
  }

 private:
  double eval(int f, std::size_t p) const { return e_[f] + powr(std::abs(xs_[p] - c_[f]), r_); }

  std::span<const double> xs_;
  double r_;
  std::vector<int> node_;
  std::vector<double> e_, c_;
};

double envelope_power(std::span<const double> seq, double r) {
  std::vector<double> xs(seq.begin(), seq.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  Envelope env(xs, r);
  env.insert(0.0, seq[0]);
  double top = 0.0;
  for (std::size_t j = 1; j < seq.size(); ++j) {
    const std::size_t p = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), seq[j]) - xs.begin());
    const double b = env.query(p);
    env.insert(b, seq[j]);
    top = std::max(top, b);
  }
  return top;
}

constexpr std::size_t kEnvelopeFrom = 64;

}  // namespace

double variation_power(std::span<const double> seq, double r) {
  check_r(r);
  if (seq.size() < 2) return 0.0;
  if (r == 1.0) {
    double s = 0.0;
    for (std::size_t i = 1; i < seq.size(); ++i) s += std::abs(seq[i] - seq[i - 1]);
    return s;
  }
  if (seq.size() >= kEnvelopeFrom) return envelope_power(seq, r);
  return variation_power_quadratic(seq, r);
}

double variation_power_quadratic(std::span<const double> seq, double r) {
  check_r(r);
  return dp_power(seq.size(), r, [&](std::size_t i, std::size_t j) { return std::abs(seq[j] - seq[i]); });
}

double variation_power(std::span<const Point> seq, double r) {
  check_r(r);
  return dp_power(seq.size(), r, [&](std::size_t i, std::size_t j) { return dist(seq[i], seq[j]); });
}

double variation_norm(std::span<const double> seq, double r) {
  if (seq.empty()) throw Error("variation norm of an empty sequence");
  double sup = 0.0;
  for (double v : seq) sup = std::max(sup, std::abs(v));
  return sup + root(variation_power(seq, r), r);
}

double variation_norm(std::span<const Point> seq, double r) {
  if (seq.empty()) throw Error("variation norm of an empty sequence");
  double sup = 0.0;
  for (const Point& v : seq) sup = std::max(sup, magnitude(v));
  return sup + root(variation_power(seq, r), r);
}

double variation_norm_brute_force(std::span<const double> seq, double r) {
  check_r(r);
  if (seq.empty()) throw Error("variation norm of an empty sequence");
  if (seq.size() > 24) throw Error("brute force limited to 24 terms");
  const std::size_t n = seq.size();
  double sup = 0.0;
  for (double v : seq) sup = std::max(sup, std::abs(v));
  double top = 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0.0;
    std::size_t prev = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!((mask >> i) & 1)) continue;
      if (prev != n) s += powr(std::abs(seq[i] - seq[prev]), r);
      prev = i;
    }
    top = std::max(top, s);
  }
  return sup + root(top, r);
}

// ---------------------------------------------------------------------------
// Step functions

void StepFunction::validate() const {
  if (values.empty()) {
    if (breakpoints.size() > 1) throw Error("step function breakpoints without values");
    return;
  }
  if (breakpoints.size() != values.size() + 1) throw Error("step function needs one more breakpoint than value");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i - 1] < breakpoints[i])) throw Error("step function breakpoints must increase");
  for (double v : values)
    if (!std::isfinite(v)) throw Error("step function value not finite");
}

double StepFunction::operator()(const DyadicRational& x) const {
  if (values.empty() || x < breakpoints.front() || !(x < breakpoints.back())) return 0.0;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

std::vector<double> StepFunction::value_sequence() const {
  std::vector<double> s;
  if (!values.empty() && !breakpoints.front().is_zero()) s.push_back(0.0);
  s.insert(s.end(), values.begin(), values.end());
  s.push_back(0.0);
  return s;
}

double variation_norm_step(const StepFunction& m, double r) {
  m.validate();
  const std::vector<double> s = m.value_sequence();
  return variation_norm(s, r);
}

// ---------------------------------------------------------------------------
// Jump covers and the parent map

JumpCover jump_cover(std::span<const Point> c, double lambda) {
  if (!(lambda > 0)) throw Error("jump cover needs lambda > 0");
  JumpCover jc{lambda, {}};
  if (c.empty()) return jc;
  std::size_t cur = 0;
  jc.indices.push_back(0);
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (dist(c[k], c[cur]) >= lambda) {
      jc.indices.push_back(k);
      cur = k;
    }
  }
  return jc;
}

JumpCover jump_cover(std::span<const double> c, double lambda) {
  std::vector<Point> p;
  p.reserve(c.size());
  for (double v : c) p.push_back({v});
  return jump_cover(p, lambda);
}

namespace {

double min_nonzero_distance(std::span<const Point> c) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double d = dist(c[i], c[j]);
      if (d > 0) m = std::min(m, d);
    }
  return m;
}

double diameter(std::span<const Point> c) {
  double m = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) m = std::max(m, dist(c[i], c[j]));
  return m;
}

}  // namespace

double default_lambda0(std::span<const Point> c, double fraction) {
  const double m = min_nonzero_distance(c);
  return std::isinf(m) ? fraction : fraction * m;
}

ParentMap parent_map(std::span<const Point> c, double lambda0) {
  if (c.empty()) throw Error("parent map of an empty sequence");
  if (!(lambda0 > 0)) throw Error("lambda0 must be positive");
  if (!(lambda0 < min_nonzero_distance(c))) throw Error("lambda0 must be below every nonzero distance");
  ParentMap pm{lambda0, {}};
  std::vector<std::size_t> id(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) id[k] = k;
  pm.rho.push_back(std::move(id));
  for (int n = 0; n < 2048; ++n) {
    const JumpCover jc = jump_cover(c, std::ldexp(lambda0, n));
    const std::vector<std::size_t>& prev = pm.rho.back();
    std::vector<std::size_t> next(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      auto it = std::upper_bound(jc.indices.begin(), jc.indices.end(), prev[k]);
      next[k] = *(it - 1);
    }
    pm.rho.push_back(std::move(next));
    if (jc.count() == 1) return pm;
  }
  throw Error("parent map did not terminate");
}

ParentMapCheck check_parent_map(std::span<const Point> c, const ParentMap& p) {
  ParentMapCheck chk;
  const double diam = diameter(c);
  const std::size_t d = c.front().size();
  double scale = 0.0;
  for (const Point& v : c) scale = std::max(scale, magnitude(v));
  for (std::size_t k = 0; k < c.size(); ++k) {
    Point acc = c[0];
    for (int n = 0; n + 1 < p.levels(); ++n)
      for (std::size_t i = 0; i < d; ++i) acc[i] += c[p.at(n, k)][i] - c[p.at(n + 1, k)][i];
    const double res = dist(acc, c[k]);
    chk.max_residual = std::max(chk.max_residual, res);
    if (res > 1e-12 * std::max(1.0, scale)) chk.telescoping = false;
  }
  for (int n = -1; n + 1 < p.levels(); ++n) {
    const double bound = std::ldexp(p.lambda0, n + 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (!(dist(c[p.at(n, k)], c[p.at(n + 1, k)]) < bound)) chk.increments = false;
      if (k > 0 && p.at(n, k) < p.at(n, k - 1)) chk.monotone = false;
      if (n >= 0 && std::ldexp(p.lambda0, n) > diam && p.at(n, k) != 0) chk.terminal = false;
    }
  }
  const int last = p.levels() - 1;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (p.at(last, k) != 0) chk.terminal = false;
  return chk;
}

// ---------------------------------------------------------------------------
// Interval decomposition

namespace {

struct Piece {
  DyadicRational lo, hi;
  double v;
};

std::vector<Piece> domain_pieces(const StepFunction& m) {
  std::vector<Piece> ps;
  if (m.values.empty()) return ps;
  if (!m.breakpoints.front().is_zero()) ps.push_back({DyadicRational{}, m.breakpoints.front(), 0.0});
  for (std::size_t i = 0; i < m.values.size(); ++i)
    ps.push_back({m.breakpoints[i], m.breakpoints[i + 1], m.values[i]});
  return ps;
}

double length(const DyadicRational& lo, const DyadicRational& hi) { return hi.to_double() - lo.to_double(); }

}  // namespace

double StepDecomposition::partial_sum(int J, const DyadicRational& x) const {
  double s = 0.0;
  for (const DecompLevel& lv : levels) {
    if (lv.j > J) break;
    for (const DecompLevel::Piece& p : lv.pieces)
      if (!(x < p.lo) && x < p.hi) s += p.b;
  }
  return s;
}

StepDecomposition interval_decomposition(const StepFunction& m, double r, int j_max, LevelValue value) {
  check_r(r);
  if (j_max < 0) throw Error("j_max must be nonnegative");
  m.validate();
  StepDecomposition d;
  d.r = r;
  d.value = value;
  d.norm = variation_norm_step(m, r);
  const std::vector<Piece> ps = domain_pieces(m);
  if (ps.empty() || d.norm == 0.0) return d;

  // V(x): best chain from the point 0 to x; constant on each piece.
  d.cumulative.assign(ps.size(), 0.0);
  for (std::size_t i = 1; i < ps.size(); ++i) {
    double b = 0.0;
    for (std::size_t h = 0; h < i; ++h) b = std::max(b, d.cumulative[h] + powr(std::abs(ps[i].v - ps[h].v), r));
    d.cumulative[i] = b;
  }
  const double M = powr(d.norm, r);

  for (int j = 0; j <= j_max; ++j) {
    DecompLevel lv;
    lv.j = j;
    const std::size_t top = std::size_t{1} << j;
    std::size_t i = 0;
    while (i < ps.size()) {
      const auto level_of = [&](std::size_t q) {
        const double y = std::floor(std::ldexp(d.cumulative[q] / M, j));
        return std::min(static_cast<std::size_t>(y) + 1, top);
      };
      const std::size_t l = level_of(i);
      std::size_t e = i;
      double mass = 0.0, len = 0.0, lo = ps[i].v, hi = ps[i].v;
      while (e < ps.size() && level_of(e) == l) {
        const double w = length(ps[e].lo, ps[e].hi);
        mass += ps[e].v * w;
        len += w;
        lo = std::min(lo, ps[e].v);
        hi = std::max(hi, ps[e].v);
        ++e;
      }
      const double center = value == LevelValue::mean ? mass / len : 0.5 * (lo + hi);
      DecompLevel::Piece p{l, ps[i].lo, ps[e - 1].hi, center, 0.0};
      if (j == 0) {
        p.b = p.tilde_b;
      } else {
        const std::size_t parent = (l + 1) / 2;
        for (const DecompLevel::Piece& q : d.levels.back().pieces)
          if (q.l == parent) p.b = p.tilde_b - q.tilde_b;
      }
      lv.pieces.push_back(p);
      i = e;
    }
    d.levels.push_back(std::move(lv));
  }
  return d;
}

DecompositionCheck check_decomposition(const StepFunction& m, const StepDecomposition& d) {
  DecompositionCheck chk;
  const std::vector<Piece> ps = domain_pieces(m);
  const double q = std::pow(2.0, -1.0 / d.r);
  for (const DecompLevel& lv : d.levels) {
    if (lv.pieces.size() > (std::size_t{1} << lv.j)) chk.count_ok = false;
    const double bound = d.norm * std::pow(2.0, -lv.j / d.r);
    for (std::size_t i = 0; i < lv.pieces.size(); ++i) {
      const auto& p = lv.pieces[i];
      if (i > 0 && lv.pieces[i - 1].hi > p.lo) chk.disjoint_ok = false;
      if (std::abs(p.b) > bound) chk.coefficient_ok = false;
      if (bound > 0) chk.worst_coefficient_ratio = std::max(chk.worst_coefficient_ratio, std::abs(p.b) / bound);
    }
    // sum_{j > J} ||m|| 2^{-j/r} = ||m|| q^{J+1} / (1 - q)
    const double tail = d.norm * std::pow(q, lv.j + 1) / (1 - q);
    double err = 0.0;
    for (const Piece& p : ps) err = std::max(err, std::abs(p.v - d.partial_sum(lv.j, p.lo)));
    if (err > tail * (1 + 1e-12)) chk.tail_ok = false;
    if (tail > 0) chk.worst_tail_ratio = std::max(chk.worst_tail_ratio, err / tail);
  }
  return chk;
}

}  // namespace walshpp
