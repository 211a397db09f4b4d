#include "walshpp/phaseplane.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "walshpp/kernels.hpp"

namespace walshpp {

namespace {

constexpr int kDenseFieldBits = 12;

void check_dense(const GridSpec& g) {
  if (g.bits() > kDenseFieldBits) throw Error("dense fields are capped at a + b <= 12");
}

bool valid_time(const DyadicInterval& I, const GridSpec& g) {
  return I.scale >= -g.b && I.scale <= g.a && I.index < (std::uint64_t{1} << (g.a - I.scale));
}

bool valid_freq(const DyadicInterval& w, const GridSpec& g) {
  return w.scale >= -g.a && w.scale <= g.b && w.index < (std::uint64_t{1} << (g.b - w.scale));
}

}  // namespace

std::string to_string(const DyadicInterval& I) {
  return "[" + std::to_string(I.index) + "*2^" + std::to_string(I.scale) + ", " +
         std::to_string(I.index + 1) + "*2^" + std::to_string(I.scale) + ")";
}
std::string to_string(const Tile& p) { return to_string(p.time) + " x " + to_string(p.freq); }
std::string to_string(const Bitile& p) { return to_string(p.time) + " x " + to_string(p.freq); }

Subtiles subtiles(const Bitile& p) { return {p.upper(), p.lower(), p.left(), p.right()}; }

Tile make_tile(DyadicInterval time, DyadicInterval freq) {
  if (time.scale + freq.scale != 0) throw Error("tile needs |I| * |w| = 1");
  return {time, freq};
}

Bitile make_bitile(DyadicInterval time, DyadicInterval freq) {
  if (time.scale + freq.scale != 1) throw Error("bitile needs |I| * |w| = 2");
  return {time, freq};
}

bool leq(const Tile& p, const Tile& q) { return p.freq.contains(q.freq) && q.time.contains(p.time); }
bool leq(const Bitile& p, const Bitile& q) { return p.freq.contains(q.freq) && q.time.contains(p.time); }

bool fits(const Tile& p, const GridSpec& g) {
  return p.time.scale + p.freq.scale == 0 && valid_time(p.time, g) && valid_freq(p.freq, g);
}

bool fits(const Bitile& p, const GridSpec& g) {
  return p.time.scale + p.freq.scale == 1 && p.time.scale >= min_bitile_scale(g) &&
         valid_time(p.time, g) && valid_freq(p.freq, g);
}

// ---------------------------------------------------------------------------
// BitileSet

BitileSet::BitileSet(GridSpec g) : grid_(g) {
  const auto scales = static_cast<std::size_t>(g.bits());
  mask_.assign(scales * (g.size() / 2), 0);
}

BitileSet::BitileSet(GridSpec g, std::span<const Bitile> members) : BitileSet(g) {
  for (const Bitile& p : members) insert(p);
}

BitileSet BitileSet::all(GridSpec g) {
  BitileSet s(g);
  std::fill(s.mask_.begin(), s.mask_.end(), 1);
  s.count_ = s.mask_.size();
  return s;
}

std::size_t BitileSet::id(const Bitile& p) const {
  if (!fits(p, grid_)) throw Error("bitile outside the grid");
  const int k = p.time.scale;
  const std::size_t half = grid_.size() / 2;
  const std::size_t per_time = std::size_t{1} << (grid_.b - 1 + k);
  return static_cast<std::size_t>(k - min_bitile_scale(grid_)) * half + p.time.index * per_time +
         p.freq.index;
}

Bitile BitileSet::bitile(std::size_t id) const {
  const std::size_t half = grid_.size() / 2;
  const int k = static_cast<int>(id / half) + min_bitile_scale(grid_);
  const std::size_t r = id % half;
  const std::size_t per_time = std::size_t{1} << (grid_.b - 1 + k);
  return {{k, r / per_time}, {1 - k, r % per_time}};
}

bool BitileSet::contains(const Bitile& p) const { return fits(p, grid_) && mask_[id(p)] != 0; }

void BitileSet::insert(const Bitile& p) {
  auto& m = mask_[id(p)];
  if (!m) {
    m = 1;
    ++count_;
  }
}

void BitileSet::erase(const Bitile& p) {
  if (!fits(p, grid_)) return;
  auto& m = mask_[id(p)];
  if (m) {
    m = 0;
    --count_;
  }
}

std::vector<Bitile> BitileSet::members() const {
  std::vector<Bitile> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) out.push_back(bitile(i));
  return out;
}

bool BitileSet::is_convex() const {
  // below[P]: some member P1 <= P; above[P]: some member P3 >= P. The order
  // is generated by one-scale steps, so both propagate scale by scale.
  const std::size_t n = mask_.size();
  std::vector<std::uint8_t> below(n, 0), above(n, 0);
  const int kmin = min_bitile_scale(grid_), kmax = max_bitile_scale(grid_);
  for (int k = kmin; k <= kmax; ++k) {
    const std::size_t half = grid_.size() / 2;
    const std::size_t base = static_cast<std::size_t>(k - kmin) * half;
    for (std::size_t r = 0; r < half; ++r) {
      std::size_t i = base + r;
      below[i] = mask_[i];
      if (!below[i] && k > kmin) {
        Bitile p = bitile(i);
        auto [h0, h1] = p.time.halves();
        DyadicInterval w = p.freq.parent();
        below[i] = below[id({h0, w})] || below[id({h1, w})];
      }
    }
  }
  for (int k = kmax; k >= kmin; --k) {
    const std::size_t half = grid_.size() / 2;
    const std::size_t base = static_cast<std::size_t>(k - kmin) * half;
    for (std::size_t r = 0; r < half; ++r) {
      std::size_t i = base + r;
      above[i] = mask_[i];
      if (!above[i] && k < kmax) {
        Bitile p = bitile(i);
        DyadicInterval I = p.time.parent();
        auto [w0, w1] = p.freq.halves();
        above[i] = above[id({I, w0})] || above[id({I, w1})];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!mask_[i] && below[i] && above[i]) return false;
  return true;
}

BitileSet& BitileSet::operator|=(const BitileSet& o) {
  if (!(grid_ == o.grid_)) throw Error("grid mismatch");
  count_ = 0;
  for (std::size_t i = 0; i < mask_.size(); ++i) count_ += (mask_[i] |= o.mask_[i]);
  return *this;
}

BitileSet& BitileSet::operator-=(const BitileSet& o) {
  if (!(grid_ == o.grid_)) throw Error("grid mismatch");
  count_ = 0;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (o.mask_[i]) mask_[i] = 0;
    count_ += mask_[i];
  }
  return *this;
}

BitileSet& BitileSet::operator&=(const BitileSet& o) {
  if (!(grid_ == o.grid_)) throw Error("grid mismatch");
  count_ = 0;
  for (std::size_t i = 0; i < mask_.size(); ++i) count_ += (mask_[i] &= o.mask_[i]);
  return *this;
}

bool BitileSet::is_subset_of(const BitileSet& o) const {
  if (!(grid_ == o.grid_)) return false;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i] && !o.mask_[i]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Wave packets

double wave_packet_value(const Tile& p, const GridSpec& g, std::uint64_t cell) {
  const int k = p.time.scale;
  const int lbits = k + g.b;
  const std::uint64_t start = p.time.index << lbits;
  if (cell < start || cell - start >= (std::uint64_t{1} << lbits)) return 0.0;
  const std::uint64_t c = cell - start;
  const double amp = std::sqrt(std::ldexp(1.0, -k));
  return (popcount(c & bit_reverse(p.freq.index, lbits)) & 1) ? -amp : amp;
}

DiscreteSignal wave_packet(const Tile& p, const GridSpec& g) {
  if (!fits(p, g)) throw Error("tile outside the grid");
  DiscreteSignal out(g);
  const int lbits = p.time.scale + g.b;
  const std::uint64_t start = p.time.index << lbits;
  const std::uint64_t len = std::uint64_t{1} << lbits;
  for (std::uint64_t c = 0; c < len; ++c) out[start + c] = wave_packet_value(p, g, start + c);
  return out;
}

DiscreteSignal wave_packet_via_transform(const Tile& p, const GridSpec& g) {
  if (!fits(p, g)) throw Error("tile outside the grid");
  SpectralSignal ind(g);
  const int fbits = p.freq.scale + g.a;
  const std::uint64_t fstart = p.freq.index << fbits;
  for (std::uint64_t j = 0; j < (std::uint64_t{1} << fbits); ++j) ind[fstart + j] = 1.0;
  DiscreteSignal base = inverse_transform(ind);
  DiscreteSignal out(g);
  const double amp = std::sqrt(std::ldexp(1.0, p.time.scale));
  const std::uint64_t shift = p.time.index << (p.time.scale + g.b);
  // (1_w)^check is supported on [0, |I|); the xor moves it onto I.
  for (std::uint64_t x = 0; x < g.size(); ++x) out[x] = amp * base[x ^ shift];
  return out;
}

double packet_integral(const DiscreteSignal& f, const Tile& p) {
  const GridSpec& g = f.grid;
  if (!fits(p, g)) throw Error("tile outside the grid");
  const int lbits = p.time.scale + g.b;
  const std::uint64_t start = p.time.index << lbits;
  const std::uint64_t len = std::uint64_t{1} << lbits;
  const std::uint64_t rn = bit_reverse(p.freq.index, lbits);
  double acc = 0.0;
  for (std::uint64_t c = 0; c < len; ++c)
    acc += (popcount(c & rn) & 1) ? -f[start + c] : f[start + c];
  return g.time_weight() * acc;
}

double coefficient(const DiscreteSignal& f, const Tile& p) {
  return std::sqrt(std::ldexp(1.0, -p.time.scale)) * packet_integral(f, p);
}

int packet_sign(const Tile& p, const GridSpec& g, std::uint64_t cell) {
  const int lbits = p.time.scale + g.b;
  const std::uint64_t start = p.time.index << lbits;
  if (cell < start || cell - start >= (std::uint64_t{1} << lbits)) return 0;
  return (popcount((cell - start) & bit_reverse(p.freq.index, lbits)) & 1) ? -1 : 1;
}

double packet_term(const DiscreteSignal& f, const Tile& p, std::uint64_t cell) {
  const int s = packet_sign(p, f.grid, cell);
  if (s == 0) return 0.0;
  const double v = std::ldexp(packet_integral(f, p), -p.time.scale);
  return s > 0 ? v : -v;
}

// ---------------------------------------------------------------------------
// Covers and projections

std::vector<Tile> region_tiles(const BitileSet& s) {
  std::vector<Tile> out;
  for (const Bitile& p : s.members()) {
    out.push_back(p.upper());
    out.push_back(p.lower());
  }
  return out;
}

namespace {

DyadicInterval hull(const DyadicInterval& x, const DyadicInterval& y) {
  DyadicInterval h = x.scale >= y.scale ? x : y;
  const DyadicInterval& o = x.scale >= y.scale ? y : x;
  DyadicInterval oa = o.ancestor(h.scale);
  while (oa.index != h.index) {
    h = h.parent();
    oa = oa.parent();
  }
  return h;
}

// Union of tiles rasterized over its hull box with 2D prefix counts. Atoms
// are fine enough to resolve every tile that fits inside the hull box.
class Raster {
 public:
  Raster(const GridSpec& g, std::span<const Tile> region) {
    ht_ = region.front().time;
    hf_ = region.front().freq;
    for (const Tile& p : region) {
      if (!fits(p, g)) throw Error("tile outside the grid");
      ht_ = hull(ht_, p.time);
      hf_ = hull(hf_, p.freq);
    }
    ts_ = -hf_.scale;
    fs_ = -ht_.scale;
    for (const Tile& p : region) {
      ts_ = std::min(ts_, p.time.scale);
      fs_ = std::min(fs_, p.freq.scale);
    }
    nt_ = std::size_t{1} << (ht_.scale - ts_);
    nf_ = std::size_t{1} << (hf_.scale - fs_);
    if (nt_ * nf_ > (std::size_t{1} << 28)) throw Error("tile cover raster too large");
    std::vector<std::uint8_t> cov(nt_ * nf_, 0);
    for (const Tile& p : region) {
      std::size_t t0, t1, f0, f1;
      span(p.time, ht_, ts_, t0, t1);
      span(p.freq, hf_, fs_, f0, f1);
      for (std::size_t t = t0; t < t1; ++t)
        for (std::size_t w = f0; w < f1; ++w) cov[t * nf_ + w] = 1;
    }
    const std::size_t W = nf_ + 1;
    pre_.assign((nt_ + 1) * W, 0);
    for (std::size_t t = 0; t < nt_; ++t)
      for (std::size_t w = 0; w < nf_; ++w)
        pre_[(t + 1) * W + w + 1] =
            cov[t * nf_ + w] + pre_[t * W + w + 1] + pre_[(t + 1) * W + w] - pre_[t * W + w];
  }

  const DyadicInterval& time_hull() const { return ht_; }
  const DyadicInterval& freq_hull() const { return hf_; }

  std::uint64_t count(const DyadicInterval& I, const DyadicInterval& w) const {
    std::size_t t0, t1, f0, f1;
    span(I, ht_, ts_, t0, t1);
    span(w, hf_, fs_, f0, f1);
    const std::size_t W = nf_ + 1;
    return pre_[t1 * W + f1] - pre_[t0 * W + f1] - pre_[t1 * W + f0] + pre_[t0 * W + f0];
  }
  std::uint64_t area(const DyadicInterval& I, const DyadicInterval& w) const {
    return (std::uint64_t{1} << (I.scale - ts_)) * (std::uint64_t{1} << (w.scale - fs_));
  }

 private:
  static void span(const DyadicInterval& J, const DyadicInterval& h, int atom, std::size_t& lo,
                   std::size_t& hi) {
    if (J.scale < atom) throw Error("tile finer than cover raster");
    lo = (J.index << (J.scale - atom)) - (h.index << (h.scale - atom));
    hi = lo + (std::size_t{1} << (J.scale - atom));
  }

  DyadicInterval ht_, hf_;
  int ts_ = 0, fs_ = 0;
  std::size_t nt_ = 0, nf_ = 0;
  std::vector<std::uint32_t> pre_;
};

enum Outcome : std::uint8_t { kFail, kEmpty, kWhole, kTimeSplit, kFreqSplit };

class CoverSearch {
 public:
  CoverSearch(const GridSpec& g, const Raster& r, SplitOrder order) : g_(g), r_(r), order_(order) {}

  Outcome solve(const DyadicInterval& I, const DyadicInterval& w) {
    const std::uint64_t key = encode(I, w);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Outcome out = kFail;
    const std::uint64_t c = r_.count(I, w);
    if (c == 0) {
      out = kEmpty;
    } else if (I.scale + w.scale == 0) {
      out = c == r_.area(I, w) ? kWhole : kFail;
    } else {
      const bool tf = order_ == SplitOrder::time_first;
      out = tf ? try_time(I, w) : try_freq(I, w);
      if (out == kFail) out = tf ? try_freq(I, w) : try_time(I, w);
    }
    memo_.emplace(key, out);
    return out;
  }

  void emit(const DyadicInterval& I, const DyadicInterval& w, std::vector<Tile>& out) {
    switch (solve(I, w)) {
      case kEmpty:
        return;
      case kWhole:
        out.push_back({I, w});
        return;
      case kTimeSplit: {
        auto [i0, i1] = I.halves();
        emit(i0, w, out);
        emit(i1, w, out);
        return;
      }
      case kFreqSplit: {
        auto [w0, w1] = w.halves();
        emit(I, w0, out);
        emit(I, w1, out);
        return;
      }
      case kFail:
        throw Error("region not tileable by disjoint tiles");
    }
  }

 private:
  Outcome try_time(const DyadicInterval& I, const DyadicInterval& w) {
    if (I.scale <= -g_.b || I.scale + w.scale <= 0) return kFail;
    auto [i0, i1] = I.halves();
    return (solve(i0, w) != kFail && solve(i1, w) != kFail) ? kTimeSplit : kFail;
  }
  Outcome try_freq(const DyadicInterval& I, const DyadicInterval& w) {
    if (w.scale <= -g_.a || I.scale + w.scale <= 0) return kFail;
    auto [w0, w1] = w.halves();
    return (solve(I, w0) != kFail && solve(I, w1) != kFail) ? kFreqSplit : kFail;
  }
  std::uint64_t encode(const DyadicInterval& I, const DyadicInterval& w) const {
    const auto bits = static_cast<unsigned>(g_.bits());
    std::uint64_t key = static_cast<std::uint64_t>(I.scale + g_.b);
    key = (key << 6) | static_cast<std::uint64_t>(w.scale + g_.a);
    key = (key << bits) | I.index;
    key = (key << bits) | w.index;
    return key;
  }

  GridSpec g_;
  const Raster& r_;
  SplitOrder order_;
  std::unordered_map<std::uint64_t, Outcome> memo_;
};

}  // namespace

std::vector<Tile> tile_cover(const GridSpec& g, std::span<const Tile> region, SplitOrder order) {
  if (region.empty()) return {};
  if (g.bits() > 26) throw Error("tile cover limited to a + b <= 26");
  Raster raster(g, region);
  CoverSearch search(g, raster, order);
  std::vector<Tile> out;
  search.emit(raster.time_hull(), raster.freq_hull(), out);
  return out;
}

std::vector<Tile> tile_cover(const BitileSet& s, SplitOrder order) {
  std::vector<Tile> region = region_tiles(s);
  return tile_cover(s.grid(), region, order);
}

bool pairwise_disjoint(std::span<const Tile> tiles) {
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (std::size_t j = i + 1; j < tiles.size(); ++j)
      if (tiles[i].intersects(tiles[j])) return false;
  return true;
}

DiscreteSignal project(std::span<const Tile> cover, const DiscreteSignal& f) {
  if (!pairwise_disjoint(cover)) throw Error("overlapping tiles in cover");
  const GridSpec& g = f.grid;
  DiscreteSignal out(g);
  for (const Tile& p : cover) {
    const double c = std::ldexp(packet_integral(f, p), -p.time.scale);
    const int lbits = p.time.scale + g.b;
    const std::uint64_t start = p.time.index << lbits;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << lbits); ++i)
      out[start + i] += packet_sign(p, g, start + i) > 0 ? c : -c;
  }
  return out;
}

double projection_energy(std::span<const Tile> cover, const DiscreteSignal& f) {
  if (!pairwise_disjoint(cover)) throw Error("overlapping tiles in cover");
  double acc = 0.0;
  for (const Tile& p : cover) {
    const double c = coefficient(f, p);
    acc += c * c;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Fields

TFField::TFField(GridSpec g, std::vector<int> ks) : grid(g), scales(std::move(ks)) {
  check_dense(g);
  values.assign(slots() * g.size() * g.size(), 0.0);
}

namespace {

// Blockwise transform at scale k, reordered to frequency index and scaled.
std::vector<double> scaled_table(const DiscreteSignal& f, int k, double scale) {
  const GridSpec& g = f.grid;
  if (k < -g.b || k > g.a) throw Error("tile scale out of range");
  const int lbits = k + g.b;
  const std::size_t L = std::size_t{1} << lbits;
  std::vector<double> w = f.values;
  kernels::block_wht_parallel(w, L);
  // Hadamard row u of a block pairs with frequency index rev(u).
  std::vector<double> out(g.size());
  for (std::size_t s = 0; s < g.size(); s += L)
    for (std::size_t n = 0; n < L; ++n) out[s + n] = scale * w[s + bit_reverse(n, lbits)];
  return out;
}

}  // namespace

std::vector<double> tile_coefficients(const DiscreteSignal& f, int k) {
  return scaled_table(f, k, f.grid.time_weight() * std::sqrt(std::ldexp(1.0, -k)));
}

FieldEngine::FieldEngine(const DiscreteSignal& f, const BitileSet* restrict_to)
    : grid_(f.grid), set_(restrict_to) {
  if (set_ && !(set_->grid() == grid_)) throw Error("grid mismatch");
  // Tables hold <f,phi> |I|^{-1/2}, so a term is an entry times a sign.
  for (int j = min_scale(); j <= max_scale(); ++j)
    coef_.push_back(scaled_table(f, j, std::ldexp(1.0, -grid_.b - j)));
}

std::size_t FieldEngine::bitile_id(std::size_t x, std::size_t xi, int j) const {
  const GridSpec& g = grid_;
  const std::uint64_t n = xi >> (g.a - j);
  if (!(n & 1)) return npos;
  const std::size_t t = x >> (j + g.b);
  const std::size_t per_time = std::size_t{1} << (g.b - 1 + j);
  return static_cast<std::size_t>(j - min_scale()) * (g.size() / 2) + t * per_time + (n >> 1);
}

void FieldEngine::contributions(std::size_t x, std::size_t xi, std::span<double> out) const {
  const GridSpec& g = grid_;
  for (int j = min_scale(); j <= max_scale(); ++j) {
    double& o = out[static_cast<std::size_t>(j - min_scale())];
    o = 0.0;
    const std::uint64_t n = xi >> (g.a - j);
    if (!(n & 1)) continue;
    if (set_ && !set_->contains_id(bitile_id(x, xi, j))) continue;
    const int lbits = j + g.b;
    const std::size_t L = std::size_t{1} << lbits;
    const std::size_t t = x >> lbits;
    const std::size_t c = x & (L - 1);
    const std::uint64_t nl = n - 1;
    const double v = coef_[static_cast<std::size_t>(j - min_scale())][t * L + nl];
    o = (popcount(c & bit_reverse(nl, lbits)) & 1) ? -v : v;
  }
}

namespace {

// Fills every slot from per-scale terms and a weight table
// weight[slot][j - jmin] (or a per-bitile table when `per_bitile`).
// Terms are added in increasing scale, so every schedule gives the same bits.
template <class WeightAt>
TFField fill_field(const FieldEngine& eng, std::vector<int> ks, WeightAt weight) {
  const GridSpec g = eng.grid();
  TFField out(g, std::move(ks));
  const std::size_t N = g.size();
  const std::size_t S = out.slots();
  const auto nx = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel
  {
    std::vector<double> terms(static_cast<std::size_t>(eng.scale_count()));
#pragma omp for schedule(static)
    for (std::ptrdiff_t xs = 0; xs < nx; ++xs) {
      const auto x = static_cast<std::size_t>(xs);
      for (std::size_t xi = 0; xi < N; ++xi) {
        eng.contributions(x, xi, terms);
        for (std::size_t s = 0; s < S; ++s) {
          double acc = 0.0;
          for (int j = eng.min_scale(); j <= eng.max_scale(); ++j) {
            const double t = terms[static_cast<std::size_t>(j - eng.min_scale())];
            if (t != 0.0) acc += weight(s, x, xi, j) * t;
          }
          out.at(x, xi, s) = acc;
        }
      }
    }
  }
  return out;
}

std::vector<int> slot_scales(const GridSpec& g, std::span<const int> ks) {
  if (ks.empty()) return {g.a + 1};
  return {ks.begin(), ks.end()};
}

// Dense (bitile, slot) weight table evaluated serially up front.
std::vector<double> weight_table(const BitileSet& P, const std::vector<int>& kv, const WeightFn& eta) {
  std::vector<double> w(P.capacity() * kv.size(), 0.0);
  for (std::size_t id = 0; id < P.capacity(); ++id) {
    if (!P.contains_id(id)) continue;
    const Bitile p = P.bitile(id);
    for (std::size_t s = 0; s < kv.size(); ++s) {
      auto v = eta(p, kv[s]);
      if (!v) throw Error("missing weight for bitile in weighted field");
      w[id * kv.size() + s] = *v;
    }
  }
  return w;
}

}  // namespace

TFField partial_sum_field(const DiscreteSignal& f, const BitileSet& P) {
  check_dense(f.grid);
  FieldEngine eng(f, &P);
  return fill_field(eng, {}, [](std::size_t, std::size_t, std::size_t, int) { return 1.0; });
}

TFField truncated_field(const DiscreteSignal& f, const BitileSet& P, std::span<const int> ks) {
  check_dense(f.grid);
  FieldEngine eng(f, &P);
  std::vector<int> kv(ks.begin(), ks.end());
  return fill_field(eng, kv, [&kv](std::size_t s, std::size_t, std::size_t, int j) {
    return j < kv[s] ? 1.0 : 0.0;
  });
}

TFField averaging_field(const DiscreteSignal& f, int k) {
  const GridSpec& g = f.grid;
  check_dense(g);
  const std::vector<double> coef = scaled_table(f, k, std::ldexp(1.0, -g.b - k));
  TFField out(g, {k});
  const int lbits = k + g.b;
  const std::size_t L = std::size_t{1} << lbits;
  const auto nx = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t xs = 0; xs < nx; ++xs) {
    const auto x = static_cast<std::size_t>(xs);
    const std::size_t t = x >> lbits, c = x & (L - 1);
    for (std::size_t xi = 0; xi < g.size(); ++xi) {
      const std::size_t n = xi >> (g.a + k);
      const double v = coef[t * L + n];
      out.at(x, xi) = (popcount(c & bit_reverse(n, lbits)) & 1) ? -v : v;
    }
  }
  return out;
}

TFField weighted_field(const DiscreteSignal& f, const BitileSet& P, std::span<const int> ks,
                       const WeightFn& eta) {
  check_dense(f.grid);
  FieldEngine eng(f, &P);
  const std::vector<int> kv = slot_scales(f.grid, ks);
  const std::vector<double> w = weight_table(P, kv, eta);
  const std::size_t S = kv.size();
  TFField out = fill_field(eng, {ks.begin(), ks.end()},
                           [&](std::size_t s, std::size_t x, std::size_t xi, int j) {
                             return w[eng.bitile_id(x, xi, j) * S + s];
                           });
  return out;
}

TFField weighted_field_reference(const DiscreteSignal& f, const BitileSet& P,
                                 std::span<const int> ks, const WeightFn& eta) {
  const GridSpec& g = f.grid;
  check_dense(g);
  const std::vector<int> kv = slot_scales(g, ks);
  TFField out(g, {ks.begin(), ks.end()});
  for (const Bitile& p : P.members()) {
    const Tile lo = p.lower(), up = p.upper();
    const double c = std::ldexp(packet_integral(f, lo), -lo.time.scale);
    const int fbits = up.freq.scale + g.a;
    const std::size_t f0 = up.freq.index << fbits, fl = std::size_t{1} << fbits;
    const int tbits = lo.time.scale + g.b;
    const std::size_t t0 = lo.time.index << tbits, tl = std::size_t{1} << tbits;
    for (std::size_t s = 0; s < kv.size(); ++s) {
      auto v = eta(p, kv[s]);
      if (!v) throw Error("missing weight for bitile in weighted field");
      if (*v == 0.0) continue;
      for (std::size_t x = t0; x < t0 + tl; ++x)
        for (std::size_t xi = f0; xi < f0 + fl; ++xi) out.at(x, xi, s) += *v * c * packet_sign(lo, g, x);
    }
  }
  return out;
}

}  // namespace walshpp
