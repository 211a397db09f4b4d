#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walshpp/dyadic.hpp"
#include "walshpp/signal.hpp"

namespace walshpp {

/// Dyadic rectangle I x w of area 1.
struct Tile {
  DyadicInterval time;
  DyadicInterval freq;

  friend bool operator==(const Tile&, const Tile&) = default;
  friend auto operator<=>(const Tile&, const Tile&) = default;

  bool intersects(const Tile& o) const { return time.intersects(o.time) && freq.intersects(o.freq); }
};

/// Dyadic rectangle of area 2; splits into upper/lower (frequency halves)
/// and left/right (time halves) tiles.
struct Bitile {
  DyadicInterval time;
  DyadicInterval freq;

  friend bool operator==(const Bitile&, const Bitile&) = default;
  friend auto operator<=>(const Bitile&, const Bitile&) = default;

  Tile upper() const { return {time, freq.halves().second}; }
  Tile lower() const { return {time, freq.halves().first}; }
  Tile left() const { return {time.halves().first, freq}; }
  Tile right() const { return {time.halves().second, freq}; }
};

struct Subtiles {
  Tile u, l, s, d;
};
Subtiles subtiles(const Bitile& p);

std::string to_string(const DyadicInterval& I);
std::string to_string(const Tile& p);
std::string to_string(const Bitile& p);

Tile make_tile(DyadicInterval time, DyadicInterval freq);
Bitile make_bitile(DyadicInterval time, DyadicInterval freq);

/// I1 x w1 <= I2 x w2  iff  w2 in w1 and I1 in I2.
bool leq(const Tile& p, const Tile& q);
bool leq(const Bitile& p, const Bitile& q);

bool fits(const Tile& p, const GridSpec& g);
bool fits(const Bitile& p, const GridSpec& g);

/// Bitile scales on a grid: |I_P| = 2^k for k in [1 - b, a].
inline int min_bitile_scale(const GridSpec& g) { return 1 - g.b; }
inline int max_bitile_scale(const GridSpec& g) { return g.a; }

/// Dense membership set over all bitiles of a grid.
class BitileSet {
 public:
  BitileSet() = default;
  explicit BitileSet(GridSpec g);
  BitileSet(GridSpec g, std::span<const Bitile> members);
  static BitileSet all(GridSpec g);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool contains(const Bitile& p) const;
  bool contains_id(std::size_t id) const { return mask_[id] != 0; }
  void insert(const Bitile& p);
  void erase(const Bitile& p);

  /// Ordered by scale, then time index, then frequency index.
  std::vector<Bitile> members() const;

  /// For P1 <= P2 <= P3 with P1, P3 members, P2 is a member.
  bool is_convex() const;

  BitileSet& operator|=(const BitileSet& o);
  BitileSet& operator-=(const BitileSet& o);
  BitileSet& operator&=(const BitileSet& o);
  friend bool operator==(const BitileSet& x, const BitileSet& y) {
    return x.grid_ == y.grid_ && x.mask_ == y.mask_;
  }
  bool is_subset_of(const BitileSet& o) const;

  std::size_t id(const Bitile& p) const;
  Bitile bitile(std::size_t id) const;
  std::size_t capacity() const { return mask_.size(); }

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> mask_;
  std::size_t count_ = 0;
};

/// Value of the L2-normalized wave packet of `p` on time cell `cell`.
double wave_packet_value(const Tile& p, const GridSpec& g, std::uint64_t cell);
DiscreteSignal wave_packet(const Tile& p, const GridSpec& g);
/// Same packet built from |I|^{1/2} (1_w)^check(x xor inf I) with the grid
/// transform; kept as a second route for tests.
DiscreteSignal wave_packet_via_transform(const Tile& p, const GridSpec& g);

/// <f, phi_p> with the time weight.
double coefficient(const DiscreteSignal& f, const Tile& p);
/// <f, phi_p> |I_p|^{1/2}: the same integral against the +-1 sign pattern.
double packet_integral(const DiscreteSignal& f, const Tile& p);
/// Sign of phi_p on a cell, 0 off the support.
int packet_sign(const Tile& p, const GridSpec& g, std::uint64_t cell);
/// <f, phi_p> phi_p(x) computed without square roots; exact for dyadic data
/// of bounded precision.
double packet_term(const DiscreteSignal& f, const Tile& p, std::uint64_t cell);

enum class SplitOrder { frequency_first, time_first };

/// Disjoint tiles whose union is exactly the union of the given tiles.
/// Throws if the region is not a disjoint union of tiles.
std::vector<Tile> tile_cover(const GridSpec& g, std::span<const Tile> region,
                             SplitOrder order = SplitOrder::frequency_first);
std::vector<Tile> tile_cover(const BitileSet& s, SplitOrder order = SplitOrder::frequency_first);

/// Tiles covering a bitile set, as P_u and P_l of every member.
std::vector<Tile> region_tiles(const BitileSet& s);

/// Pi_S f for a cover of pairwise disjoint tiles; throws on overlap.
DiscreteSignal project(std::span<const Tile> cover, const DiscreteSignal& f);
/// Squared L2 norm of the projection, sum of squared coefficients.
double projection_energy(std::span<const Tile> cover, const DiscreteSignal& f);
bool pairwise_disjoint(std::span<const Tile> tiles);

/// Array over (time cell, frequency cell, scale slot).
struct TFField {
  GridSpec grid;
  std::vector<int> scales;  // empty: a single untruncated slot
  std::vector<double> values;

  TFField() = default;
  TFField(GridSpec g, std::vector<int> ks);

  std::size_t slots() const { return scales.empty() ? 1 : scales.size(); }
  double& at(std::size_t x, std::size_t xi, std::size_t slot = 0) {
    return values[(slot * grid.size() + x) * grid.size() + xi];
  }
  double at(std::size_t x, std::size_t xi, std::size_t slot = 0) const {
    return values[(slot * grid.size() + x) * grid.size() + xi];
  }
};

/// Wave-packet coefficients <f, phi_p> of every tile with |I_p| = 2^k,
/// stored at t * 2^(k+b) + n for I = [t 2^k, (t+1) 2^k), w = [n 2^-k, (n+1) 2^-k).
std::vector<double> tile_coefficients(const DiscreteSignal& f, int k);

/// Per-point access to the bitile sum  sum_P <f,phi_{P_l}> phi_{P_l}(x) 1_{w_{P_u}}(xi).
///
/// Holds the coefficient tables of the lower tiles at every bitile scale;
/// `contributions` yields the scale-by-scale terms at one (x, xi).
class FieldEngine {
 public:
  FieldEngine(const DiscreteSignal& f, const BitileSet* restrict_to = nullptr);

  const GridSpec& grid() const { return grid_; }
  int min_scale() const { return min_bitile_scale(grid_); }
  int max_scale() const { return max_bitile_scale(grid_); }
  int scale_count() const { return max_scale() - min_scale() + 1; }

  /// out[j - min_scale()] = term of the unique bitile of scale j containing
  /// (x, xi) in its upper half (0 when absent or excluded).
  void contributions(std::size_t x, std::size_t xi, std::span<double> out) const;
  /// Bitile id (in BitileSet numbering) behind out[j - min_scale()], or npos.
  std::size_t bitile_id(std::size_t x, std::size_t xi, int j) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  GridSpec grid_;
  const BitileSet* set_;
  std::vector<std::vector<double>> coef_;  // per bitile scale, lower-tile coefficients
};

/// S[f](xi, x) summed over the bitiles of P.
TFField partial_sum_field(const DiscreteSignal& f, const BitileSet& P);
/// S_k[f]: one slot per k, summing bitiles with |I_P| < 2^k.
TFField truncated_field(const DiscreteSignal& f, const BitileSet& P, std::span<const int> ks);
/// A_k[f](xi, x): sum over tiles with |I_p| = 2^k.
TFField averaging_field(const DiscreteSignal& f, int k);

using WeightFn = std::function<std::optional<double>(const Bitile&, int k)>;
/// sum_P eta(P, k) <f,phi_{P_l}> phi_{P_l}(x) 1_{w_{P_u}}(xi); throws when
/// eta has no value for some (P, k) in use. Empty ks: a single slot with k
/// passed as a+1.
TFField weighted_field(const DiscreteSignal& f, const BitileSet& P, std::span<const int> ks,
                       const WeightFn& eta);

/// Serial per-bitile summation kept as the reference for the kernels above.
TFField weighted_field_reference(const DiscreteSignal& f, const BitileSet& P,
                                 std::span<const int> ks, const WeightFn& eta);

}  // namespace walshpp
