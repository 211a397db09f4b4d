#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "walshpp/multnorm.hpp"
#include "walshpp/phaseplane.hpp"

namespace walshpp {

/// Frequency interval [lo, hi) with coefficient b; endpoints on the cell grid.
struct FreqInterval {
  DyadicRational lo;
  DyadicRational hi;
  double b = 1.0;
};

/// sum_v b_v 1_v on frequency cells; throws unless the intervals are disjoint.
Multiplier interval_multiplier(const GridSpec& g, std::span<const FreqInterval> ups);

/// Dyadic maximal function: per cell, the largest mean of |g| over dyadic
/// intervals containing it.
DiscreteSignal hl_maximal(const DiscreteSignal& g);

/// Maximal dyadic intervals inside a union of time cells.
std::vector<DyadicInterval> maximal_intervals(const GridSpec& g, std::span<const std::uint8_t> cells);

struct CZResult {
  GridSpec grid;
  double lambda = 0.0;
  double n = 0.0;  // |Xi| + |Upsilon|
  double B = 0.0;
  double threshold = 0.0;  // lambda / (n^{1/2} B)
  std::vector<std::uint8_t> in_e;
  std::vector<DyadicInterval> intervals;
  std::vector<DyadicRational> Lambda;
  DiscreteSignal good0;
  DiscreteSignal good;
  DiscreteSignal bad;
  bool degenerate = false;  // E is the whole time domain
};

/// Tiles I x w with |w| = |I|^{-1} and w meeting Lambda.
std::vector<Tile> cz_tiles(const CZResult& res, const DyadicInterval& I);

CZResult cz_decompose(const DiscreteSignal& g, double lambda, std::span<const DyadicRational> xi,
                      std::span<const FreqInterval> ups, double B);

/// (1 + log n) n^{1/2 - 1/r} sup_xi ||a_{w_k(xi)}||_{V^r_k} sup |b_v|, n = |Xi| + |Upsilon|.
double cz_constant(const MultiplierFamily& fam, std::span<const FreqInterval> ups, double r);

struct CZReport {
  bool sum_exact = true;        // good + bad == g
  bool bad_support = true;      // bad == 0 off E
  bool bad_cancellation = true; // <bad_I, phi_{I x w}> = 0
  bool h_support = true;
  bool h_cancellation = true;
  bool dk_support = true;       // (D_k h^)^check supported on E
  bool coefficient_bound = true;
  bool measure_bound = true;
  bool good_bound = true;       // |good - good0| <= threshold off E
  double max_residual = 0.0;
  std::string witness;

  bool ok() const {
    return sum_exact && bad_support && bad_cancellation && h_support && h_cancellation && dk_support &&
           coefficient_bound && measure_bound && good_bound;
  }
};

/// `g` is the decomposed input; D_k is taken over the scales of `fam`.
CZReport verify_bad_function(const CZResult& res, const DiscreteSignal& g, std::span<const FreqInterval> ups,
                             const MultiplierFamily& fam);

}  // namespace walshpp
