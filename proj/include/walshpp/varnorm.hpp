#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "walshpp/dyadic.hpp"

namespace walshpp {

using Point = std::vector<double>;

/// ||m||_{V^r} = sup |m| + sup over subsequences of (sum |increments|^r)^{1/r}.
double variation_norm(std::span<const double> seq, double r);
/// Points in R^d with the Euclidean norm.
double variation_norm(std::span<const Point> seq, double r);

/// The increment part alone, sup (sum |m_{i_t} - m_{i_{t-1}}|^r) (not rooted).
/// Long scalar sequences go through an O(n log n) upper envelope.
double variation_power(std::span<const double> seq, double r);
/// O(n^2) dynamic program over predecessors.
double variation_power_quadratic(std::span<const double> seq, double r);
double variation_power(std::span<const Point> seq, double r);

/// Enumerates every subsequence; reference for the dynamic program.
double variation_norm_brute_force(std::span<const double> seq, double r);

/// Right-open pieces [x_{i-1}, x_i) carrying values[i-1], zero elsewhere on [0, inf).
struct StepFunction {
  std::vector<DyadicRational> breakpoints;
  std::vector<double> values;

  void validate() const;
  std::size_t pieces() const { return values.size(); }
  double operator()(const DyadicRational& x) const;
  /// Piece values as seen along [0, inf), including the zero pieces before
  /// x_0 (when x_0 > 0) and after x_n.
  std::vector<double> value_sequence() const;
};

double variation_norm_step(const StepFunction& m, double r);

/// Greedy lambda-jump cover: next index is the first one leaving the open
/// ball of radius lambda around the current one. Indices are 0-based.
struct JumpCover {
  double lambda = 0.0;
  std::vector<std::size_t> indices;
  std::size_t count() const { return indices.size(); }
};

JumpCover jump_cover(std::span<const Point> c, double lambda);
JumpCover jump_cover(std::span<const double> c, double lambda);

/// rho(n, k) for n = -1, 0, ..., levels - 2, built from covers at 2^n lambda0.
/// Stored as rho[n + 1][k]; the last level maps everything to index 0.
struct ParentMap {
  double lambda0 = 0.0;
  std::vector<std::vector<std::size_t>> rho;

  std::size_t at(int n, std::size_t k) const { return rho[static_cast<std::size_t>(n + 1)][k]; }
  int levels() const { return static_cast<int>(rho.size()) - 1; }  // n ranges over [-1, levels)
};

/// Throws unless lambda0 is below every nonzero pairwise distance.
ParentMap parent_map(std::span<const Point> c, double lambda0);
/// Largest admissible lambda0 scaled by `fraction` in (0, 1).
double default_lambda0(std::span<const Point> c, double fraction = 0.5);

struct ParentMapCheck {
  bool telescoping = true;   // c_k = c_0 + sum_{n >= 0} (c_{rho(n,k)} - c_{rho(n+1,k)})
  bool increments = true;    // |c_{rho(n,k)} - c_{rho(n+1,k)}| < 2^{n+1} lambda0
  bool monotone = true;      // rho(n, .) nondecreasing
  bool terminal = true;      // rho(n, k) = 0 once 2^n lambda0 >= diam
  double max_residual = 0.0;
  bool ok() const { return telescoping && increments && monotone && terminal; }
};
ParentMapCheck check_parent_map(std::span<const Point> c, const ParentMap& p);

/// Level sets of the cumulative variation V on [0, x_n) and their coefficients.
struct DecompLevel {
  int j = 0;
  struct Piece {
    std::size_t l = 0;  // level index in [1, 2^j]
    DyadicRational lo, hi;
    double tilde_b = 0.0;
    double b = 0.0;
  };
  std::vector<Piece> pieces;  // nonempty level sets only, left to right
};

/// Value attached to a level set: the length-weighted mean of m, or the
/// midpoint of its range. Means only guarantee |b| <= 2^{1/r} ||m|| 2^{-j/r}.
enum class LevelValue { mean, midrange };

struct StepDecomposition {
  double norm = 0.0;  // ||m||_{V^r}
  double r = 1.0;
  LevelValue value = LevelValue::midrange;
  std::vector<double> cumulative;  // V at each piece of [0, x_n)
  std::vector<DecompLevel> levels;

  /// Partial sum through level J at a point.
  double partial_sum(int J, const DyadicRational& x) const;
};

StepDecomposition interval_decomposition(const StepFunction& m, double r, int j_max,
                                         LevelValue value = LevelValue::midrange);

struct DecompositionCheck {
  bool count_ok = true;         // |Upsilon_j| <= 2^j
  bool coefficient_ok = true;   // |b| <= ||m|| 2^{-j/r}
  bool disjoint_ok = true;
  bool tail_ok = true;          // sup |m - S_J| <= sum_{j > J} ||m|| 2^{-j/r}
  double worst_coefficient_ratio = 0.0;  // max |b| / (||m|| 2^{-j/r})
  double worst_tail_ratio = 0.0;
  bool ok() const { return count_ok && coefficient_ok && disjoint_ok && tail_ok; }
};
DecompositionCheck check_decomposition(const StepFunction& m, const StepDecomposition& d);

}  // namespace walshpp
