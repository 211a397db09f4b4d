#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "walshpp/trees.hpp"

namespace walshpp {

/// Frequency cells [lo, hi) assigned to trees[tree]; lo == hi when empty.
struct FreqPiece {
  std::size_t tree = 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

/// One piece per input tree, in input order. Nonempty pieces tile [0, 2^{a+b}).
struct FreqPartition {
  GridSpec grid;
  std::vector<FreqPiece> pieces;

  /// Index of the tree owning a frequency cell.
  std::size_t owner(std::uint64_t cell) const;
};

/// Case of u-overlapping trees, td-maximal among u-overlapping trees in their
/// union, every member having x in I_P. `x` is a time cell.
FreqPartition partition_u(std::uint64_t x, std::span<const Tree> trees);
/// Case of properly sorted l-overlapping trees; gaps join the piece on their left.
FreqPartition partition_l(std::uint64_t x, std::span<const Tree> trees);

/// Disjoint cover of the frequency cells and, exhaustively over cells,
/// {P : xi in w_{P_u}} contained in the owning tree.
ConditionReport check_partition(const FreqPartition& part, std::span<const Tree> trees);

/// sum_{P in s, |I_P| < 2^k} c_P 1_{w_{P_u}} on frequency cells; c is indexed
/// by bitile id. k = a + 1 keeps every member.
std::vector<double> upper_sum(const BitileSet& s, std::span<const double> c, int k);
std::vector<double> upper_sum(const BitileSet& s, std::span<const double> c);

/// V^r norm over [0, inf) of a function constant on frequency cells and zero
/// past the last cell.
double cell_variation_norm(std::span<const double> m, double r);

struct StackRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double constant = 0.0;
  bool ok = true;  // lhs <= constant * rhs
};

/// ||m||_{V^r} against |T|^{1/r} sup_T ||m_T||_{V^r}; constant 4.
StackRatio stack_variation_ratio(std::span<const Tree> trees, std::span<const double> c, double r);

enum class TruncMode {
  sup_k_var_xi,  // sup_k of V^r in xi, against |T|^{1/r} sup_T ||m_T||
  sup_xi_var_k,  // sup_xi of V^r in k, against sup_T ||m_T||
};

/// Truncations |I_P| < 2^k for k in [1 - b, a + 1]. Constants are
/// 4 (1 + 2^{1/r}) and 2 for the two modes.
StackRatio truncated_stack_ratio(std::span<const Tree> trees, std::span<const double> c, double r,
                                 TruncMode mode);

struct IdentityReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0; }
  void record(bool pass, const std::string& what);
  IdentityReport& operator+=(const IdentityReport& o);
};

/// Exact truncation identities of a single u- or l-overlapping tree at every
/// frequency cell and truncation level, including the monotone points xi_k.
IdentityReport tree_truncation_identities(const Tree& t, std::span<const double> c);

/// For a stack of u-overlapping trees: agreement off the critical intervals
/// of length 2^{-k} meeting the top frequencies, the value on each such
/// interval, their combination, and the D_k form with unit coefficients.
IdentityReport u_stack_truncation_identities(std::span<const Tree> trees, std::span<const double> c);

/// For a properly sorted l-stack: the |I_P| > 2^k part equals the critical
/// indicator times the full sum, and the |I_P| <= 2^k part its complement.
IdentityReport l_stack_truncation_identities(std::span<const Tree> trees, std::span<const double> c);

struct Stack {
  std::uint64_t x = 0;
  std::vector<Tree> trees;
};

/// Maximal u-overlapping trees of random top data in a random convex set,
/// cut down to members whose time interval contains x.
Stack random_u_stack(const GridSpec& g, std::size_t count, std::mt19937_64& rng);
/// l-overlapping output of proper_sort on random maximal trees, cut down to x.
Stack random_l_stack(const GridSpec& g, std::size_t count, std::mt19937_64& rng);
/// Multiples of 1/8 in [-2, 2], one per bitile id.
std::vector<double> random_coefficients(const GridSpec& g, std::mt19937_64& rng);

}  // namespace walshpp
