#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "walshpp/phaseplane.hpp"

namespace walshpp {

/// Bitiles with top data (xi_T, I_T): I_P in I_T and xi_T in w_P for all P.
struct Tree {
  BitileSet members;
  DyadicRational top_freq;
  DyadicInterval top_interval;

  const GridSpec& grid() const { return members.grid(); }
};

struct TreeKind {
  bool is_tree = false;  // top data condition holds
  bool l_overlapping = false;
  bool u_overlapping = false;
  bool l_convex = false;
  bool convex = false;
};

TreeKind classify(const Tree& t);
bool has_tree_shape(const BitileSet& s, const DyadicRational& xi, const DyadicInterval& I);

/// P, P'' in s and P_l < P'_l < P''_l imply P' in s.
bool is_l_convex(const BitileSet& s);

enum class Overlap { any, upper, lower };

/// Largest tree in `within` with the given top data; with Overlap::upper
/// (lower) every member also has xi in w_{P_u} (w_{P_l}).
Tree maximal_tree(const BitileSet& within, const DyadicRational& xi, const DyadicInterval& I,
                  Overlap kind = Overlap::any);

/// ||Pi_T f||_2^2 over a disjoint tile cover of the region of T.
double tree_energy(const BitileSet& t, const DiscreteSignal& f);
/// |I_T|^{-1/2} ||Pi_T f||_2.
double tree_size_of(const Tree& t, const DiscreteSignal& f);

struct SizeWitness {
  double size = 0.0;
  DyadicRational xi;
  DyadicInterval I;
  bool found = false;
};

/// size(P, f) with the top data attaining it.
SizeWitness tree_size_witness(const BitileSet& P, const DiscreteSignal& f);
double tree_size(const BitileSet& P, const DiscreteSignal& f);

/// Counting function N = sum over trees of 1_{I_T}, measured against the
/// right-hand sides of the L1 and BMO bounds.
struct CountingReport {
  double l1_mass = 0.0;
  double bmo = 0.0;
  double l1_ratio = 0.0;   // l1_mass / (2^{2k} ||f||_2^2)
  double bmo_ratio = 0.0;  // bmo / (2^{2k} ||f||_inf^2)
};

std::vector<double> counting_function(const GridSpec& g, std::span<const Tree> trees);
double dyadic_bmo(const GridSpec& g, std::span<const double> v);

struct Selection {
  BitileSet remainder;
  std::vector<Tree> trees;
  CountingReport counting;
};

/// Greedy tree selection at level 2^-k; throws if size(P, f) > 2^-k.
Selection select_trees(const BitileSet& P, const DiscreteSignal& f, int k);

struct ConditionReport {
  bool ok = true;
  std::string condition;
  std::string witness;

  static ConditionReport pass() { return {}; }
  static ConditionReport fail(std::string c, std::string w) { return {false, std::move(c), std::move(w)}; }
};

ConditionReport check_selection(const BitileSet& P, const DiscreteSignal& f, int k,
                                const Selection& sel);

struct SortedForest {
  std::vector<Tree> u_trees;
  std::vector<Tree> l_trees;
};

/// Splits a union of convex, td-maximal trees into u-overlapping trees and a
/// properly sorted family of l-overlapping trees with matching top data.
SortedForest proper_sort(std::span<const Tree> trees);

/// l-convexity, pairwise disjointness, the top-frequency exclusion on upper
/// halves, and disjointness of all upper tiles.
ConditionReport check_properly_sorted(std::span<const Tree> l_trees);

/// Postconditions of proper_sort against the input family.
ConditionReport check_sorted_forest(const SortedForest& out, std::span<const Tree> input);

/// Union over members with x in I_P of w_{P_u}, in frequency cells.
struct CellRange {
  bool interval = true;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;  // half-open; lo == hi when empty
};
CellRange upper_union(const BitileSet& t, std::uint64_t x);

/// Both sides of the martingale form of a truncated u-tree sum:
///   sum_{P in T, |I_P| <= 2^k} <g,phi_{P_l}> phi_{P_l}
///   = F - s D_k[s F],  F the full tree sum, s = sgn(phi_{p_T}) (+1 off I_T).
struct TruncationSides {
  DiscreteSignal lhs;
  DiscreteSignal rhs;
};
TruncationSides tree_truncation_identity(const Tree& t, const DiscreteSignal& g, int k);

/// Sum over P in s of <g,phi_{P_l}> phi_{P_l}, optionally restricted to |I_P| <= 2^kmax.
DiscreteSignal lower_tile_sum(const BitileSet& s, const DiscreteSignal& g, int kmax);

// Random instances used by tests and the harness.

/// Convex set: up-closure of random generators cut by a down-closure, a scale
/// slab, and a time window.
BitileSet random_convex_set(const GridSpec& g, std::mt19937_64& rng);
/// Maximal trees of random top data inside `within`, nonempty and distinct.
std::vector<Tree> random_maximal_trees(const BitileSet& within, std::size_t count,
                                       std::mt19937_64& rng);

}  // namespace walshpp
