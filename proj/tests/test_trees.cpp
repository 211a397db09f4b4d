#include "doctest.h"

#include <cmath>
#include <random>

#include "walshpp/partition.hpp"
#include "walshpp/trees.hpp"

using namespace walshpp;

namespace {

GridSpec small_grid(std::mt19937_64& rng) {
  return GridSpec(1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 3));
}

DiscreteSignal dyadic_signal(const GridSpec& g, std::mt19937_64& rng) {
  DiscreteSignal f(g);
  for (double& v : f.values) v = std::uniform_int_distribution<int>(-8, 8)(rng) / 4.0;
  return f;
}

}  // namespace

TEST_SUITE("trees") {
  TEST_CASE("maximal trees have the requested shape") {
    const GridSpec g(2, 2);
    const BitileSet all = BitileSet::all(g);
    const DyadicRational xi = DyadicRational::fraction(5, 4);
    const DyadicInterval I{1, 0};
    for (Overlap o : {Overlap::any, Overlap::upper, Overlap::lower}) {
      const Tree t = maximal_tree(all, xi, I, o);
      const TreeKind k = classify(t);
      CHECK(k.is_tree);
      CHECK(has_tree_shape(t.members, xi, I));
      if (o == Overlap::upper) CHECK(k.u_overlapping);
      if (o == Overlap::lower) CHECK(k.l_overlapping);
      for (const Bitile& p : t.members.members()) {
        CHECK(I.contains(p.time));
        CHECK(p.freq.contains(xi));
      }
    }
    const Tree any = maximal_tree(all, xi, I);
    CHECK(any.members.size() ==
          maximal_tree(all, xi, I, Overlap::upper).members.size() +
              maximal_tree(all, xi, I, Overlap::lower).members.size());
  }

  TEST_CASE("random convex sets are convex") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) CHECK(random_convex_set(small_grid(rng), rng).is_convex());
  }

  TEST_CASE("selection and sorting postconditions") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 40; ++i) {
      const GridSpec g = small_grid(rng);
      const BitileSet P = random_convex_set(g, rng);
      const DiscreteSignal f = dyadic_signal(g, rng);
      const double size = tree_size(P, f);
      if (size > 0) {
        const int k = static_cast<int>(std::floor(-std::log2(size)));
        const Selection sel = select_trees(P, f, k);
        const ConditionReport r = check_selection(P, f, k, sel);
        CHECK_MESSAGE(r.ok, r.condition << " " << r.witness);
        CHECK_THROWS_AS(select_trees(P, f, k + 2), Error);
      }
      const std::vector<Tree> trees = random_maximal_trees(P, 1 + rng() % 4, rng);
      const SortedForest out = proper_sort(trees);
      const ConditionReport a = check_sorted_forest(out, trees);
      const ConditionReport b = check_properly_sorted(out.l_trees);
      CHECK_MESSAGE(a.ok, a.condition << " " << a.witness);
      CHECK_MESSAGE(b.ok, b.condition << " " << b.witness);
    }
  }

  TEST_CASE("size of a single packet tree") {
    const GridSpec g(2, 2);
    const Bitile p = make_bitile({0, 0}, {1, 1});
    const BitileSet P(g, std::vector<Bitile>{p});
    const DiscreteSignal f = wave_packet(p.lower(), g);
    // Pi_T f = f, ||f||_2 = 1, |I_T| = 1.
    CHECK(tree_size(P, f) == doctest::Approx(1.0));
    CHECK(tree_energy(P, f) == doctest::Approx(1.0));
  }

  TEST_CASE("counting function") {
    const GridSpec g(1, 1);
    const BitileSet all = BitileSet::all(g);
    const std::vector<Tree> trees{maximal_tree(all, DyadicRational(), {0, 0}),
                                  maximal_tree(all, DyadicRational(), {1, 0})};
    CHECK(counting_function(g, trees) == std::vector<double>{2, 2, 1, 1});
    CHECK(dyadic_bmo(g, std::vector<double>(4, 3.0)) == 0.0);
  }
}

TEST_SUITE("partition") {
  TEST_CASE("frequency partitions for generated stacks") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 60; ++i) {
      const GridSpec g = small_grid(rng);
      const Stack u = random_u_stack(g, 1 + rng() % 4, rng);
      const FreqPartition pu = partition_u(u.x, u.trees);
      const ConditionReport ru = check_partition(pu, u.trees);
      CHECK_MESSAGE(ru.ok, ru.condition << " " << ru.witness);
      CHECK(pu.pieces.size() == u.trees.size());
      const Stack l = random_l_stack(g, 1 + rng() % 4, rng);
      if (l.trees.empty()) continue;
      const ConditionReport rl = check_partition(partition_l(l.x, l.trees), l.trees);
      CHECK_MESSAGE(rl.ok, rl.condition << " " << rl.witness);
    }
  }

  TEST_CASE("stack variation inequalities and truncation identities") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 60; ++i) {
      const GridSpec g = small_grid(rng);
      const std::vector<double> c = random_coefficients(g, rng);
      const Stack st = (i % 2) ? random_u_stack(g, 1 + rng() % 4, rng) : random_l_stack(g, 1 + rng() % 4, rng);
      if (st.trees.empty()) continue;
      for (double r : {1.5, 2.0, 3.0}) {
        const StackRatio s = stack_variation_ratio(st.trees, c, r);
        CHECK(s.constant == 4.0);
        CHECK(s.ok);
        CHECK(truncated_stack_ratio(st.trees, c, r, TruncMode::sup_xi_var_k).ok);
        const StackRatio t = truncated_stack_ratio(st.trees, c, r, TruncMode::sup_k_var_xi);
        CHECK(t.constant == doctest::Approx(4.0 * (1.0 + std::pow(2.0, 1.0 / r))));
        CHECK(t.ok);
      }
      for (const Tree& t : st.trees) CHECK(tree_truncation_identities(t, c).ok());
    }
  }

  TEST_CASE("cell variation norm counts the zero tail") {
    // m = 2 on the only cell, then 0: sup 2 plus one jump of 2.
    CHECK(cell_variation_norm(std::vector<double>{2.0}, 2.0) == 4.0);
    CHECK(cell_variation_norm(std::vector<double>{1.0, -1.0}, 1.0) == 1.0 + 3.0);
  }
}
