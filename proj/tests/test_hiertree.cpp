#include <gtest/gtest.h>

#include <set>

#include "hrc/hiertree.hpp"
#include "oracles.hpp"

using namespace hrc;

TEST(HierTree, SingleLeaf) {
  const HierTree t = single_leaf_tree();
  EXPECT_EQ(t.n_leaves(), 1u);
  EXPECT_TRUE(splits(t).empty());
  EXPECT_EQ(serialize(t), "0");
}

TEST(HierTree, RejectsMalformedNodeArrays) {
  using N = HierTree::Node;
  // duplicate leaf
  EXPECT_THROW(HierTree({N{kNone, kNone, 0}, N{kNone, kNone, 0}, N{0, 1, kNone}}, 2),
               std::invalid_argument);
  // leaf index out of range
  EXPECT_THROW(HierTree({N{kNone, kNone, 0}, N{kNone, kNone, 5}, N{0, 1, kNone}}, 2),
               std::invalid_argument);
  // internal node with one child
  EXPECT_THROW(HierTree({N{kNone, kNone, 0}, N{0, kNone, kNone}}, 1), std::invalid_argument);
  // node with two parents
  EXPECT_THROW(HierTree({N{kNone, kNone, 0}, N{kNone, kNone, 1}, N{kNone, kNone, 2}, N{0, 1, kNone},
                         N{1, 2, kNone}},
                        4),
               std::invalid_argument);
}

TEST(Splits, TwoLeaves) {
  const auto s = splits(parse("(1,0)"));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].parent, (IndexSet{0, 1}));
  EXPECT_EQ(s[0].left, (IndexSet{0}));
  EXPECT_EQ(s[0].right, (IndexSet{1}));
}

TEST(Splits, CaterpillarRootFirst) {
  const auto s = splits(parse("((0,1),2)"));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].parent, (IndexSet{0, 1, 2}));
  EXPECT_EQ(s[0].left, (IndexSet{0, 1}));
  EXPECT_EQ(s[0].right, (IndexSet{2}));
  EXPECT_EQ(s[1].parent, (IndexSet{0, 1}));
  EXPECT_EQ(s[1].left, (IndexSet{0}));
  EXPECT_EQ(s[1].right, (IndexSet{1}));
}

TEST(Splits, BalancedFourLeaves) {
  const auto s = splits(parse("((0,1),(2,3))"));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].left, (IndexSet{0, 1}));
  EXPECT_EQ(s[0].right, (IndexSet{2, 3}));
  EXPECT_EQ(s[1].parent, (IndexSet{0, 1}));
  EXPECT_EQ(s[2].parent, (IndexSet{2, 3}));
}

TEST(LcaLeafCount, Examples) {
  EXPECT_EQ(lca_leaf_count(parse("(0,1)"), 0, 1), 2u);
  const HierTree t = parse("((0,1),2)");
  EXPECT_EQ(lca_leaf_count(t, 0, 1), 2u);
  EXPECT_EQ(lca_leaf_count(t, 0, 2), 3u);
  EXPECT_EQ(lca_leaf_count(t, 1, 2), 3u);
  EXPECT_THROW(lca_leaf_count(t, 1, 1), std::invalid_argument);
  EXPECT_THROW(lca_leaf_count(t, 1, 3), std::out_of_range);
}

TEST(LcaLeafCount, MatchesOracleOnRandomTrees) {
  RngStream rng(3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(30);
    const HierTree tree = oracle::random_topology(rng, n);
    const LcaIndex lca(tree);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const std::size_t expected = oracle::lca_size(tree, i, j);
        EXPECT_EQ(lca_leaf_count(tree, i, j), expected);
        EXPECT_EQ(tree.leaf_count(lca.lca_of_leaves(i, j)), expected);
        EXPECT_GE(expected, 2u);
        EXPECT_LE(expected, n);
      }
  }
}

TEST(EnumerateTrees, CountsMatchDoubleFactorial) {
  for (std::size_t n = 2; n <= 7; ++n) {
    const auto trees = enumerate_trees(n);
    EXPECT_EQ(trees.size(), oracle::double_factorial_odd(2 * n - 3)) << "n=" << n;
    EXPECT_EQ(trees.size(), count_trees(n));
    std::set<std::string> keys;
    for (const auto& t : trees) keys.insert(serialize(t));
    EXPECT_EQ(keys.size(), trees.size()) << "duplicate topology at n=" << n;
  }
  EXPECT_EQ(enumerate_trees(3).size(), 3u);
  EXPECT_EQ(enumerate_trees(5).size(), 105u);
  EXPECT_EQ(enumerate_trees(6).size(), 945u);
}

TEST(EnumerateTrees, RangeGuard) {
  EXPECT_THROW(enumerate_trees(1), std::invalid_argument);
  EXPECT_THROW(enumerate_trees(8), std::invalid_argument);
}

TEST(EnumerateTrees, SortedBySerialization) {
  const auto trees = enumerate_trees(5);
  for (std::size_t k = 1; k < trees.size(); ++k) EXPECT_LT(serialize(trees[k - 1]), serialize(trees[k]));
}

namespace {

void expect_pair_coverage(const HierTree& t) {
  const std::size_t n = t.n_leaves();
  std::vector<int> covered(n * n, 0);
  std::size_t cross_total = 0;
  for (const Split& s : splits(t)) {
    cross_total += s.left.size() * s.right.size();
    for (Index i : s.left)
      for (Index j : s.right) {
        covered[i * n + j]++;
        covered[j * n + i]++;
      }
  }
  EXPECT_EQ(cross_total, n * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) EXPECT_EQ(covered[i * n + j], 1);
}

}  // namespace

TEST(Properties, PairCoverageOnEnumeratedTrees) {
  for (std::size_t n = 2; n <= 6; ++n)
    for (const auto& t : enumerate_trees(n)) expect_pair_coverage(t);
}

TEST(Properties, PairCoverageOnRandomLargeTrees) {
  RngStream rng(99);
  for (int k = 0; k < 100; ++k) expect_pair_coverage(oracle::random_topology(rng, 50));
}

TEST(Serialize, CanonicalOrderIgnoresChildOrder) {
  EXPECT_EQ(serialize(parse("(2,(1,0))")), "((0,1),2)");
  EXPECT_EQ(serialize(parse("((3,2),(1,0))")), "((0,1),(2,3))");
  EXPECT_EQ(serialize(parse(" ( ( 0 , 1 ) ,\n 2 ) ")), "((0,1),2)");
}

TEST(Serialize, RoundTripsRandomTrees) {
  RngStream rng(8);
  for (int k = 0; k < 50; ++k) {
    const HierTree t = oracle::random_topology(rng, 1 + rng.below(40));
    const std::string text = serialize(t);
    const HierTree back = parse(text);
    EXPECT_EQ(serialize(back), text);
    for (Index i = 0; i < t.n_leaves(); ++i)
      for (Index j = i + 1; j < t.n_leaves(); ++j)
        EXPECT_EQ(lca_leaf_count(back, i, j), lca_leaf_count(t, i, j));
  }
}

TEST(Parse, ReportsErrorPositions) {
  auto position_of = [](const char* text) -> std::size_t {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.position();
    }
    return SIZE_MAX;
  };
  EXPECT_EQ(position_of("((0,1)2)"), 6u);
  EXPECT_EQ(position_of("(0,1"), 4u);
  EXPECT_EQ(position_of("(0,x)"), 3u);
  EXPECT_EQ(position_of("(0,1))"), 5u);
  EXPECT_EQ(position_of("((0,1),1)"), 7u);  // duplicate
  EXPECT_EQ(position_of("((0,1),3)"), 7u);  // 2 missing, 3 out of range
  EXPECT_EQ(position_of("(0,1):2"), 5u);    // weights need parse_weighted
  EXPECT_EQ(position_of(""), 0u);
}

TEST(ParseWeighted, RoundTrip) {
  auto [tree, w] = parse_weighted("((0,1):1,(2,3):1.5):2");
  EXPECT_EQ(tree.n_leaves(), 4u);
  EXPECT_EQ(w[tree.root()], 2.0);
  EXPECT_EQ(serialize_weighted(tree, w), "((0,1):1,(2,3):1.5):2");
  EXPECT_THROW(parse_weighted("((0,1),(2,3):1):2"), ParseError);
}
