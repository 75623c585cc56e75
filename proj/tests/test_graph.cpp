#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <numeric>

#include "graphdiff/graph.hpp"

using namespace graphdiff;

namespace {

Graph path3() {
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  return g;
}

Graph path(int n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph cycle(int n) {
  Graph g = path(n);
  g.add_edge(n - 1, 0);
  return g;
}

Graph random_graph(int n, Rng& rng, double p = 0.5) {
  Graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.add_edge(u, v);
  return g;
}

}  // namespace

TEST(Permute, IdentityIsNoop) {
  const Graph g = path3();
  EXPECT_EQ(permute(g, Permutation::identity(3)), g);
}

TEST(Permute, SwapEndsOfPathIsAutomorphism) {
  // Enumerate all 6 permutations of the 3-path: exactly the two that fix or
  // swap the endpoints preserve the adjacency matrix.
  const Graph g = path3();
  std::vector<int> perm{0, 1, 2};
  int fixed = 0;
  do {
    if (permute(g, Permutation(perm)) == g) ++fixed;
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_EQ(fixed, 2);
  EXPECT_EQ(permute(g, Permutation({2, 1, 0})), g);
}

TEST(Permute, CyclicShiftMovesCenter) {
  // Path with center at node 1; a cyclic shift must yield one of the other
  // two matrices in the 3-path class (center at node 2 here).
  const Graph g = path3();
  const Graph shifted = permute(g, Permutation({1, 2, 0}));
  EXPECT_NE(shifted, g);
  EXPECT_TRUE(shifted.has_edge(1, 2));
  EXPECT_TRUE(shifted.has_edge(2, 0));
  EXPECT_FALSE(shifted.has_edge(0, 1));
  EXPECT_TRUE(isomorphic(g, shifted));
}

TEST(Permute, InverseRestoresOriginal) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(1, 12);
    const Graph g = random_graph(n, rng);
    const Permutation p = uniform_random_permutation(n, rng);
    EXPECT_EQ(permute(permute(g, p), p.inverse()), g);
  }
}

TEST(Permute, AttributesFollowNodes) {
  Graph g(3);
  g.add_edge(0, 1, 2);
  g.set_node_attrs({5, 6, 7});
  const Graph h = permute(g, Permutation({1, 2, 0}));
  EXPECT_EQ(h.node_attr(1), 5);
  EXPECT_EQ(h.node_attr(2), 6);
  EXPECT_EQ(h.node_attr(0), 7);
  EXPECT_EQ(h.edge_attr(1, 2), 2);
}

TEST(Permute, SizeMismatchRejected) {
  EXPECT_THROW(permute(path3(), Permutation::identity(4)), Error);
}

TEST(Isomorphic, SelfIsIsomorphic) {
  const Graph g = path3();
  EXPECT_TRUE(isomorphic(g, g));
}

TEST(Isomorphic, WholeClassOfPath3IsPairwiseIsomorphic) {
  const auto cls = isomorphism_class(path3());
  ASSERT_EQ(cls.size(), 3u);
  for (const auto& a : cls)
    for (const auto& b : cls) EXPECT_TRUE(isomorphic(a, b));
}

TEST(Isomorphic, CycleVsPathFalse) {
  // Exhaustive cross-check over all 24 permutations of 4 nodes.
  const Graph c = cycle(4);
  const Graph p = path(4);
  EXPECT_FALSE(isomorphic(c, p));
  std::vector<int> perm{0, 1, 2, 3};
  bool any = false;
  do {
    any = any || permute(c, Permutation(perm)) == p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_FALSE(any);
}

TEST(Isomorphic, DifferentSizesFalse) { EXPECT_FALSE(isomorphic(path(3), path(4))); }

TEST(Isomorphic, MatchesBruteForceOnRandomPairs) {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(1, 5);
    const Graph a = random_graph(n, rng);
    Graph b = rng.bernoulli(0.5) ? permute(a, uniform_random_permutation(n, rng))
                                 : random_graph(n, rng);
    bool brute = false;
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      brute = brute || permute(a, Permutation(perm)) == b;
    } while (!brute && std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(isomorphic(a, b), brute);
  }
}

TEST(Isomorphic, EquivalenceRelationOnRandomTriples) {
  Rng rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const Graph a = random_graph(n, rng);
    const Graph b = permute(a, uniform_random_permutation(n, rng));
    const Graph c = permute(b, uniform_random_permutation(n, rng));
    EXPECT_TRUE(isomorphic(a, a));
    EXPECT_EQ(isomorphic(a, b), isomorphic(b, a));
    if (isomorphic(a, b) && isomorphic(b, c)) EXPECT_TRUE(isomorphic(a, c));
  }
}

TEST(Isomorphic, AttributeMismatchBreaksIsomorphism) {
  Graph a(2);
  a.add_edge(0, 1, 1);
  Graph b(2);
  b.add_edge(0, 1, 2);
  EXPECT_FALSE(isomorphic(a, b));
  Graph c(2);
  c.add_edge(0, 1, 2);
  EXPECT_TRUE(isomorphic(b, c));
}

TEST(Automorphisms, EmptyGraphHasAllPermutations) {
  EXPECT_EQ(automorphism_count(Graph(3)), 6);
}

TEST(Automorphisms, Path3HasTwo) { EXPECT_EQ(automorphism_count(path3()), 2); }

TEST(Automorphisms, SingleEdgeOn4NodesHasFour) {
  Graph g(4);
  g.add_edge(0, 1);
  EXPECT_EQ(automorphism_count(g), 4);
}

TEST(Automorphisms, SizeGuard) { EXPECT_THROW(automorphism_count(Graph(11)), Error); }

TEST(IsomorphismClass, Path3HasThreeMatrices) {
  EXPECT_EQ(isomorphism_class(path3()).size(), 3u);
}

TEST(IsomorphismClass, EmptyGraphSingleton) { EXPECT_EQ(isomorphism_class(Graph(4)).size(), 1u); }

TEST(IsomorphismClass, SingleEdgeOn4NodesHasSix) {
  Graph g(4);
  g.add_edge(0, 1);
  EXPECT_EQ(isomorphism_class(g).size(), 6u);
}

TEST(IsomorphismClass, OrbitStabilizerExhaustive) {
  Rng rng(51);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.uniform_int(1, 6);
    const Graph g = random_graph(n, rng);
    long long fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    EXPECT_EQ(static_cast<long long>(isomorphism_class(g).size()) * automorphism_count(g), fact);
  }
}

TEST(Quantize, AllZerosGivesEmptyGraph) {
  const std::vector<double> x(9, 0.0);
  EXPECT_EQ(quantize_adjacency(x, 3).edge_count(), 0);
}

TEST(Quantize, ThresholdAtHalf) {
  std::vector<double> x(9, 0.0);
  x[0 * 3 + 1] = x[1 * 3 + 0] = 0.49;
  x[0 * 3 + 2] = x[2 * 3 + 0] = 0.51;
  const Graph g = quantize_adjacency(x, 3);
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(0, 2));
}

TEST(Quantize, AsymmetricInputIsAveraged) {
  std::vector<double> x(9, 0.0);
  x[0 * 3 + 1] = 0.9;
  x[1 * 3 + 0] = 0.2;
  EXPECT_TRUE(quantize_adjacency(x, 3).has_edge(0, 1));  // mean 0.55
}

TEST(Quantize, TranspositionInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(25);
    for (double& v : x) v = rng.uniform();
    std::vector<double> xt(25);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) xt[static_cast<size_t>(i) * 5 + j] = x[static_cast<size_t>(j) * 5 + i];
    EXPECT_EQ(quantize_adjacency(x, 5), quantize_adjacency(xt, 5));
  }
}

TEST(Quantize, NanRejectedAsDiverged) {
  std::vector<double> x(9, 0.0);
  x[1] = std::nan("");
  try {
    quantize_adjacency(x, 3);
    FAIL() << "expected divergence error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::diverged);
  }
}

TEST(RandomPermutation, SizeOneIsIdentity) {
  Rng rng(1);
  EXPECT_EQ(uniform_random_permutation(1, rng), Permutation::identity(1));
}

TEST(RandomPermutation, SeedReproducible) {
  Rng a(99), b(99);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(uniform_random_permutation(6, a), uniform_random_permutation(6, b));
}

TEST(RandomPermutation, ChiSquareUniformOverS3) {
  Rng rng(2024);
  const int draws = 60000;
  std::map<std::vector<int>, int> counts;
  for (int i = 0; i < draws; ++i) counts[uniform_random_permutation(3, rng).mapping()]++;
  ASSERT_EQ(counts.size(), 6u);
  const double expected = draws / 6.0;
  double stat = 0.0;
  for (const auto& [_, c] : counts) stat += (c - expected) * (c - expected) / expected;
  // p > 0.001 for chi-square with 5 dof.
  boost::math::chi_squared chi(5.0);
  EXPECT_LT(stat, boost::math::quantile(chi, 0.999));
}
