#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "graphdiff/error.hpp"
#include "graphdiff/random.hpp"

namespace graphdiff {

// Simple undirected graph: symmetric binary adjacency with zero diagonal,
// plus optional categorical node labels and edge labels. Edge label 0 means
// "no edge"; labels are nonzero exactly where adjacency is 1.
class Graph {
 public:
  Graph() = default;

  explicit Graph(int n) {
    require(n >= 0, ErrorCategory::invalid_argument, "Graph: negative node count");
    n_ = n;
    adj_.assign(static_cast<size_t>(n) * n, 0);
  }

  int n() const { return n_; }

  bool has_edge(int u, int v) const { return adj_[idx(u, v)] != 0; }

  void add_edge(int u, int v, int edge_type = 1) {
    require(u >= 0 && u < n_ && v >= 0 && v < n_, ErrorCategory::invalid_argument,
            "Graph::add_edge: endpoint out of range");
    require(u != v, ErrorCategory::invalid_argument, "Graph::add_edge: self loops not supported");
    require(edge_type > 0, ErrorCategory::invalid_argument, "Graph::add_edge: edge type must be nonzero");
    adj_[idx(u, v)] = 1;
    adj_[idx(v, u)] = 1;
    if (!edge_attrs_.empty()) {
      edge_attrs_[idx(u, v)] = edge_type;
      edge_attrs_[idx(v, u)] = edge_type;
    } else if (edge_type != 1) {
      enable_edge_attrs();
      edge_attrs_[idx(u, v)] = edge_type;
      edge_attrs_[idx(v, u)] = edge_type;
    }
  }

  void remove_edge(int u, int v) {
    adj_[idx(u, v)] = 0;
    adj_[idx(v, u)] = 0;
    if (!edge_attrs_.empty()) {
      edge_attrs_[idx(u, v)] = 0;
      edge_attrs_[idx(v, u)] = 0;
    }
  }

  int degree(int v) const {
    int d = 0;
    for (int u = 0; u < n_; ++u) d += adj_[idx(v, u)];
    return d;
  }

  int edge_count() const {
    int m = 0;
    for (int u = 0; u < n_; ++u)
      for (int v = u + 1; v < n_; ++v) m += adj_[idx(u, v)];
    return m;
  }

  bool has_node_attrs() const { return !node_attrs_.empty(); }
  bool has_edge_attrs() const { return !edge_attrs_.empty(); }

  int node_attr(int v) const { return node_attrs_[static_cast<size_t>(v)]; }
  int edge_attr(int u, int v) const { return edge_attrs_.empty() ? (has_edge(u, v) ? 1 : 0) : edge_attrs_[idx(u, v)]; }

  void set_node_attrs(std::vector<int> attrs) {
    require(static_cast<int>(attrs.size()) == n_, ErrorCategory::invalid_argument,
            "Graph::set_node_attrs: length mismatch");
    node_attrs_ = std::move(attrs);
  }

  void set_node_attr(int v, int value) {
    if (node_attrs_.empty()) node_attrs_.assign(static_cast<size_t>(n_), 0);
    node_attrs_[static_cast<size_t>(v)] = value;
  }

  void enable_edge_attrs() {
    if (edge_attrs_.empty()) {
      edge_attrs_.assign(adj_.size(), 0);
      for (size_t i = 0; i < adj_.size(); ++i) edge_attrs_[i] = adj_[i] ? 1 : 0;
    }
  }

  // Enforces the class invariants; throws on violation. Used after bulk edits
  // and by file ingestion.
  void check_invariants() const {
    for (int u = 0; u < n_; ++u) {
      require(adj_[idx(u, u)] == 0, ErrorCategory::invalid_argument, "Graph: nonzero diagonal");
      for (int v = 0; v < n_; ++v) {
        require(adj_[idx(u, v)] == adj_[idx(v, u)], ErrorCategory::invalid_argument,
                "Graph: adjacency not symmetric");
        if (!edge_attrs_.empty()) {
          require((edge_attrs_[idx(u, v)] != 0) == (adj_[idx(u, v)] != 0), ErrorCategory::invalid_argument,
                  "Graph: edge attrs must be nonzero exactly on edges");
          require(edge_attrs_[idx(u, v)] == edge_attrs_[idx(v, u)], ErrorCategory::invalid_argument,
                  "Graph: edge attrs not symmetric");
        }
      }
    }
  }

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && adj_ == other.adj_ && node_attrs_ == other.node_attrs_ &&
           edge_attrs_ == other.edge_attrs_;
  }

  std::vector<int> degree_sequence() const {
    std::vector<int> d(n_);
    for (int v = 0; v < n_; ++v) d[v] = degree(v);
    return d;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    for (int u = 0; u < n_; ++u)
      if (adj_[idx(v, u)]) out.push_back(u);
    return out;
  }

  bool connected() const {
    if (n_ == 0) return true;
    std::vector<char> seen(static_cast<size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < n_; ++u) {
        if (adj_[idx(v, u)] && !seen[u]) {
          seen[u] = 1;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == n_;
  }

 private:
  size_t idx(int u, int v) const { return static_cast<size_t>(u) * n_ + v; }

  int n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<int> node_attrs_;  // empty when unattributed
  std::vector<int> edge_attrs_;  // empty when unattributed; 0 = no edge
};

// Bijection on {0..n-1}. map(i) is the new index of node i, so applying the
// permutation moves adjacency entry (i, j) to (map(i), map(j)); this is the
// matrix action P A P^T with P[map(i)][i] = 1.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<int> mapping) : map_(std::move(mapping)) {
    std::vector<char> seen(map_.size(), 0);
    for (int v : map_) {
      require(v >= 0 && v < static_cast<int>(map_.size()) && !seen[v], ErrorCategory::invalid_argument,
              "Permutation: mapping is not a bijection");
      seen[v] = 1;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> m(static_cast<size_t>(n));
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
  }

  int size() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_[static_cast<size_t>(i)]; }
  const std::vector<int>& mapping() const { return map_; }

  Permutation inverse() const {
    std::vector<int> inv(map_.size());
    for (size_t i = 0; i < map_.size(); ++i) inv[static_cast<size_t>(map_[i])] = static_cast<int>(i);
    return Permutation(std::move(inv));
  }

  bool operator==(const Permutation& other) const { return map_ == other.map_; }
  auto operator<=>(const Permutation& other) const { return map_ <=> other.map_; }

 private:
  std::vector<int> map_;
};

// Exact uniform sample from S_n (Fisher-Yates).
inline Permutation uniform_random_permutation(int n, Rng& rng) {
  require(n >= 1, ErrorCategory::invalid_argument, "uniform_random_permutation: n must be >= 1");
  std::vector<int> m(static_cast<size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(m[static_cast<size_t>(i)], m[static_cast<size_t>(j)]);
  }
  return Permutation(std::move(m));
}

inline Graph permute(const Graph& g, const Permutation& p) {
  require(p.size() == g.n(), ErrorCategory::invalid_argument, "permute: permutation size mismatch");
  Graph out(g.n());
  if (g.has_edge_attrs()) out.enable_edge_attrs();
  for (int u = 0; u < g.n(); ++u) {
    for (int v = u + 1; v < g.n(); ++v) {
      if (g.has_edge(u, v)) out.add_edge(p(u), p(v), g.edge_attr(u, v));
    }
  }
  if (g.has_node_attrs()) {
    std::vector<int> attrs(static_cast<size_t>(g.n()));
    for (int v = 0; v < g.n(); ++v) attrs[static_cast<size_t>(p(v))] = g.node_attr(v);
    out.set_node_attrs(std::move(attrs));
  }
  return out;
}

// Compact canonical encoding of a plain graph's adjacency (upper triangle
// bit-packed). Usable as an exact dictionary key for n <= 11.
struct GraphKey {
  int n = 0;
  std::uint64_t bits = 0;
  auto operator<=>(const GraphKey&) const = default;
};

inline GraphKey key_of(const Graph& g) {
  require(g.n() <= 11, ErrorCategory::unsupported_size, "key_of: supports n <= 11");
  GraphKey k{g.n(), 0};
  int bit = 0;
  for (int u = 0; u < g.n(); ++u)
    for (int v = u + 1; v < g.n(); ++v, ++bit)
      if (g.has_edge(u, v)) k.bits |= (1ULL << bit);
  return k;
}

inline Graph graph_of(const GraphKey& k) {
  Graph g(k.n);
  int bit = 0;
  for (int u = 0; u < k.n; ++u)
    for (int v = u + 1; v < k.n; ++v, ++bit)
      if (k.bits & (1ULL << bit)) g.add_edge(u, v);
  return g;
}

namespace detail {

// Iterated neighborhood color refinement (1-WL). Colors are stable hashes of
// (own color, sorted multiset of neighbor colors) and seed the isomorphism
// search with cheap invariants.
inline std::vector<std::uint64_t> wl_colors(const Graph& g, int rounds = 3) {
  const int n = g.n();
  std::vector<std::uint64_t> color(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    std::uint64_t c = 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(g.degree(v)) + 1);
    if (g.has_node_attrs()) c ^= 0xbf58476d1ce4e5b9ULL * (static_cast<std::uint64_t>(g.node_attr(v)) + 7);
    color[static_cast<size_t>(v)] = c;
  }
  std::vector<std::uint64_t> next(static_cast<size_t>(n));
  for (int r = 0; r < rounds; ++r) {
    for (int v = 0; v < n; ++v) {
      std::vector<std::uint64_t> neigh;
      for (int u = 0; u < n; ++u) {
        if (g.has_edge(v, u)) {
          std::uint64_t c = color[static_cast<size_t>(u)];
          c ^= 0x94d049bb133111ebULL * (static_cast<std::uint64_t>(g.edge_attr(v, u)) + 3);
          neigh.push_back(c);
        }
      }
      std::sort(neigh.begin(), neigh.end());
      std::uint64_t h = color[static_cast<size_t>(v)];
      for (std::uint64_t c : neigh) {
        h ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      next[static_cast<size_t>(v)] = h;
    }
    color.swap(next);
  }
  return color;
}

struct IsoSearch {
  const Graph& g1;
  const Graph& g2;
  std::vector<std::uint64_t> c1, c2;
  std::vector<int> order;     // g1 vertices in assignment order
  std::vector<int> mapping;   // g1 vertex -> g2 vertex or -1
  std::vector<char> used;     // g2 vertex used

  IsoSearch(const Graph& a, const Graph& b)
      : g1(a), g2(b), c1(wl_colors(a)), c2(wl_colors(b)),
        mapping(static_cast<size_t>(a.n()), -1), used(static_cast<size_t>(a.n()), 0) {
    // Assign highly constrained vertices first: rare color, then high degree,
    // preferring vertices adjacent to already ordered ones.
    const int n = g1.n();
    std::vector<int> remaining(static_cast<size_t>(n));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<char> placed(static_cast<size_t>(n), 0);
    while (!remaining.empty()) {
      int best = -1;
      long best_score = -1;
      for (int v : remaining) {
        long adj_placed = 0;
        for (int u = 0; u < n; ++u)
          if (placed[static_cast<size_t>(u)] && g1.has_edge(v, u)) ++adj_placed;
        const long score = adj_placed * 1000 + g1.degree(v);
        if (score > best_score) {
          best_score = score;
          best = v;
        }
      }
      order.push_back(best);
      placed[static_cast<size_t>(best)] = 1;
      remaining.erase(std::find(remaining.begin(), remaining.end(), best));
    }
  }

  bool feasible(int v1, int v2) const {
    if (c1[static_cast<size_t>(v1)] != c2[static_cast<size_t>(v2)]) return false;
    if (g1.has_node_attrs() && g1.node_attr(v1) != g2.node_attr(v2)) return false;
    for (int u1 = 0; u1 < g1.n(); ++u1) {
      const int u2 = mapping[static_cast<size_t>(u1)];
      if (u2 < 0) continue;
      if (g1.has_edge(v1, u1) != g2.has_edge(v2, u2)) return false;
      if (g1.has_edge(v1, u1) && g1.edge_attr(v1, u1) != g2.edge_attr(v2, u2)) return false;
    }
    return true;
  }

  bool search(size_t depth) {
    if (depth == order.size()) return true;
    const int v1 = order[depth];
    for (int v2 = 0; v2 < g2.n(); ++v2) {
      if (used[static_cast<size_t>(v2)] || !feasible(v1, v2)) continue;
      mapping[static_cast<size_t>(v1)] = v2;
      used[static_cast<size_t>(v2)] = 1;
      if (search(depth + 1)) return true;
      mapping[static_cast<size_t>(v1)] = -1;
      used[static_cast<size_t>(v2)] = 0;
    }
    return false;
  }
};

}  // namespace detail

// Exact isomorphism test (invariant-pruned backtracking). Attributes are part
// of the match when either graph carries them.
inline bool isomorphic(const Graph& g1, const Graph& g2) {
  if (g1.n() != g2.n()) return false;
  if (g1.n() == 0) return true;
  require(g1.n() <= 64, ErrorCategory::unsupported_size, "isomorphic: exact mode supports n <= 64");
  if (g1.edge_count() != g2.edge_count()) return false;
  if (g1.has_node_attrs() != g2.has_node_attrs()) return false;
  if (g1.has_edge_attrs() != g2.has_edge_attrs()) return false;
  auto d1 = g1.degree_sequence();
  auto d2 = g2.degree_sequence();
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  if (d1 != d2) return false;
  detail::IsoSearch s(g1, g2);
  {
    auto m1 = s.c1;
    auto m2 = s.c2;
    std::sort(m1.begin(), m1.end());
    std::sort(m2.begin(), m2.end());
    if (m1 != m2) return false;
  }
  return s.search(0);
}

// |{P in S_n : P A P^T = A}| by exhaustive enumeration. Exhaustive mode is
// limited to n <= 10.
inline long automorphism_count(const Graph& g) {
  require(g.n() <= 10, ErrorCategory::unsupported_size, "automorphism_count: exhaustive mode supports n <= 10");
  const int n = g.n();
  if (n == 0) return 1;
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  long count = 0;
  do {
    bool ok = true;
    for (int u = 0; u < n && ok; ++u) {
      if (g.has_node_attrs() && g.node_attr(u) != g.node_attr(perm[static_cast<size_t>(u)])) {
        ok = false;
        break;
      }
      for (int v = u + 1; v < n; ++v) {
        const int pu = perm[static_cast<size_t>(u)];
        const int pv = perm[static_cast<size_t>(v)];
        if (g.has_edge(u, v) != g.has_edge(pu, pv) ||
            (g.has_edge(u, v) && g.edge_attr(u, v) != g.edge_attr(pu, pv))) {
          ok = false;
          break;
        }
      }
    }
    if (ok) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

// All distinct adjacency matrices P A P^T. By orbit-stabilizer the result has
// n!/Aut(A) elements.
inline std::vector<Graph> isomorphism_class(const Graph& g) {
  require(g.n() <= 8, ErrorCategory::unsupported_size, "isomorphism_class: supports n <= 8");
  const int n = g.n();
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::set<GraphKey> seen;
  std::vector<Graph> out;
  do {
    Graph h = permute(g, Permutation(perm));
    GraphKey k = key_of(h);
    if (seen.insert(k).second) out.push_back(std::move(h));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Binarizes a continuous matrix in [0, 1]: average with the transpose, zero
// the diagonal, threshold at 0.5. Non-finite entries indicate a diverged
// sampling run and are rejected.
inline Graph quantize_adjacency(const std::vector<double>& x, int n) {
  require(static_cast<int>(x.size()) == n * n, ErrorCategory::invalid_argument,
          "quantize_adjacency: expected n*n values");
  Graph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double a = x[static_cast<size_t>(u) * n + v];
      const double b = x[static_cast<size_t>(v) * n + u];
      require(std::isfinite(a) && std::isfinite(b), ErrorCategory::diverged,
              "quantize_adjacency: non-finite entry (sampling diverged)");
      if (0.5 * (a + b) >= 0.5) g.add_edge(u, v);
    }
  }
  for (int u = 0; u < n; ++u) {
    require(std::isfinite(x[static_cast<size_t>(u) * n + u]), ErrorCategory::diverged,
            "quantize_adjacency: non-finite diagonal entry (sampling diverged)");
  }
  return g;
}

}  // namespace graphdiff
