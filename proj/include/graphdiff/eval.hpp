#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "graphdiff/error.hpp"
#include "graphdiff/graph.hpp"

namespace graphdiff {

// Normalized per-graph statistic histogram. Histograms entering the same MMD
// computation must share kind and bin count.
struct StatHistogram {
  std::string kind;
  std::vector<double> bins;

  void normalize() {
    double s = 0.0;
    for (double b : bins) s += b;
    if (s > 0)
      for (double& b : bins) b /= s;
  }
};

inline int max_degree(const std::vector<Graph>& graphs) {
  int d = 0;
  for (const auto& g : graphs)
    for (int v = 0; v < g.n(); ++v) d = std::max(d, g.degree(v));
  return d;
}

// Degree distribution: bin d holds the fraction of nodes with degree d.
// num_bins is shared across the compared sets (max observed degree + 1).
inline StatHistogram degree_hist(const Graph& g, int num_bins) {
  require(g.n() >= 1, ErrorCategory::invalid_argument, "degree_hist: empty graph");
  StatHistogram h{"degree", std::vector<double>(static_cast<size_t>(num_bins), 0.0)};
  for (int v = 0; v < g.n(); ++v) {
    const int d = std::min(g.degree(v), num_bins - 1);
    h.bins[static_cast<size_t>(d)] += 1.0;
  }
  h.normalize();
  return h;
}

inline double local_clustering(const Graph& g, int v) {
  const auto nb = g.neighbors(v);
  const int d = static_cast<int>(nb.size());
  if (d < 2) return 0.0;
  int links = 0;
  for (size_t i = 0; i < nb.size(); ++i)
    for (size_t j = i + 1; j < nb.size(); ++j)
      if (g.has_edge(nb[i], nb[j])) ++links;
  return 2.0 * links / (static_cast<double>(d) * (d - 1));
}

// Local clustering coefficients binned into `num_bins` equal bins on [0, 1].
inline StatHistogram clustering_hist(const Graph& g, int num_bins = 100) {
  require(g.n() >= 1, ErrorCategory::invalid_argument, "clustering_hist: empty graph");
  StatHistogram h{"clustering", std::vector<double>(static_cast<size_t>(num_bins), 0.0)};
  for (int v = 0; v < g.n(); ++v) {
    const double c = local_clustering(g, v);
    const int bin = std::min(static_cast<int>(c * num_bins), num_bins - 1);
    h.bins[static_cast<size_t>(bin)] += 1.0;
  }
  h.normalize();
  return h;
}

// Orbits of the six connected 4-node graphlets, indexed 0..10:
//   path:    0 end, 1 middle
//   star:    2 leaf, 3 center
//   cycle:   4
//   paw:     5 pendant, 6 cycle degree-2, 7 degree-3
//   diamond: 8 degree-2, 9 degree-3
//   clique: 10
inline constexpr int kOrbitCount = 11;

// Per-node orbit counts by exhaustive enumeration of node quadruples.
// Connected induced subgraphs on four nodes are classified by edge count and
// within-subgraph degree, which identifies the graphlet and the orbit.
inline std::vector<std::vector<long>> orbit_counts(const Graph& g) {
  const int n = g.n();
  std::vector<std::vector<long>> counts(static_cast<size_t>(n),
                                        std::vector<long>(kOrbitCount, 0));
  int quad[4];
  for (quad[0] = 0; quad[0] < n; ++quad[0])
    for (quad[1] = quad[0] + 1; quad[1] < n; ++quad[1])
      for (quad[2] = quad[1] + 1; quad[2] < n; ++quad[2])
        for (quad[3] = quad[2] + 1; quad[3] < n; ++quad[3]) {
          int deg[4] = {0, 0, 0, 0};
          int edges = 0;
          for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
              if (g.has_edge(quad[i], quad[j])) {
                ++edges;
                ++deg[i];
                ++deg[j];
              }
          if (edges < 3 || edges > 6) continue;
          // Connectivity: any degree-0 node disconnects the quadruple; with
          // >= 3 edges the only other disconnected shape is triangle+isolate
          // (degrees {2,2,2,0}), covered by the same test.
          bool connected = true;
          for (int i = 0; i < 4; ++i) connected = connected && deg[i] > 0;
          if (edges == 3) {
            // Two shapes: path {1,1,2,2} and star {1,1,1,3}; a triangle plus
            // isolated node has a zero degree and was rejected above.
            int ones = 0;
            for (int i = 0; i < 4; ++i) ones += deg[i] == 1;
            if (!connected) continue;
            if (ones == 2) {
              for (int i = 0; i < 4; ++i)
                counts[static_cast<size_t>(quad[i])][deg[i] == 1 ? 0 : 1]++;
            } else {
              for (int i = 0; i < 4; ++i)
                counts[static_cast<size_t>(quad[i])][deg[i] == 1 ? 2 : 3]++;
            }
          } else if (edges == 4) {
            if (!connected) continue;
            // Cycle {2,2,2,2} or paw {1,2,2,3}.
            bool cycle = true;
            for (int i = 0; i < 4; ++i) cycle = cycle && deg[i] == 2;
            if (cycle) {
              for (int i = 0; i < 4; ++i) counts[static_cast<size_t>(quad[i])][4]++;
            } else {
              for (int i = 0; i < 4; ++i) {
                const int orbit = deg[i] == 1 ? 5 : (deg[i] == 2 ? 6 : 7);
                counts[static_cast<size_t>(quad[i])][orbit]++;
              }
            }
          } else if (edges == 5) {
            for (int i = 0; i < 4; ++i)
              counts[static_cast<size_t>(quad[i])][deg[i] == 2 ? 8 : 9]++;
          } else {
            for (int i = 0; i < 4; ++i) counts[static_cast<size_t>(quad[i])][10]++;
          }
        }
  return counts;
}

// Aggregated orbit histogram. Bin 0 flags graphs without any connected
// 4-node graphlet (so the histogram stays normalizable); bins 1..11 hold the
// total per-orbit incidence mass.
inline StatHistogram orbit_hist(const Graph& g) {
  require(g.n() >= 1, ErrorCategory::invalid_argument, "orbit_hist: empty graph");
  StatHistogram h{"orbit", std::vector<double>(kOrbitCount + 1, 0.0)};
  const auto counts = orbit_counts(g);
  for (const auto& row : counts)
    for (int o = 0; o < kOrbitCount; ++o) h.bins[static_cast<size_t>(o) + 1] += static_cast<double>(row[o]);
  double total = 0.0;
  for (double b : h.bins) total += b;
  if (total == 0.0)
    h.bins[0] = 1.0;
  else
    h.normalize();
  return h;
}

// Squared maximum mean discrepancy between two sets of histograms with the
// Gaussian-of-total-variation kernel k(x, y) = exp(-TV(x,y)^2 / (2 delta^2)),
// TV = 0.5 * sum |x_i - y_i|. Biased (V-statistic) estimator including
// diagonal terms.
inline double mmd_tv(const std::vector<StatHistogram>& a, const std::vector<StatHistogram>& b,
                     double bandwidth = 1.0) {
  require(!a.empty() && !b.empty(), ErrorCategory::invalid_argument, "mmd_tv: empty sets");
  require(bandwidth > 0.0, ErrorCategory::invalid_argument, "mmd_tv: bandwidth must be positive");
  const size_t bins = a.front().bins.size();
  for (const auto& h : a)
    require(h.kind == a.front().kind && h.bins.size() == bins, ErrorCategory::invalid_argument,
            "mmd_tv: histogram kind/bin mismatch");
  for (const auto& h : b)
    require(h.kind == a.front().kind && h.bins.size() == bins, ErrorCategory::invalid_argument,
            "mmd_tv: histogram kind/bin mismatch");

  auto kernel = [&](const StatHistogram& x, const StatHistogram& y) {
    double tv = 0.0;
    for (size_t i = 0; i < bins; ++i) tv += std::abs(x.bins[i] - y.bins[i]);
    tv *= 0.5;
    return std::exp(-tv * tv / (2.0 * bandwidth * bandwidth));
  };
  double kaa = 0.0, kbb = 0.0, kab = 0.0;
  for (const auto& x : a)
    for (const auto& y : a) kaa += kernel(x, y);
  for (const auto& x : b)
    for (const auto& y : b) kbb += kernel(x, y);
  for (const auto& x : a)
    for (const auto& y : b) kab += kernel(x, y);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return kaa / (na * na) + kbb / (nb * nb) - 2.0 * kab / (na * nb);
}

// Fraction of generated graphs isomorphic to at least one training graph.
// Exact testing only; guarded to small sizes.
inline double recall_isomorphic(const std::vector<Graph>& generated,
                                const std::vector<Graph>& training) {
  require(!generated.empty() && !training.empty(), ErrorCategory::invalid_argument,
          "recall_isomorphic: empty inputs");
  for (const auto& g : generated)
    require(g.n() <= 20, ErrorCategory::unsupported_size, "recall_isomorphic: supports n <= 20");
  for (const auto& g : training)
    require(g.n() <= 20, ErrorCategory::unsupported_size, "recall_isomorphic: supports n <= 20");
  int hits = 0;
  for (const auto& g : generated) {
    for (const auto& t : training) {
      if (isomorphic(g, t)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(generated.size());
}

// Valence check: every node's bond-order sum (edge attribute value = bond
// order) must not exceed the table entry for its type. Unknown node types are
// invalid.
inline bool molecule_validity(const Graph& g, const std::map<int, int>& valence_table) {
  if (!g.has_node_attrs()) return false;
  for (int v = 0; v < g.n(); ++v) {
    const auto it = valence_table.find(g.node_attr(v));
    if (it == valence_table.end()) return false;
    int order = 0;
    for (int u = 0; u < g.n(); ++u)
      if (u != v && g.has_edge(v, u)) order += g.edge_attr(v, u);
    if (order > it->second) return false;
  }
  return true;
}

// Fraction of distinct isomorphism classes in a set (attributes matched).
inline double uniqueness(const std::vector<Graph>& graphs) {
  if (graphs.empty()) return 0.0;
  std::vector<size_t> representatives;
  for (const auto& g : graphs) {
    bool seen = false;
    for (size_t r : representatives)
      if (graphs[r].n() == g.n() && isomorphic(graphs[r], g)) {
        seen = true;
        break;
      }
    if (!seen) representatives.push_back(&g - graphs.data());
  }
  return static_cast<double>(representatives.size()) / static_cast<double>(graphs.size());
}

// Convenience: the three MMD metrics between two graph sets.
struct MmdReport {
  double degree = 0.0;
  double clustering = 0.0;
  double orbit = 0.0;
};

inline MmdReport evaluate_sets(const std::vector<Graph>& generated,
                               const std::vector<Graph>& reference, double bandwidth = 1.0,
                               int clustering_bins = 100) {
  require(!generated.empty() && !reference.empty(), ErrorCategory::invalid_argument,
          "evaluate_sets: empty inputs");
  const int deg_bins = std::max(max_degree(generated), max_degree(reference)) + 1;
  auto hists = [&](const std::vector<Graph>& set, auto&& fn) {
    std::vector<StatHistogram> out;
    out.reserve(set.size());
    for (const auto& g : set) out.push_back(fn(g));
    return out;
  };
  MmdReport r;
  r.degree = mmd_tv(hists(generated, [&](const Graph& g) { return degree_hist(g, deg_bins); }),
                    hists(reference, [&](const Graph& g) { return degree_hist(g, deg_bins); }),
                    bandwidth);
  r.clustering =
      mmd_tv(hists(generated, [&](const Graph& g) { return clustering_hist(g, clustering_bins); }),
             hists(reference, [&](const Graph& g) { return clustering_hist(g, clustering_bins); }),
             bandwidth);
  r.orbit = mmd_tv(hists(generated, [](const Graph& g) { return orbit_hist(g); }),
                   hists(reference, [](const Graph& g) { return orbit_hist(g); }), bandwidth);
  return r;
}

}  // namespace graphdiff
