#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "graphdiff/edm.hpp"
#include "graphdiff/encoding.hpp"
#include "graphdiff/graph.hpp"
#include "graphdiff/graph_io.hpp"

namespace graphdiff {

// 2D lattice graphs with rows x cols nodes; row/col counts drawn uniformly
// from inclusive ranges.
inline Graph grid_graph(int rows, int cols) {
  Graph g(rows * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) g.add_edge(v, v + 1);
      if (r + 1 < rows) g.add_edge(v, v + cols);
    }
  return g;
}

inline std::vector<Graph> generate_grid(int rows_lo, int rows_hi, int cols_lo, int cols_hi,
                                        int count, Rng& rng) {
  require(rows_lo >= 1 && cols_lo >= 1 && rows_lo <= rows_hi && cols_lo <= cols_hi,
          ErrorCategory::invalid_argument, "generate_grid: empty range");
  require(count >= 0, ErrorCategory::invalid_argument, "generate_grid: negative count");
  std::vector<Graph> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(grid_graph(rng.uniform_int(rows_lo, rows_hi), rng.uniform_int(cols_lo, cols_hi)));
  return out;
}

// Two equal-sized dense blocks with sparse connections between them. Block
// sizes are drawn so the node count lies in [12, 20]. A negative p_inter
// selects the default calibration: about 0.05 * |V| expected cross edges.
inline std::vector<Graph> generate_community_small(int count, Rng& rng, double p_intra = 0.7,
                                                   double p_inter = -1.0) {
  require(p_intra >= 0.0 && p_intra <= 1.0, ErrorCategory::invalid_argument,
          "generate_community_small: p_intra must be in [0,1]");
  require(p_inter <= 1.0, ErrorCategory::invalid_argument,
          "generate_community_small: p_inter must be <= 1");
  std::vector<Graph> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int half = rng.uniform_int(6, 10);
    const int n = 2 * half;
    const double cross = p_inter >= 0.0 ? p_inter : 0.05 * n / (static_cast<double>(half) * half);
    Graph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        const bool same_block = (u < half) == (v < half);
        if (rng.bernoulli(same_block ? p_intra : cross)) g.add_edge(u, v);
      }
    out.push_back(std::move(g));
  }
  return out;
}

// Random d-regular simple graph via the pairing model: stubs are matched one
// edge at a time, rejecting self loops and duplicate edges, restarting when
// no legal pair remains.
inline Graph random_regular_graph(int n, int degree, Rng& rng, int max_restarts = 2000) {
  require(n >= 1 && degree >= 0 && degree < n, ErrorCategory::invalid_argument,
          "random_regular_graph: need 0 <= degree < n");
  require((static_cast<long long>(n) * degree) % 2 == 0, ErrorCategory::invalid_argument,
          "random_regular_graph: n * degree must be even");
  for (int attempt = 0; attempt < max_restarts; ++attempt) {
    Graph g(n);
    std::vector<int> stubs;
    stubs.reserve(static_cast<size_t>(n) * degree);
    for (int v = 0; v < n; ++v)
      for (int d = 0; d < degree; ++d) stubs.push_back(v);
    bool ok = true;
    while (!stubs.empty() && ok) {
      // Draw a random stub pair; retry a bounded number of times before
      // declaring the partial matching stuck.
      bool paired = false;
      for (int tries = 0; tries < 200; ++tries) {
        const size_t i = static_cast<size_t>(rng.below(stubs.size()));
        size_t j = static_cast<size_t>(rng.below(stubs.size() - 1));
        if (j >= i) ++j;
        const int u = stubs[i], v = stubs[j];
        if (u == v || g.has_edge(u, v)) continue;
        g.add_edge(u, v);
        const size_t hi = std::max(i, j), lo = std::min(i, j);
        stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(hi));
        stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(lo));
        paired = true;
        break;
      }
      ok = paired;
    }
    if (ok) return g;
  }
  throw Error(ErrorCategory::internal, "random_regular_graph: construction failed after max restarts");
}

// The 10-graph toy set: one random regular graph on 16 nodes for every
// degree in [2, 11], in shuffled degree order. Distinct degrees make the
// graphs pairwise non-isomorphic.
inline std::vector<Graph> generate_regular_toy(Rng& rng) {
  std::vector<int> degrees;
  for (int d = 2; d <= 11; ++d) degrees.push_back(d);
  for (size_t i = degrees.size(); i > 1; --i)
    std::swap(degrees[i - 1], degrees[static_cast<size_t>(rng.below(i))]);
  std::vector<Graph> out;
  out.reserve(degrees.size());
  for (int d : degrees) out.push_back(random_regular_graph(16, d, rng));
  return out;
}

// Seeded random split; the train side gets round(ratio * size) graphs.
inline std::pair<std::vector<Graph>, std::vector<Graph>> split(const std::vector<Graph>& data,
                                                               double ratio, Rng& rng) {
  require(ratio >= 0.0 && ratio <= 1.0, ErrorCategory::invalid_argument,
          "split: ratio must be in [0,1]");
  std::vector<size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<size_t>(rng.below(i))]);
  const size_t train_count =
      static_cast<size_t>(std::llround(ratio * static_cast<double>(data.size())));
  std::pair<std::vector<Graph>, std::vector<Graph>> out;
  for (size_t i = 0; i < idx.size(); ++i)
    (i < train_count ? out.first : out.second).push_back(data[idx[i]]);
  return out;
}

// Padded training batch: [-1, 1] channels, zero padding, and per-graph node
// masks. Plain graphs use the single +-1 adjacency channel; attributed graphs
// use the encoding scheme's channels.
struct GraphBatch {
  Field clean;
  nn::Tensor node_mask;   // [B, max_n]
  nn::Tensor entry_mask;  // [B, max_n, max_n, 1]
  std::vector<int> sizes;
};

inline GraphBatch batch(const std::vector<Graph>& graphs, int max_n,
                        const EncodingScheme* scheme = nullptr) {
  GraphBatch out;
  const int B = static_cast<int>(graphs.size());
  const int Ce = scheme ? scheme->edge_channels() : 1;
  const int Cv = scheme && scheme->num_node_types > 1 ? scheme->node_channels() : 0;
  out.clean.edge = nn::Tensor::zeros({B, max_n, max_n, Ce});
  if (Cv > 0) out.clean.node = nn::Tensor::zeros({B, max_n, Cv});
  out.node_mask = nn::Tensor::zeros({B, max_n});
  out.entry_mask = nn::Tensor::zeros({B, max_n, max_n, 1});
  for (int b = 0; b < B; ++b) {
    const Graph& g = graphs[static_cast<size_t>(b)];
    require(g.n() <= max_n, ErrorCategory::invalid_argument,
            "batch: graph larger than max_n");
    out.sizes.push_back(g.n());
    if (scheme) {
      const EncodedGraph enc = encode_attributes(g, *scheme);
      for (int u = 0; u < g.n(); ++u)
        for (int v = 0; v < g.n(); ++v)
          for (int c = 0; c < Ce; ++c)
            out.clean.edge[((static_cast<std::int64_t>(b) * max_n + u) * max_n + v) * Ce + c] =
                enc.edge[(static_cast<size_t>(u) * g.n() + v) * Ce + c];
      for (int v = 0; v < g.n() && Cv > 0; ++v)
        for (int c = 0; c < Cv; ++c)
          out.clean.node[(static_cast<std::int64_t>(b) * max_n + v) * Cv + c] =
              enc.node[static_cast<size_t>(v) * Cv + c];
    } else {
      for (int u = 0; u < g.n(); ++u)
        for (int v = 0; v < g.n(); ++v)
          out.clean.edge[(static_cast<std::int64_t>(b) * max_n + u) * max_n + v] =
              (u != v && g.has_edge(u, v)) ? 1.0 : -1.0;
    }
    for (int u = 0; u < g.n(); ++u) {
      out.node_mask[static_cast<std::int64_t>(b) * max_n + u] = 1.0;
      for (int v = 0; v < g.n(); ++v)
        out.entry_mask[(static_cast<std::int64_t>(b) * max_n + u) * max_n + v] = 1.0;
    }
  }
  return out;
}

// Recovers the graphs of a plain batch (test utility and sanity checks).
inline std::vector<Graph> unbatch(const GraphBatch& b) {
  std::vector<Graph> out;
  const int B = b.clean.edge.numel() ? b.clean.edge.dim(0) : 0;
  const int max_n = B ? b.clean.edge.dim(1) : 0;
  for (int s = 0; s < B; ++s) {
    const int n = b.sizes[static_cast<size_t>(s)];
    std::vector<double> probs(static_cast<size_t>(n) * n, 0.0);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        probs[static_cast<size_t>(u) * n + v] =
            (b.clean.edge[(static_cast<std::int64_t>(s) * max_n + u) * max_n + v] + 1.0) / 2.0;
    out.push_back(quantize_adjacency(probs, n));
  }
  return out;
}

// Dataset selection shared between the CLI and the experiment drivers.
struct DatasetSpec {
  std::string kind = "grid";  // grid | community-small | regular-toy | edge-list
  int count = 100;
  int rows_lo = 4, rows_hi = 6;
  int cols_lo = 4, cols_hi = 6;
  double p_intra = 0.7;
  double p_inter = -1.0;
  std::string path;  // edge-list file
  std::uint64_t seed = 0;

  void validate() const {
    require(kind == "grid" || kind == "community-small" || kind == "regular-toy" ||
                kind == "edge-list",
            ErrorCategory::config, "dataset: unknown kind '" + kind + "'");
    require(count >= 0, ErrorCategory::config, "dataset: count must be nonnegative");
    if (kind == "edge-list")
      require(!path.empty(), ErrorCategory::config, "dataset: edge-list needs a path");
  }
};

inline std::vector<Graph> build_dataset(const DatasetSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  if (spec.kind == "grid")
    return generate_grid(spec.rows_lo, spec.rows_hi, spec.cols_lo, spec.cols_hi, spec.count, rng);
  if (spec.kind == "community-small")
    return generate_community_small(spec.count, rng, spec.p_intra, spec.p_inter);
  if (spec.kind == "regular-toy") return generate_regular_toy(rng);
  return load_edge_list(spec.path);
}

}  // namespace graphdiff
