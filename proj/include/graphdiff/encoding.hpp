#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "graphdiff/error.hpp"
#include "graphdiff/graph.hpp"

namespace graphdiff {

// Categorical attribute <-> continuous channel encodings used to feed node
// and edge types through the denoiser. Three schemes:
//   scalar  - one channel; type k maps to the midpoint of the k-th of K
//             equal sub-intervals of [-1, 1]; decoding assigns the nearest
//             sub-interval, with the two boundary intervals absorbing any
//             overflow beyond the outermost midpoints.
//   bits    - ceil(log2(K)) channels; binary expansion (LSB first) remapped
//             from {0,1} to {-1,+1}; decoding takes signs and reassembles,
//             clamping to the valid range.
//   one_hot - K channels valued -1 except +1 at the type index; decoding
//             takes the argmax.
enum class EncodingKind { scalar, bits, one_hot };

inline const char* encoding_kind_name(EncodingKind k) {
  switch (k) {
    case EncodingKind::scalar: return "scalar";
    case EncodingKind::bits: return "bits";
    case EncodingKind::one_hot: return "one-hot";
  }
  return "?";
}

inline EncodingKind encoding_kind_from_name(const std::string& s) {
  if (s == "scalar") return EncodingKind::scalar;
  if (s == "bits") return EncodingKind::bits;
  if (s == "one-hot" || s == "one_hot" || s == "onehot") return EncodingKind::one_hot;
  throw Error(ErrorCategory::config, "unknown encoding kind: " + s);
}

inline int channels_for(EncodingKind kind, int num_types) {
  require(num_types >= 1, ErrorCategory::invalid_argument, "channels_for: num_types must be positive");
  switch (kind) {
    case EncodingKind::scalar:
      return 1;
    case EncodingKind::bits: {
      int c = 0;
      while ((1 << c) < num_types) ++c;
      return std::max(c, 1);
    }
    case EncodingKind::one_hot:
      return num_types;
  }
  return 1;
}

struct EncodingScheme {
  EncodingKind kind = EncodingKind::scalar;
  int num_node_types = 1;
  int num_edge_types = 2;  // type 0 is "no edge"

  int node_channels() const { return channels_for(kind, num_node_types); }
  int edge_channels() const { return channels_for(kind, num_edge_types); }

  void validate() const {
    require(num_node_types >= 1, ErrorCategory::config, "EncodingScheme: num_node_types must be >= 1");
    require(num_edge_types >= 1, ErrorCategory::config, "EncodingScheme: num_edge_types must be >= 1");
  }
};

inline void encode_type(EncodingKind kind, int num_types, int type, double* out) {
  require(type >= 0 && type < num_types, ErrorCategory::invalid_argument,
          "encode_type: type index out of range");
  const int c = channels_for(kind, num_types);
  switch (kind) {
    case EncodingKind::scalar:
      out[0] = -1.0 + (2.0 * type + 1.0) / num_types;
      break;
    case EncodingKind::bits:
      for (int b = 0; b < c; ++b) out[b] = ((type >> b) & 1) ? 1.0 : -1.0;
      break;
    case EncodingKind::one_hot:
      for (int b = 0; b < c; ++b) out[b] = (b == type) ? 1.0 : -1.0;
      break;
  }
}

inline int decode_type(EncodingKind kind, int num_types, const double* in) {
  const int c = channels_for(kind, num_types);
  switch (kind) {
    case EncodingKind::scalar: {
      const int k = static_cast<int>(std::floor((in[0] + 1.0) * num_types / 2.0));
      return std::clamp(k, 0, num_types - 1);
    }
    case EncodingKind::bits: {
      int v = 0;
      for (int b = 0; b < c; ++b)
        if (in[b] > 0.0) v |= (1 << b);
      return std::min(v, num_types - 1);
    }
    case EncodingKind::one_hot: {
      int best = 0;
      for (int b = 1; b < c; ++b)
        if (in[b] > in[best]) best = b;
      return best;
    }
  }
  return 0;
}

// Channel arrays for one graph. Edge array is n*n*Ce row-major with the
// channel index fastest; node array is n*Cv. The diagonal carries the
// encoding of edge type 0.
struct EncodedGraph {
  int n = 0;
  int edge_channels = 0;
  int node_channels = 0;
  std::vector<double> edge;
  std::vector<double> node;
};

inline EncodedGraph encode_attributes(const Graph& g, const EncodingScheme& s) {
  s.validate();
  EncodedGraph out;
  out.n = g.n();
  out.edge_channels = s.edge_channels();
  out.node_channels = s.node_channels();
  out.edge.assign(static_cast<size_t>(g.n()) * g.n() * out.edge_channels, 0.0);
  out.node.assign(static_cast<size_t>(g.n()) * out.node_channels, 0.0);
  for (int u = 0; u < g.n(); ++u) {
    for (int v = 0; v < g.n(); ++v) {
      const int type = (u == v) ? 0 : g.edge_attr(u, v);
      encode_type(s.kind, s.num_edge_types, type,
                  out.edge.data() + (static_cast<size_t>(u) * g.n() + v) * out.edge_channels);
    }
  }
  for (int v = 0; v < g.n(); ++v) {
    const int type = g.has_node_attrs() ? g.node_attr(v) : 0;
    encode_type(s.kind, s.num_node_types, type, out.node.data() + static_cast<size_t>(v) * out.node_channels);
  }
  return out;
}

// Inverse of encode_attributes. Edge channels are averaged with their
// transpose before decoding so asymmetric network outputs are well defined;
// the diagonal is forced to "no edge".
inline Graph decode_attributes(const EncodedGraph& e, const EncodingScheme& s) {
  s.validate();
  require(e.edge_channels == s.edge_channels() && e.node_channels == s.node_channels(),
          ErrorCategory::invalid_argument, "decode_attributes: channel count mismatch");
  const int n = e.n;
  Graph g(n);
  g.enable_edge_attrs();
  std::vector<double> avg(static_cast<size_t>(e.edge_channels));
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double* a = e.edge.data() + (static_cast<size_t>(u) * n + v) * e.edge_channels;
      const double* b = e.edge.data() + (static_cast<size_t>(v) * n + u) * e.edge_channels;
      for (int c = 0; c < e.edge_channels; ++c) {
        require(std::isfinite(a[c]) && std::isfinite(b[c]), ErrorCategory::diverged,
                "decode_attributes: non-finite edge channel");
        avg[static_cast<size_t>(c)] = 0.5 * (a[c] + b[c]);
      }
      const int type = decode_type(s.kind, s.num_edge_types, avg.data());
      if (type != 0) g.add_edge(u, v, type);
    }
  }
  std::vector<int> node_attrs(static_cast<size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    const double* p = e.node.data() + static_cast<size_t>(v) * e.node_channels;
    for (int c = 0; c < e.node_channels; ++c)
      require(std::isfinite(p[c]), ErrorCategory::diverged, "decode_attributes: non-finite node channel");
    node_attrs[static_cast<size_t>(v)] = decode_type(s.kind, s.num_node_types, p);
  }
  if (s.num_node_types > 1) g.set_node_attrs(std::move(node_attrs));
  return g;
}

}  // namespace graphdiff
