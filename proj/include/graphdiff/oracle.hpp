#pragma once

#include <vector>

#include "graphdiff/edm.hpp"
#include "graphdiff/gmm.hpp"
#include "graphdiff/graph.hpp"

namespace graphdiff {

// Maps a graph's adjacency to the [-1, 1] channel representation used by the
// diffusion model (1 -> +1, 0 -> -1; diagonal -1).
inline std::vector<double> adjacency_channels(const Graph& g) {
  const int n = g.n();
  std::vector<double> x(static_cast<size_t>(n) * n, -1.0);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && g.has_edge(u, v)) x[static_cast<size_t>(u) * n + v] = 1.0;
  return x;
}

// Analytic optimal denoiser for a finite training set: the exact posterior
// mean under the Gaussian-perturbed empirical distribution. Satisfies the
// sampler's denoiser contract, so it drives the sampler without any learned
// network; used as the oracle in the sampler equivalence checks.
inline Denoiser make_gmm_denoiser(const std::vector<Graph>& train) {
  require(!train.empty(), ErrorCategory::invalid_argument, "make_gmm_denoiser: empty training set");
  const int n = train.front().n();
  std::vector<std::vector<double>> centers;
  for (const auto& g : train) {
    require(g.n() == n, ErrorCategory::invalid_argument, "make_gmm_denoiser: graphs must share n");
    centers.push_back(adjacency_channels(g));
  }
  return [centers, n](const Field& noisy, const Field& /*self_cond*/, double sigma) {
    GmmSpec spec;
    spec.centers = centers;
    spec.sigma = sigma;
    const int batch = noisy.edge.dim(0);
    const std::int64_t stride = static_cast<std::int64_t>(n) * n;
    require(noisy.edge.numel() == batch * stride, ErrorCategory::invalid_argument,
            "gmm denoiser: shape mismatch");
    Field out = noisy;
    std::vector<double> row(static_cast<size_t>(stride));
    for (int b = 0; b < batch; ++b) {
      std::copy(noisy.edge.data() + b * stride, noisy.edge.data() + (b + 1) * stride, row.begin());
      const auto denoised = gmm_optimal_denoiser(row, spec);
      std::copy(denoised.begin(), denoised.end(), out.edge.data() + b * stride);
    }
    return out;
  };
}

}  // namespace graphdiff
