#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "graphdiff/error.hpp"

namespace graphdiff {

// Uniform-weight isotropic Gaussian mixture centered on a finite set of
// points (flattened matrices). This is the exact noisy-data distribution of a
// Dirac-mixture dataset under i.i.d. Gaussian perturbation, and it yields an
// analytic optimal denoiser used as an oracle for the sampler.
struct GmmSpec {
  std::vector<std::vector<double>> centers;
  double sigma = 1.0;

  size_t dim() const { return centers.empty() ? 0 : centers.front().size(); }

  void validate() const {
    require(!centers.empty(), ErrorCategory::invalid_argument, "GmmSpec: needs at least one center");
    require(sigma > 0.0, ErrorCategory::invalid_argument, "GmmSpec: sigma must be positive");
    for (const auto& c : centers)
      require(c.size() == dim(), ErrorCategory::invalid_argument, "GmmSpec: centers must share shape");
  }
};

namespace detail {

// Log of the unnormalized component weights exp(-|x - c_i|^2 / (2 sigma^2)),
// shifted so the largest is 0 (log-sum-exp stabilization).
inline std::vector<double> gmm_log_weights(const std::vector<double>& x, const GmmSpec& spec,
                                           double* max_log) {
  const double inv2s2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
  std::vector<double> lw(spec.centers.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < spec.centers.size(); ++i) {
    double d2 = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - spec.centers[i][k];
      d2 += d * d;
    }
    lw[i] = -d2 * inv2s2;
    mx = std::max(mx, lw[i]);
  }
  if (max_log) *max_log = mx;
  return lw;
}

}  // namespace detail

inline double gmm_log_density(const std::vector<double>& x, const GmmSpec& spec) {
  spec.validate();
  require(x.size() == spec.dim(), ErrorCategory::invalid_argument, "gmm_log_density: shape mismatch");
  double mx = 0.0;
  const auto lw = detail::gmm_log_weights(x, spec, &mx);
  double s = 0.0;
  for (double v : lw) s += std::exp(v - mx);
  const double d = static_cast<double>(x.size());
  return mx + std::log(s) - std::log(static_cast<double>(spec.centers.size())) -
         0.5 * d * std::log(2.0 * M_PI * spec.sigma * spec.sigma);
}

// Softmax responsibilities of each component for the point x.
inline std::vector<double> gmm_responsibilities(const std::vector<double>& x, const GmmSpec& spec) {
  spec.validate();
  require(x.size() == spec.dim(), ErrorCategory::invalid_argument, "gmm_responsibilities: shape mismatch");
  double mx = 0.0;
  auto lw = detail::gmm_log_weights(x, spec, &mx);
  double s = 0.0;
  for (double& v : lw) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double& v : lw) v /= s;
  return lw;
}

// Gradient of log density: sum_i r_i (c_i - x) / sigma^2.
inline std::vector<double> gmm_score(const std::vector<double>& x, const GmmSpec& spec) {
  const auto r = gmm_responsibilities(x, spec);
  std::vector<double> g(x.size(), 0.0);
  const double inv_s2 = 1.0 / (spec.sigma * spec.sigma);
  for (size_t i = 0; i < spec.centers.size(); ++i)
    for (size_t k = 0; k < x.size(); ++k) g[k] += r[i] * (spec.centers[i][k] - x[k]) * inv_s2;
  return g;
}

// Posterior mean of the clean point given the noisy observation (Tweedie):
// x + sigma^2 * score, which reduces to the responsibility-weighted convex
// combination of the centers.
inline std::vector<double> gmm_optimal_denoiser(const std::vector<double>& x, const GmmSpec& spec) {
  const auto r = gmm_responsibilities(x, spec);
  std::vector<double> out(x.size(), 0.0);
  for (size_t i = 0; i < spec.centers.size(); ++i)
    for (size_t k = 0; k < x.size(); ++k) out[k] += r[i] * spec.centers[i][k];
  return out;
}

}  // namespace graphdiff
