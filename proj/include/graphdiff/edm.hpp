#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "graphdiff/encoding.hpp"
#include "graphdiff/graph.hpp"
#include "graphdiff/nn/autodiff.hpp"

namespace graphdiff {

// Diffusion-process constants. Defaults are the standard operating point of
// the preconditioned denoising setup; every field can be overridden from the
// config file.
struct EdmConfig {
  double sigma_data = 0.5;
  double p_mean = -1.2;
  double p_std = 1.2;
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  double rho = 7.0;
  double s_tmin = 0.05;
  double s_tmax = 50.0;
  double s_noise = 1.003;
  double s_churn = 40.0;
  int steps = 256;  // N

  void validate() const {
    require(sigma_data > 0.0, ErrorCategory::config, "edm: sigma_data must be positive");
    require(sigma_min > 0.0 && sigma_min < sigma_max, ErrorCategory::config,
            "edm: need 0 < sigma_min < sigma_max");
    require(steps >= 1, ErrorCategory::config, "edm: steps must be >= 1");
    require(rho > 0.0, ErrorCategory::config, "edm: rho must be positive");
    require(s_noise >= 1.0, ErrorCategory::config, "edm: s_noise must be >= 1");
    require(p_std >= 0.0, ErrorCategory::config, "edm: p_std must be nonnegative");
    require(s_churn >= 0.0, ErrorCategory::config, "edm: s_churn must be nonnegative");
  }
};

// Input/output/skip/noise scalings that keep the network inputs and
// regression targets at unit variance across noise levels.
struct PrecondCoeffs {
  double c_skip = 0.0;
  double c_out = 0.0;
  double c_in = 0.0;
  double c_noise = 0.0;
};

inline PrecondCoeffs precondition_coeffs(double sigma, const EdmConfig& cfg) {
  require(sigma > 0.0, ErrorCategory::invalid_argument, "precondition_coeffs: sigma must be positive");
  const double sd2 = cfg.sigma_data * cfg.sigma_data;
  const double s2 = sigma * sigma;
  PrecondCoeffs c;
  c.c_skip = sd2 / (sd2 + s2);
  c.c_out = sigma * cfg.sigma_data / std::sqrt(sd2 + s2);
  c.c_in = 1.0 / std::sqrt(sd2 + s2);
  c.c_noise = 0.25 * std::log(sigma);
  return c;
}

// Loss weighting that cancels the output scaling: lambda(sigma) * c_out^2 = 1.
inline double loss_weight(double sigma, const EdmConfig& cfg) {
  const double c_out = precondition_coeffs(sigma, cfg).c_out;
  return 1.0 / (c_out * c_out);
}

// Training noise level: ln(sigma) ~ N(p_mean, p_std^2).
inline double sample_training_sigma(Rng& rng, const EdmConfig& cfg) {
  return std::exp(cfg.p_mean + cfg.p_std * rng.normal());
}

// Sampling time discretization t_0 > t_1 > ... > t_{N-1} plus the appended
// terminal t_N = 0. t_0 = sigma_max and t_{N-1} = sigma_min.
inline std::vector<double> time_grid(const EdmConfig& cfg) {
  cfg.validate();
  std::vector<double> t;
  const double a = std::pow(cfg.sigma_max, 1.0 / cfg.rho);
  const double b = std::pow(cfg.sigma_min, 1.0 / cfg.rho);
  if (cfg.steps == 1) {
    t.push_back(cfg.sigma_max);
  } else {
    for (int i = 0; i < cfg.steps; ++i) {
      const double frac = static_cast<double>(i) / (cfg.steps - 1);
      t.push_back(std::pow(a + frac * (b - a), cfg.rho));
    }
  }
  t.push_back(0.0);
  return t;
}

// Per-step churn factor: active only inside [s_tmin, s_tmax].
inline double churn_gamma(double t, const EdmConfig& cfg) {
  if (t < cfg.s_tmin || t > cfg.s_tmax) return 0.0;
  return std::min(cfg.s_churn / cfg.steps, M_SQRT2 - 1.0);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// State flowing through the sampler: an edge-channel tensor [B, n, n, Ce] and
// an optional node-channel tensor [B, n, Cv] (empty for plain graphs). The
// two parts follow identical update rules.
struct Field {
  nn::Tensor edge;
  nn::Tensor node;

  bool has_node() const { return node.numel() > 0; }

  bool all_finite() const { return edge.all_finite() && (!has_node() || node.all_finite()); }

  static Field zeros_like(const Field& other) {
    Field f;
    f.edge = nn::Tensor::zeros(other.edge.shape());
    if (other.has_node()) f.node = nn::Tensor::zeros(other.node.shape());
    return f;
  }

  static Field randn_like(const Field& other, Rng& rng, double stddev) {
    Field f;
    f.edge = nn::Tensor::randn(other.edge.shape(), rng, stddev);
    if (other.has_node()) f.node = nn::Tensor::randn(other.node.shape(), rng, stddev);
    return f;
  }

  // this += s * other
  void axpy(double s, const Field& other) {
    for (std::int64_t i = 0; i < edge.numel(); ++i) edge[i] += s * other.edge[i];
    for (std::int64_t i = 0; i < node.numel(); ++i) node[i] += s * other.node[i];
  }

  Field scaled_add(double s, const Field& other) const {
    Field f = *this;
    f.axpy(s, other);
    return f;
  }

  // (this - other) / t
  Field diff_over(const Field& other, double t) const {
    Field f = *this;
    f.axpy(-1.0, other);
    const double inv = 1.0 / t;
    for (std::int64_t i = 0; i < f.edge.numel(); ++i) f.edge[i] *= inv;
    for (std::int64_t i = 0; i < f.node.numel(); ++i) f.node[i] *= inv;
    return f;
  }
};

// Denoiser contract D(noisy, self_conditioning, sigma) -> denoised estimate,
// already wrapped with preconditioning. Any implementation satisfying it
// (analytic oracle or trained network) drives the sampler.
using Denoiser = std::function<Field(const Field& noisy, const Field& self_cond, double sigma)>;

// Stochastic sampler with second-order correction and self-conditioning.
// Starting from N(0, t_0^2 I), each step injects churn noise up to
// t_hat = (1 + gamma) t, takes an Euler step toward t_{i+1} using
// d = (x - D(x, sc, t_hat)) / t_hat, then corrects with the average of the
// derivative re-evaluated at t_{i+1}. The correction is skipped on the final
// step where t_{i+1} = 0. The self-conditioning estimate produced at each
// evaluation is carried into the next one.
inline Field sample(const Denoiser& denoise, int batch, int n, int edge_channels, int node_channels,
                    Rng& rng, const EdmConfig& cfg) {
  cfg.validate();
  require(batch >= 1 && n >= 1 && edge_channels >= 1, ErrorCategory::invalid_argument,
          "sample: batch, n and edge channels must be positive");
  const auto t = time_grid(cfg);
  const int N = static_cast<int>(t.size()) - 1;

  Field shape_ref;
  shape_ref.edge = nn::Tensor::zeros({batch, n, n, edge_channels});
  if (node_channels > 0) shape_ref.node = nn::Tensor::zeros({batch, n, node_channels});

  Field x = Field::randn_like(shape_ref, rng, t[0]);
  Field sc = Field::zeros_like(shape_ref);

  for (int i = 0; i < N; ++i) {
    const Field eps = Field::randn_like(shape_ref, rng, cfg.s_noise);
    const double gamma = churn_gamma(t[static_cast<size_t>(i)], cfg);
    const double t_hat = (1.0 + gamma) * t[static_cast<size_t>(i)];
    const double inject = std::sqrt(std::max(t_hat * t_hat - t[static_cast<size_t>(i)] * t[static_cast<size_t>(i)], 0.0));
    Field x_hat = x.scaled_add(inject, eps);

    const Field sc_hat = denoise(x_hat, sc, t_hat);
    const Field d = x_hat.diff_over(sc_hat, t_hat);
    const double t_next = t[static_cast<size_t>(i) + 1];
    Field x_next = x_hat.scaled_add(t_next - t_hat, d);

    if (t_next != 0.0) {
      const Field sc_next = denoise(x_next, sc_hat, t_next);
      const Field d2 = x_next.diff_over(sc_next, t_next);
      x_next = x_hat;
      x_next.axpy(0.5 * (t_next - t_hat), d);
      x_next.axpy(0.5 * (t_next - t_hat), d2);
      sc = sc_next;
    } else {
      sc = sc_hat;
    }
    require(x_next.all_finite(), ErrorCategory::diverged,
            "sample: non-finite state at step " + std::to_string(i));
    x = std::move(x_next);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Graph generation
// ---------------------------------------------------------------------------

// Runs the sampler and converts the continuous output to graphs. Plain graphs
// (scheme == nullptr): channels are mapped from [-1, 1] back to [0, 1] and
// thresholded at 0.5. Attributed graphs: channels are decoded per the
// encoding scheme (edge type 0 = no edge). With apply_random_permutation a
// fresh uniform permutation is applied to every output graph, which makes the
// sampled distribution permutation invariant without leaving any isomorphism
// class.
inline std::vector<Graph> generate_graphs(const Denoiser& denoise, int count, int n,
                                          const EdmConfig& cfg, Rng& rng,
                                          bool apply_random_permutation = false,
                                          const EncodingScheme* scheme = nullptr,
                                          int batch_size = 64) {
  require(count >= 0, ErrorCategory::invalid_argument, "generate_graphs: count must be nonnegative");
  std::vector<Graph> out;
  out.reserve(static_cast<size_t>(count));
  const int edge_ch = scheme ? scheme->edge_channels() : 1;
  const int node_ch = scheme && scheme->num_node_types > 1 ? scheme->node_channels() : 0;

  for (int done = 0; done < count;) {
    const int b = std::min(batch_size, count - done);
    const Field x = sample(denoise, b, n, edge_ch, node_ch, rng, cfg);
    for (int s = 0; s < b; ++s) {
      Graph g;
      if (!scheme) {
        std::vector<double> probs(static_cast<size_t>(n) * n);
        for (int u = 0; u < n; ++u)
          for (int v = 0; v < n; ++v)
            probs[static_cast<size_t>(u) * n + v] =
                (x.edge[((static_cast<std::int64_t>(s) * n + u) * n + v)] + 1.0) / 2.0;
        g = quantize_adjacency(probs, n);
      } else {
        EncodedGraph e;
        e.n = n;
        e.edge_channels = edge_ch;
        e.node_channels = scheme->node_channels();
        e.edge.resize(static_cast<size_t>(n) * n * edge_ch);
        const std::int64_t stride = static_cast<std::int64_t>(n) * n * edge_ch;
        std::copy(x.edge.data() + s * stride, x.edge.data() + (s + 1) * stride, e.edge.begin());
        e.node.assign(static_cast<size_t>(n) * e.node_channels, 0.0);
        if (node_ch > 0) {
          const std::int64_t nstride = static_cast<std::int64_t>(n) * node_ch;
          std::copy(x.node.data() + s * nstride, x.node.data() + (s + 1) * nstride, e.node.begin());
        }
        g = decode_attributes(e, *scheme);
      }
      if (apply_random_permutation && n >= 1) g = permute(g, uniform_random_permutation(n, rng));
      out.push_back(std::move(g));
    }
    done += b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training objective
// ---------------------------------------------------------------------------

// Raw-network contract used by the trainer: given the input-scaled noisy
// field, the self-conditioning field and the per-sample noise conditioning
// values, return autodiff outputs with the same shapes as the field.
struct FieldValue {
  nn::Value edge;
  nn::Value node;  // null when the model has no node channels
};
using RawNet = std::function<FieldValue(const Field& scaled_noisy, const Field& self_cond,
                                        const std::vector<double>& c_noise)>;

namespace detail {

inline void scale_rows(nn::Tensor& t, const std::vector<double>& s) {
  const std::int64_t rows = static_cast<std::int64_t>(s.size());
  const std::int64_t stride = t.numel() / rows;
  for (std::int64_t b = 0; b < rows; ++b)
    for (std::int64_t i = 0; i < stride; ++i) t[b * stride + i] *= s[static_cast<size_t>(b)];
}

}  // namespace detail

// Preconditioned denoiser evaluation on plain tensors (no gradients):
// D(x, sc, sigma) = c_skip * x + c_out * F(c_in * x, sc, c_noise).
inline Field precondition_denoise(const RawNet& net, const Field& noisy, const Field& self_cond,
                                  const std::vector<double>& sigmas, const EdmConfig& cfg) {
  nn::NoGradGuard guard;
  const std::int64_t batch = static_cast<std::int64_t>(sigmas.size());
  std::vector<double> c_in(sigmas.size()), c_skip(sigmas.size()), c_out(sigmas.size()),
      c_noise(sigmas.size());
  for (size_t b = 0; b < sigmas.size(); ++b) {
    const auto c = precondition_coeffs(sigmas[b], cfg);
    c_in[b] = c.c_in;
    c_skip[b] = c.c_skip;
    c_out[b] = c.c_out;
    c_noise[b] = c.c_noise;
  }
  require(noisy.edge.dim(0) == batch, ErrorCategory::invalid_argument,
          "precondition_denoise: batch mismatch");
  Field scaled = noisy;
  detail::scale_rows(scaled.edge, c_in);
  if (scaled.has_node()) detail::scale_rows(scaled.node, c_in);
  const FieldValue raw = net(scaled, self_cond, c_noise);
  Field out;
  out.edge = raw.edge->value;
  detail::scale_rows(out.edge, c_out);
  {
    nn::Tensor skip = noisy.edge;
    detail::scale_rows(skip, c_skip);
    for (std::int64_t i = 0; i < out.edge.numel(); ++i) out.edge[i] += skip[i];
  }
  if (raw.node) {
    out.node = raw.node->value;
    detail::scale_rows(out.node, c_out);
    nn::Tensor skip = noisy.node;
    detail::scale_rows(skip, c_skip);
    for (std::int64_t i = 0; i < out.node.numel(); ++i) out.node[i] += skip[i];
  }
  return out;
}

// Self-conditioning input: per sample, with probability 1/2 a zero tensor,
// otherwise the denoiser's own estimate D(noisy, 0, sigma) computed without
// gradient tracking. `forced` (0 = zeros, 1 = denoise) overrides the coin
// flips, used by tests.
inline Field self_conditioning_input(const RawNet& net, const Field& noisy,
                                     const std::vector<double>& sigmas, const EdmConfig& cfg,
                                     Rng& rng, const std::vector<int>* forced = nullptr) {
  const size_t batch = sigmas.size();
  std::vector<int> coin(batch, 0);
  for (size_t b = 0; b < batch; ++b) coin[b] = forced ? (*forced)[b] : (rng.bernoulli(0.5) ? 1 : 0);
  Field sc = Field::zeros_like(noisy);
  bool any = false;
  for (int c : coin) any = any || c;
  if (!any) return sc;
  const Field denoised = precondition_denoise(net, noisy, Field::zeros_like(noisy), sigmas, cfg);
  const std::int64_t estride = noisy.edge.numel() / static_cast<std::int64_t>(batch);
  const std::int64_t nstride = noisy.has_node() ? noisy.node.numel() / static_cast<std::int64_t>(batch) : 0;
  for (size_t b = 0; b < batch; ++b) {
    if (!coin[b]) continue;
    std::copy(denoised.edge.data() + static_cast<std::int64_t>(b) * estride,
              denoised.edge.data() + static_cast<std::int64_t>(b + 1) * estride,
              sc.edge.data() + static_cast<std::int64_t>(b) * estride);
    if (nstride)
      std::copy(denoised.node.data() + static_cast<std::int64_t>(b) * nstride,
                denoised.node.data() + static_cast<std::int64_t>(b + 1) * nstride,
                sc.node.data() + static_cast<std::int64_t>(b) * nstride);
  }
  return sc;
}

struct TrainingLoss {
  nn::Value loss;              // scalar; mean over batch, sum over entries
  std::vector<double> sigmas;  // per-sample noise levels drawn for the step
};

// One denoising-objective evaluation on a batch of clean fields (channels in
// [-1, 1]): draw sigma per sample, perturb with i.i.d. Gaussian noise, build
// the self-conditioning input, and return
//   mean_b lambda(sigma_b) || c_skip x~ + c_out F(c_in x~, sc, c_noise) - x ||^2
// restricted to `entry_mask` / `node_mask` when given (1 = counted).
inline TrainingLoss training_loss(const RawNet& net, const Field& clean, Rng& rng,
                                  const EdmConfig& cfg, bool enable_self_cond = true,
                                  const nn::Tensor* entry_mask = nullptr,
                                  const nn::Tensor* node_mask = nullptr,
                                  const std::vector<double>* forced_sigmas = nullptr,
                                  const std::vector<int>* forced_self_cond = nullptr,
                                  const Field* forced_noise = nullptr,
                                  const Field* fixed_self_cond = nullptr) {
  cfg.validate();
  const int batch = clean.edge.dim(0);
  TrainingLoss result;
  result.sigmas.resize(static_cast<size_t>(batch));
  for (int b = 0; b < batch; ++b)
    result.sigmas[static_cast<size_t>(b)] =
        forced_sigmas ? (*forced_sigmas)[static_cast<size_t>(b)] : sample_training_sigma(rng, cfg);

  std::vector<double> c_in(result.sigmas.size()), c_noise(result.sigmas.size());
  nn::Tensor weight({batch, 1, 1, 1});
  nn::Tensor c_skip_row({batch, 1, 1, 1});
  nn::Tensor c_out_row({batch, 1, 1, 1});
  for (int b = 0; b < batch; ++b) {
    const double sigma = result.sigmas[static_cast<size_t>(b)];
    const auto c = precondition_coeffs(sigma, cfg);
    c_in[static_cast<size_t>(b)] = c.c_in;
    c_noise[static_cast<size_t>(b)] = c.c_noise;
    c_skip_row[b] = c.c_skip;
    c_out_row[b] = c.c_out;
    weight[b] = loss_weight(sigma, cfg) / batch;
  }

  // x~ = x + sigma * eps
  Field noisy = clean;
  {
    Field eps = forced_noise ? *forced_noise : Field::randn_like(clean, rng, 1.0);
    detail::scale_rows(eps.edge, result.sigmas);
    if (eps.has_node()) detail::scale_rows(eps.node, result.sigmas);
    noisy.axpy(1.0, eps);
  }

  Field sc = Field::zeros_like(clean);
  if (fixed_self_cond)
    sc = *fixed_self_cond;
  else if (enable_self_cond)
    sc = self_conditioning_input(net, noisy, result.sigmas, cfg, rng, forced_self_cond);

  Field scaled = noisy;
  detail::scale_rows(scaled.edge, c_in);
  if (scaled.has_node()) detail::scale_rows(scaled.node, c_in);

  const FieldValue raw = net(scaled, sc, c_noise);

  auto branch_loss = [&](const nn::Value& f, const nn::Tensor& clean_t, const nn::Tensor& noisy_t,
                         const nn::Tensor& mask_or_empty, int rank) -> nn::Value {
    std::vector<int> row_shape(static_cast<size_t>(rank), 1);
    row_shape[0] = batch;
    auto rows = [&](const nn::Tensor& r) {
      nn::Tensor t(row_shape);
      for (int b = 0; b < batch; ++b) t[b] = r[b];
      return nn::constant(t);
    };
    // c_skip * noisy + c_out * F - clean
    nn::Value pred = mul_bcast(f, rows(c_out_row));
    pred = add(pred, mul_bcast(nn::constant(noisy_t), rows(c_skip_row)));
    nn::Value residual = sub(pred, nn::constant(clean_t));
    nn::Value sq = mul(residual, residual);
    if (mask_or_empty.numel()) {
      auto mshape = mask_or_empty.shape();
      while (static_cast<int>(mshape.size()) < rank) mshape.push_back(1);
      sq = mul_bcast(sq, nn::constant(nn::Tensor(mshape, mask_or_empty.vec())));
    }
    nn::Tensor w(row_shape);
    for (int b = 0; b < batch; ++b) w[b] = weight[b];
    sq = mul_bcast(sq, nn::constant(w));
    return sum_all(sq);
  };

  nn::Value loss =
      branch_loss(raw.edge, clean.edge, noisy.edge, entry_mask ? *entry_mask : nn::Tensor{}, 4);
  if (raw.node) {
    loss = add(loss, branch_loss(raw.node, clean.node, noisy.node,
                                 node_mask ? *node_mask : nn::Tensor{}, 3));
  }
  result.loss = loss;
  return result;
}

}  // namespace graphdiff
