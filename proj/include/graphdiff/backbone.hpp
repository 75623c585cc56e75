#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "graphdiff/edm.hpp"
#include "graphdiff/nn/autodiff.hpp"

namespace graphdiff {

// Architecture of the edge-token denoiser: a U-shaped stack of window
// self-attention stages over the n x n edge grid. Stage i runs at token
// dimension token_dim * 2^i; entries of down_blocks / up_blocks count
// window-attention block pairs (one regular + one shifted window block per
// pair). The last entry of both lists describes the shared bottleneck stage
// and must agree. The feedforward width scales with the stage dimension
// (ff_dim at stage 0).
struct ModelConfig {
  int patch_size = 1;
  int window_size = 4;
  int token_dim = 32;
  int ff_dim = 128;
  std::vector<int> heads = {2, 4};
  std::vector<int> down_blocks = {1, 1};
  std::vector<int> up_blocks = {1, 1};
  int edge_channels = 1;
  int node_channels = 0;
  int sigma_embed_dim = 64;
  double init_std = 0.02;  // truncated-normal stddev for projection weights

  int stages() const { return static_cast<int>(down_blocks.size()); }
  int stage_dim(int i) const { return token_dim << i; }
  int stage_ff(int i) const { return ff_dim << i; }
  int stage_heads(int i) const { return heads[static_cast<size_t>(i)]; }

  // Inputs are zero-padded so that after patch embedding every stage's token
  // grid divides evenly into windows.
  int pad_multiple() const { return patch_size * window_size * (1 << (stages() - 1)); }

  int padded_n(int n) const {
    const int m = pad_multiple();
    return (n + m - 1) / m * m;
  }

  void validate() const {
    require(patch_size >= 1, ErrorCategory::config, "model: patch_size must be >= 1");
    require(window_size >= 1, ErrorCategory::config, "model: window_size must be >= 1");
    require(token_dim >= 1 && ff_dim >= 1, ErrorCategory::config, "model: dims must be positive");
    require(edge_channels >= 1, ErrorCategory::config, "model: edge_channels must be >= 1");
    require(node_channels >= 0, ErrorCategory::config, "model: node_channels must be >= 0");
    require(sigma_embed_dim >= 2 && sigma_embed_dim % 2 == 0, ErrorCategory::config,
            "model: sigma_embed_dim must be even and >= 2");
    require(!down_blocks.empty(), ErrorCategory::config, "model: needs at least one stage");
    require(down_blocks.size() == up_blocks.size(), ErrorCategory::config,
            "model: down/up block lists must have equal length");
    require(heads.size() == down_blocks.size(), ErrorCategory::config,
            "model: heads list must match the stage count");
    require(down_blocks.back() == up_blocks.back(), ErrorCategory::config,
            "model: the last down/up entries describe the same bottleneck stage and must agree");
    require(init_std > 0.0, ErrorCategory::config, "model: init_std must be positive");
    for (size_t i = 0; i < down_blocks.size(); ++i) {
      require(down_blocks[i] >= 1 && up_blocks[i] >= 1, ErrorCategory::config,
              "model: block counts must be >= 1");
      const int dim = token_dim << i;
      require(heads[i] >= 1 && dim % heads[i] == 0, ErrorCategory::config,
              "model: heads must divide the stage dimension");
    }
  }
};

// ---------------------------------------------------------------------------
// Window partition helpers (lossless tiling of the token grid)
// ---------------------------------------------------------------------------

// [B, H, W, C] -> [B * (H/M) * (W/M), M*M, C]
inline nn::Value window_partition(const nn::Value& grid, int M) {
  const int B = grid->value.dim(0), H = grid->value.dim(1), W = grid->value.dim(2),
            C = grid->value.dim(3);
  require(H % M == 0 && W % M == 0, ErrorCategory::invalid_argument,
          "window_partition: grid not divisible by window");
  auto x = nn::reshape(grid, {B, H / M, M, W / M, M, C});
  x = nn::permute_axes(x, {0, 1, 3, 2, 4, 5});
  return nn::reshape(x, {B * (H / M) * (W / M), M * M, C});
}

// Inverse of window_partition.
inline nn::Value window_reverse(const nn::Value& windows, int B, int H, int W, int M) {
  const int C = windows->value.dim(2);
  require(windows->value.dim(0) == B * (H / M) * (W / M) && windows->value.dim(1) == M * M,
          ErrorCategory::invalid_argument, "window_reverse: shape mismatch");
  auto x = nn::reshape(windows, {B, H / M, W / M, M, M, C});
  x = nn::permute_axes(x, {0, 1, 3, 2, 4, 5});
  return nn::reshape(x, {B, H, W, C});
}

namespace backbone_detail {

struct ParamStore {
  std::vector<std::pair<std::string, nn::Value>> items;
  double init_std = 0.02;

  nn::Value add(const std::string& name, nn::Tensor init) {
    items.emplace_back(name, nn::parameter(std::move(init)));
    return items.back().second;
  }
};

inline nn::Tensor trunc_normal(std::vector<int> shape, Rng& rng, double stddev) {
  nn::Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) {
    double z = rng.normal();
    while (std::abs(z) > 2.0) z = rng.normal();
    t[i] = stddev * z;
  }
  return t;
}

struct Linear {
  nn::Value w, b;
  int in = 0, out = 0;

  Linear() = default;
  Linear(ParamStore& ps, const std::string& name, int in_dim, int out_dim, Rng& rng)
      : in(in_dim), out(out_dim) {
    w = ps.add(name + ".w", trunc_normal({in_dim, out_dim}, rng, ps.init_std));
    b = ps.add(name + ".b", nn::Tensor::zeros({out_dim}));
  }

  nn::Value operator()(const nn::Value& x) const {
    auto y = nn::matmul(x, w);
    std::vector<int> bshape(static_cast<size_t>(y->value.rank()), 1);
    bshape.back() = out;
    return nn::add_bcast(y, nn::reshape(b, bshape));
  }
};

struct Norm {
  nn::Value gamma, beta;

  Norm() = default;
  Norm(ParamStore& ps, const std::string& name, int dim) {
    gamma = ps.add(name + ".gamma", nn::Tensor::full({dim}, 1.0));
    beta = ps.add(name + ".beta", nn::Tensor::zeros({dim}));
  }

  nn::Value operator()(const nn::Value& x) const { return nn::layer_norm(x, gamma, beta); }
};

// Per-stage validity of tokens (1 = real data, 0 = padding), stored densely
// per batch element. Downsampling keeps a coarse token valid when any of its
// four children is valid.
struct TokenMask {
  int batch = 0, h = 0, w = 0;
  std::vector<double> m;  // batch * h * w

  double at(int b, int i, int j) const {
    return m[(static_cast<size_t>(b) * h + i) * w + j];
  }

  TokenMask halved() const {
    TokenMask out;
    out.batch = batch;
    out.h = h / 2;
    out.w = w / 2;
    out.m.assign(static_cast<size_t>(batch) * out.h * out.w, 0.0);
    for (int b = 0; b < batch; ++b)
      for (int i = 0; i < out.h; ++i)
        for (int j = 0; j < out.w; ++j) {
          double v = 0.0;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) v = std::max(v, at(b, 2 * i + dy, 2 * j + dx));
          out.m[(static_cast<size_t>(b) * out.h + i) * out.w + j] = v;
        }
    return out;
  }

  nn::Tensor as_tensor() const {
    nn::Tensor t({batch, h, w, 1});
    std::copy(m.begin(), m.end(), t.vec().begin());
    return t;
  }
};

// Additive attention-logit mask for one (stage, shift) combination:
// 0 where the key token is valid and lies in the same contiguous region as
// the query after the cyclic shift, -1e9 otherwise. Shape [B*nw, 1, T, T].
// Regions are evaluated at rolled coordinates ([0, H-M), [H-M, H-s),
// [H-s, H)), which keeps originally adjacent tokens together and separates
// wrapped ones; validity travels with the token content, so it is looked up
// at the source coordinate.
inline nn::Tensor window_attention_mask(const TokenMask& mask, int M, int shift) {
  const int B = mask.batch, H = mask.h, W = mask.w;
  const int nwh = H / M, nww = W / M, T = M * M;
  nn::Tensor out({B * nwh * nww, 1, T, T});

  auto region = [&](int coord, int extent) {
    if (shift == 0) return 0;
    if (coord < extent - M) return 0;
    if (coord < extent - shift) return 1;
    return 2;
  };
  auto src = [&](int c, int extent) { return (c + shift) % extent; };

  std::int64_t w_idx = 0;
  for (int b = 0; b < B; ++b)
    for (int wi = 0; wi < nwh; ++wi)
      for (int wj = 0; wj < nww; ++wj, ++w_idx) {
        for (int q = 0; q < T; ++q) {
          const int qi = wi * M + q / M, qj = wj * M + q % M;
          const int q_reg = region(qi, H) * 3 + region(qj, W);
          for (int k = 0; k < T; ++k) {
            const int ki = wi * M + k / M, kj = wj * M + k % M;
            const int k_reg = region(ki, H) * 3 + region(kj, W);
            const bool key_valid = mask.at(b, src(ki, H), src(kj, W)) > 0.5;
            const bool ok = key_valid && q_reg == k_reg;
            out[(w_idx * T + q) * T + k] = ok ? 0.0 : -1e9;
          }
        }
      }
  return out;
}

// One pre-norm window-attention block: multi-head self-attention inside
// (optionally shifted) M x M windows with a learned relative position bias,
// additive noise-level conditioning, and a two-layer feedforward; residual
// connections around both halves.
struct AttentionBlock {
  int dim = 0, heads = 0, window = 0, shift = 0;
  Norm ln1, ln2;
  Linear qkv, proj, cond, fc1, fc2;
  nn::Value relpos;             // [(2M-1)^2, heads]
  std::vector<int> relpos_idx;  // T*T lookup into the table

  AttentionBlock() = default;
  AttentionBlock(ParamStore& ps, const std::string& name, int dim_, int heads_, int window_,
                 int shift_, int ff, int embed_dim, Rng& rng)
      : dim(dim_), heads(heads_), window(window_), shift(shift_) {
    ln1 = Norm(ps, name + ".ln1", dim);
    qkv = Linear(ps, name + ".qkv", dim, 3 * dim, rng);
    proj = Linear(ps, name + ".proj", dim, dim, rng);
    cond = Linear(ps, name + ".cond", embed_dim, dim, rng);
    ln2 = Norm(ps, name + ".ln2", dim);
    fc1 = Linear(ps, name + ".fc1", dim, ff, rng);
    fc2 = Linear(ps, name + ".fc2", ff, dim, rng);
    const int R = 2 * window - 1;
    relpos = ps.add(name + ".relpos", trunc_normal({R * R, heads}, rng, ps.init_std));
    const int T = window * window;
    relpos_idx.resize(static_cast<size_t>(T) * T);
    for (int q = 0; q < T; ++q)
      for (int k = 0; k < T; ++k) {
        const int dy = q / window - k / window + window - 1;
        const int dx = q % window - k % window + window - 1;
        relpos_idx[static_cast<size_t>(q) * T + k] = dy * R + dx;
      }
  }

  nn::Value operator()(const nn::Value& x_in, const nn::Value& embed, const TokenMask& mask) const {
    const int B = x_in->value.dim(0), H = x_in->value.dim(1), W = x_in->value.dim(2);
    const int M = window, T = M * M, dh = dim / heads;
    require(x_in->value.dim(3) == dim, ErrorCategory::invalid_argument,
            "attention block: channel mismatch");

    auto h = ln1(x_in);
    if (shift > 0) h = nn::roll_hw(h, -shift, -shift);
    auto win = window_partition(h, M);  // [BW, T, C]
    const int BW = win->value.dim(0);

    auto qkv_all = nn::reshape(qkv(win), {BW, T, 3, heads, dh});
    auto split = nn::permute_axes(qkv_all, {2, 0, 3, 1, 4});  // [3, BW, heads, T, dh]
    auto q = nn::reshape(nn::slice(split, 0, 0, 1), {BW, heads, T, dh});
    auto k = nn::reshape(nn::slice(split, 0, 1, 1), {BW, heads, T, dh});
    auto v = nn::reshape(nn::slice(split, 0, 2, 1), {BW, heads, T, dh});

    auto logits = nn::scale(nn::matmul(q, k, /*trans_b=*/true), 1.0 / std::sqrt(double(dh)));
    auto bias = nn::reshape(nn::permute_axes(nn::reshape(nn::embedding_rows(relpos, relpos_idx),
                                                         {T, T, heads}),
                                             {2, 0, 1}),
                            {1, heads, T, T});
    logits = nn::add_bcast(logits, bias);
    logits = nn::add_bcast(logits, nn::constant(window_attention_mask(mask, M, shift)));

    auto attn = nn::softmax_last(logits);
    auto ctx = nn::matmul(attn, v);                       // [BW, heads, T, dh]
    ctx = nn::permute_axes(ctx, {0, 2, 1, 3});            // [BW, T, heads, dh]
    ctx = proj(nn::reshape(ctx, {BW, T, dim}));
    auto grid = window_reverse(ctx, B, H, W, M);
    if (shift > 0) grid = nn::roll_hw(grid, shift, shift);

    auto x = nn::add(x_in, grid);
    x = nn::add_bcast(x, nn::reshape(cond(embed), {B, 1, 1, dim}));
    x = nn::add(x, fc2(nn::gelu(fc1(ln2(x)))));
    return nn::mul_bcast(x, nn::constant(mask.as_tensor()));
  }
};

}  // namespace backbone_detail

// The denoiser network: edge tokens with patch embedding, a U-shaped stack of
// shifted-window attention stages with parity-split downsampling and
// skip-connected upsampling, and edge/node readouts. Token (u, v) carries the
// features of edge (u, v); node and self-conditioning channels are
// concatenated onto the edge channels at the input.
class EdgeDenoiser {
 public:
  EdgeDenoiser(ModelConfig cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    using backbone_detail::Linear;
    using backbone_detail::Norm;
    params_.init_std = cfg_.init_std;
    const int S = cfg_.stages();
    const int p = cfg_.patch_size;
    const int c_in = 2 * cfg_.edge_channels + 4 * cfg_.node_channels;
    const int E = cfg_.sigma_embed_dim;

    embed_fc1_ = Linear(params_, "sigma_embed.fc1", E, E, rng);
    embed_fc2_ = Linear(params_, "sigma_embed.fc2", E, E, rng);
    patch_embed_ = Linear(params_, "patch_embed", p * p * c_in, cfg_.token_dim, rng);

    for (int i = 0; i < S; ++i) {
      const std::string stage = "down" + std::to_string(i);
      std::vector<backbone_detail::AttentionBlock> blocks;
      for (int bidx = 0; bidx < cfg_.down_blocks[static_cast<size_t>(i)]; ++bidx) {
        blocks.emplace_back(params_, stage + ".b" + std::to_string(bidx) + ".w", cfg_.stage_dim(i),
                            cfg_.stage_heads(i), cfg_.window_size, 0, cfg_.stage_ff(i), E, rng);
        blocks.emplace_back(params_, stage + ".b" + std::to_string(bidx) + ".sw", cfg_.stage_dim(i),
                            cfg_.stage_heads(i), cfg_.window_size, cfg_.window_size / 2,
                            cfg_.stage_ff(i), E, rng);
      }
      down_stages_.push_back(std::move(blocks));
      if (i + 1 < S)
        merges_.emplace_back(params_, "merge" + std::to_string(i), 4 * cfg_.stage_dim(i),
                             cfg_.stage_dim(i + 1), rng);
    }
    for (int i = S - 2; i >= 0; --i) {
      expands_.emplace_back(params_, "expand" + std::to_string(i), cfg_.stage_dim(i + 1),
                            4 * cfg_.stage_dim(i), rng);
      fuses_.emplace_back(params_, "fuse" + std::to_string(i), 2 * cfg_.stage_dim(i),
                          cfg_.stage_dim(i), rng);
      const std::string stage = "up" + std::to_string(i);
      std::vector<backbone_detail::AttentionBlock> blocks;
      for (int bidx = 0; bidx < cfg_.up_blocks[static_cast<size_t>(i)]; ++bidx) {
        blocks.emplace_back(params_, stage + ".b" + std::to_string(bidx) + ".w", cfg_.stage_dim(i),
                            cfg_.stage_heads(i), cfg_.window_size, 0, cfg_.stage_ff(i), E, rng);
        blocks.emplace_back(params_, stage + ".b" + std::to_string(bidx) + ".sw", cfg_.stage_dim(i),
                            cfg_.stage_heads(i), cfg_.window_size, cfg_.window_size / 2,
                            cfg_.stage_ff(i), E, rng);
      }
      up_stages_.push_back(std::move(blocks));
    }

    patch_unembed_ = Linear(params_, "patch_unembed", cfg_.token_dim, p * p * cfg_.token_dim, rng);
    edge_out_fc1_ = Linear(params_, "edge_out.fc1", cfg_.token_dim, cfg_.token_dim, rng);
    edge_out_fc2_ = Linear(params_, "edge_out.fc2", cfg_.token_dim, cfg_.edge_channels, rng);
    if (cfg_.node_channels > 0) {
      node_out_fc1_ = Linear(params_, "node_out.fc1", cfg_.token_dim, cfg_.token_dim, rng);
      node_out_fc2_ = Linear(params_, "node_out.fc2", cfg_.token_dim, cfg_.node_channels, rng);
    }
  }

  const ModelConfig& config() const { return cfg_; }

  const std::vector<std::pair<std::string, nn::Value>>& parameters() const { return params_.items; }

  std::int64_t parameter_count() const {
    std::int64_t total = 0;
    for (const auto& [name, p] : params_.items) total += p->value.numel();
    return total;
  }

  // Forward pass. Inputs are plain tensors (they never carry gradients);
  // outputs are autodiff values whose graph reaches the parameters.
  // node_mask: [B, n] with 1 for real nodes, 0 for padding inside the batch;
  // null means all nodes valid.
  FieldValue forward(const Field& scaled_noisy, const Field& self_cond,
                     const std::vector<double>& c_noise, const nn::Tensor* node_mask = nullptr) const {
    const int B = scaled_noisy.edge.dim(0);
    const int n = scaled_noisy.edge.dim(1);
    const int Ce = cfg_.edge_channels, Cv = cfg_.node_channels;
    require(scaled_noisy.edge.rank() == 4 && scaled_noisy.edge.dim(2) == n &&
                scaled_noisy.edge.dim(3) == Ce,
            ErrorCategory::invalid_argument, "denoiser: bad edge input shape");
    require(static_cast<int>(c_noise.size()) == B, ErrorCategory::invalid_argument,
            "denoiser: c_noise size mismatch");
    require(scaled_noisy.edge.same_shape(self_cond.edge), ErrorCategory::invalid_argument,
            "denoiser: self-conditioning shape mismatch");
    if (Cv > 0)
      require(scaled_noisy.node.rank() == 3 && scaled_noisy.node.dim(1) == n &&
                  scaled_noisy.node.dim(2) == Cv,
              ErrorCategory::invalid_argument, "denoiser: bad node input shape");

    const int n_pad = cfg_.padded_n(n);
    const int p = cfg_.patch_size;
    const int S = cfg_.stages();

    // Assemble padded input channels host-side (inputs are constants).
    const int c_in = 2 * Ce + 4 * Cv;
    nn::Tensor input({B, n_pad, n_pad, c_in});
    for (int b = 0; b < B; ++b)
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
          double* dst = input.data() + ((static_cast<std::int64_t>(b) * n_pad + u) * n_pad + v) * c_in;
          const double* e1 = scaled_noisy.edge.data() + ((static_cast<std::int64_t>(b) * n + u) * n + v) * Ce;
          const double* e2 = self_cond.edge.data() + ((static_cast<std::int64_t>(b) * n + u) * n + v) * Ce;
          int c = 0;
          for (int i = 0; i < Ce; ++i) dst[c++] = e1[i];
          for (int i = 0; i < Ce; ++i) dst[c++] = e2[i];
          if (Cv > 0) {
            const double* nu = scaled_noisy.node.data() + (static_cast<std::int64_t>(b) * n + u) * Cv;
            const double* nv = scaled_noisy.node.data() + (static_cast<std::int64_t>(b) * n + v) * Cv;
            const double* su = self_cond.node.data() + (static_cast<std::int64_t>(b) * n + u) * Cv;
            const double* sv = self_cond.node.data() + (static_cast<std::int64_t>(b) * n + v) * Cv;
            for (int i = 0; i < Cv; ++i) dst[c++] = nu[i];
            for (int i = 0; i < Cv; ++i) dst[c++] = nv[i];
            for (int i = 0; i < Cv; ++i) dst[c++] = su[i];
            for (int i = 0; i < Cv; ++i) dst[c++] = sv[i];
          }
        }

    // Per-stage token validity masks.
    std::vector<backbone_detail::TokenMask> masks;
    {
      backbone_detail::TokenMask m0;
      m0.batch = B;
      m0.h = n_pad / p;
      m0.w = n_pad / p;
      m0.m.assign(static_cast<size_t>(B) * m0.h * m0.w, 0.0);
      for (int b = 0; b < B; ++b)
        for (int u = 0; u < n; ++u) {
          const bool uv = !node_mask || (*node_mask)[static_cast<std::int64_t>(b) * n + u] > 0.5;
          if (!uv) continue;
          for (int v = 0; v < n; ++v) {
            const bool vv = !node_mask || (*node_mask)[static_cast<std::int64_t>(b) * n + v] > 0.5;
            if (!vv) continue;
            m0.m[(static_cast<size_t>(b) * m0.h + u / p) * m0.w + v / p] = 1.0;
          }
        }
      masks.push_back(std::move(m0));
      for (int i = 1; i < S; ++i) masks.push_back(masks.back().halved());
    }

    // Noise-level embedding: fixed log-spaced frequencies, then a two-layer
    // MLP shared by all blocks.
    nn::Value embed;
    {
      const int E = cfg_.sigma_embed_dim;
      const int half = E / 2;
      nn::Tensor feats({B, E});
      for (int b = 0; b < B; ++b)
        for (int k = 0; k < half; ++k) {
          const double omega =
              half > 1 ? std::pow(2.0, 8.0 * static_cast<double>(k) / (half - 1)) : 1.0;
          feats[static_cast<std::int64_t>(b) * E + k] = std::sin(omega * c_noise[static_cast<size_t>(b)]);
          feats[static_cast<std::int64_t>(b) * E + half + k] =
              std::cos(omega * c_noise[static_cast<size_t>(b)]);
        }
      embed = embed_fc2_(nn::silu(embed_fc1_(nn::constant(feats))));
    }

    auto x = patch_embed_(nn::space_to_depth(nn::constant(input), p));
    x = nn::mul_bcast(x, nn::constant(masks[0].as_tensor()));

    std::vector<nn::Value> skips;
    for (int i = 0; i < S; ++i) {
      for (const auto& block : down_stages_[static_cast<size_t>(i)])
        x = block(x, embed, masks[static_cast<size_t>(i)]);
      if (i + 1 < S) {
        skips.push_back(x);
        x = merges_[static_cast<size_t>(i)](nn::space_to_depth(x, 2));
        x = nn::mul_bcast(x, nn::constant(masks[static_cast<size_t>(i) + 1].as_tensor()));
      }
    }
    for (int i = S - 2; i >= 0; --i) {
      const size_t ui = static_cast<size_t>(S - 2 - i);
      x = nn::depth_to_space(expands_[ui](x), 2);
      x = nn::mul_bcast(x, nn::constant(masks[static_cast<size_t>(i)].as_tensor()));
      x = fuses_[ui](nn::concat({x, skips[static_cast<size_t>(i)]}, 3));
      for (const auto& block : up_stages_[ui]) x = block(x, embed, masks[static_cast<size_t>(i)]);
    }

    x = nn::depth_to_space(patch_unembed_(x), p);  // [B, n_pad, n_pad, token_dim]
    x = nn::slice(nn::slice(x, 1, 0, n), 2, 0, n);

    FieldValue out;
    out.edge = edge_out_fc2_(nn::gelu(edge_out_fc1_(x)));
    if (Cv > 0) {
      // Node v reads the masked mean of row v's edge features.
      nn::Tensor row_mask({B, 1, n, 1});
      nn::Tensor inv_count({B, 1, 1});
      for (int b = 0; b < B; ++b) {
        double count = 0.0;
        for (int v = 0; v < n; ++v) {
          const double valid = !node_mask || (*node_mask)[static_cast<std::int64_t>(b) * n + v] > 0.5;
          row_mask[(static_cast<std::int64_t>(b) * n + v)] = valid;
          count += valid;
        }
        inv_count[b] = count > 0 ? 1.0 / count : 0.0;
      }
      auto masked = nn::mul_bcast(x, nn::constant(row_mask));
      auto pooled = nn::reshape(nn::reduce_sum_axis(masked, 2), {B, n, cfg_.token_dim});
      pooled = nn::mul_bcast(pooled, nn::constant(inv_count));
      out.node = node_out_fc2_(nn::gelu(node_out_fc1_(pooled)));
    }
    return out;
  }

  // Adapter satisfying the trainer's raw-network contract.
  RawNet raw_net(nn::Tensor node_mask = nn::Tensor{}) const {
    return [this, node_mask](const Field& scaled, const Field& sc, const std::vector<double>& cn) {
      return forward(scaled, sc, cn, node_mask.numel() ? &node_mask : nullptr);
    };
  }

  // Preconditioned denoiser for the sampler (no gradient tracking).
  Denoiser denoiser(const EdmConfig& edm) const {
    return [this, edm](const Field& noisy, const Field& sc, double sigma) {
      const std::vector<double> sigmas(static_cast<size_t>(noisy.edge.dim(0)), sigma);
      return precondition_denoise(raw_net(), noisy, sc, sigmas, edm);
    };
  }

  // Direct access to parameter values for optimizers / checkpointing.
  std::vector<std::pair<std::string, nn::Value>>& mutable_parameters() { return params_.items; }

 private:
  ModelConfig cfg_;
  backbone_detail::ParamStore params_;
  backbone_detail::Linear embed_fc1_, embed_fc2_;
  backbone_detail::Linear patch_embed_, patch_unembed_;
  backbone_detail::Linear edge_out_fc1_, edge_out_fc2_;
  backbone_detail::Linear node_out_fc1_, node_out_fc2_;
  std::vector<std::vector<backbone_detail::AttentionBlock>> down_stages_;
  std::vector<std::vector<backbone_detail::AttentionBlock>> up_stages_;  // deepest first
  std::vector<backbone_detail::Linear> merges_;
  std::vector<backbone_detail::Linear> expands_;
  std::vector<backbone_detail::Linear> fuses_;
};

}  // namespace graphdiff
