#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "graphdiff/nn/tensor.hpp"

namespace graphdiff::nn {

// Reverse-mode automatic differentiation over dense double tensors. The graph
// is built dynamically: every op returns a shared node holding the forward
// value and, when gradients are being tracked, the list of parents plus a
// closure that routes the node's gradient to them. Matrix products go
// through Eigen; everything else is explicit index arithmetic.

struct Node;
using Value = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily; same shape as value
  bool requires_grad = false;
  std::vector<Value> inputs;
  std::function<void()> backward_fn;

  void ensure_grad() {
    if (grad.numel() != value.numel()) grad = Tensor::zeros(value.shape());
  }
  void zero_grad() {
    if (grad.numel()) std::fill(grad.vec().begin(), grad.vec().end(), 0.0);
  }
};

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

// Disables graph construction in a scope (inference / stop-gradient paths).
struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev; }
};

inline Value constant(Tensor t) {
  auto n = std::make_shared<Node>();
  n->value = std::move(t);
  return n;
}

inline Value parameter(Tensor t) {
  auto n = std::make_shared<Node>();
  n->value = std::move(t);
  n->requires_grad = true;
  return n;
}

namespace detail {

inline bool track(std::initializer_list<const Value*> ins) {
  if (!grad_mode()) return false;
  for (const Value* v : ins)
    if ((*v)->requires_grad) return true;
  return false;
}

inline Value make_op(Tensor out, std::vector<Value> inputs, std::function<void()>&& bw,
                     bool tracked) {
  auto n = std::make_shared<Node>();
  n->value = std::move(out);
  if (tracked) {
    n->requires_grad = true;
    n->inputs = std::move(inputs);
    n->backward_fn = std::move(bw);
  }
  return n;
}

// Iterates an output tensor jointly with a broadcast input: `in` must have
// the same rank with each dim equal to out's or 1. Calls f(out_index,
// in_index) in row-major order.
template <class F>
void broadcast_iterate(const std::vector<int>& out_shape, const std::vector<int>& in_shape, F&& f) {
  const int r = static_cast<int>(out_shape.size());
  const auto in_str = strides_of(in_shape);
  std::vector<std::int64_t> eff(in_str.size());
  for (int d = 0; d < r; ++d)
    eff[static_cast<size_t>(d)] = in_shape[static_cast<size_t>(d)] == 1 ? 0 : in_str[static_cast<size_t>(d)];
  const std::int64_t total = Tensor::numel_of(out_shape);
  std::vector<int> idx(static_cast<size_t>(r), 0);
  std::int64_t ii = 0;
  for (std::int64_t oi = 0; oi < total; ++oi) {
    f(oi, ii);
    for (int d = r - 1; d >= 0; --d) {
      ++idx[static_cast<size_t>(d)];
      ii += eff[static_cast<size_t>(d)];
      if (idx[static_cast<size_t>(d)] < out_shape[static_cast<size_t>(d)]) break;
      idx[static_cast<size_t>(d)] = 0;
      ii -= eff[static_cast<size_t>(d)] * out_shape[static_cast<size_t>(d)];
    }
  }
}

// Iterates an output tensor whose element at multi-index I reads the input at
// sum_d I[d] * in_strides_for_out_dim[d] + base.
template <class F>
void strided_iterate(const std::vector<int>& out_shape, const std::vector<std::int64_t>& in_strides,
                     std::int64_t base, F&& f) {
  const int r = static_cast<int>(out_shape.size());
  const std::int64_t total = Tensor::numel_of(out_shape);
  std::vector<int> idx(static_cast<size_t>(r), 0);
  std::int64_t ii = base;
  for (std::int64_t oi = 0; oi < total; ++oi) {
    f(oi, ii);
    for (int d = r - 1; d >= 0; --d) {
      ++idx[static_cast<size_t>(d)];
      ii += in_strides[static_cast<size_t>(d)];
      if (idx[static_cast<size_t>(d)] < out_shape[static_cast<size_t>(d)]) break;
      idx[static_cast<size_t>(d)] = 0;
      ii -= in_strides[static_cast<size_t>(d)] * out_shape[static_cast<size_t>(d)];
    }
  }
}

inline void check_broadcastable(const Tensor& a, const Tensor& b, const char* op) {
  require(a.rank() == b.rank(), ErrorCategory::invalid_argument,
          std::string(op) + ": rank mismatch " + a.shape_str() + " vs " + b.shape_str());
  for (int d = 0; d < a.rank(); ++d)
    require(b.dim(d) == a.dim(d) || b.dim(d) == 1, ErrorCategory::invalid_argument,
            std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using MapC = Eigen::Map<const EMat>;

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and broadcast arithmetic
// ---------------------------------------------------------------------------

inline Value add(const Value& a, const Value& b) {
  require(a->value.same_shape(b->value), ErrorCategory::invalid_argument,
          "add: shape mismatch " + a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] += b->value[i];
  const bool tracked = detail::track({&a, &b});
  auto n = detail::make_op(std::move(out), {a, b}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* bp = b.get();
    Node* np = n.get();
    n->backward_fn = [ap, bp, np]() {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) ap->grad[i] += np->grad[i];
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) bp->grad[i] += np->grad[i];
      }
    };
  }
  return n;
}

inline Value sub(const Value& a, const Value& b) {
  require(a->value.same_shape(b->value), ErrorCategory::invalid_argument,
          "sub: shape mismatch " + a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] -= b->value[i];
  const bool tracked = detail::track({&a, &b});
  auto n = detail::make_op(std::move(out), {a, b}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* bp = b.get();
    Node* np = n.get();
    n->backward_fn = [ap, bp, np]() {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) ap->grad[i] += np->grad[i];
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) bp->grad[i] -= np->grad[i];
      }
    };
  }
  return n;
}

inline Value mul(const Value& a, const Value& b) {
  require(a->value.same_shape(b->value), ErrorCategory::invalid_argument,
          "mul: shape mismatch " + a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
  const bool tracked = detail::track({&a, &b});
  auto n = detail::make_op(std::move(out), {a, b}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* bp = b.get();
    Node* np = n.get();
    n->backward_fn = [ap, bp, np]() {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) ap->grad[i] += np->grad[i] * bp->value[i];
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) bp->grad[i] += np->grad[i] * ap->value[i];
      }
    };
  }
  return n;
}

inline Value scale(const Value& a, double s) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
  const bool tracked = detail::track({&a});
  auto n = detail::make_op(std::move(out), {a}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* np = n.get();
    n->backward_fn = [ap, np, s]() {
      ap->ensure_grad();
      for (std::int64_t i = 0; i < np->grad.numel(); ++i) ap->grad[i] += s * np->grad[i];
    };
  }
  return n;
}

// b is broadcast against a (same rank; dims equal or 1).
inline Value add_bcast(const Value& a, const Value& b) {
  detail::check_broadcastable(a->value, b->value, "add_bcast");
  Tensor out = a->value;
  detail::broadcast_iterate(a->value.shape(), b->value.shape(),
                            [&](std::int64_t oi, std::int64_t ii) { out[oi] += b->value[ii]; });
  const bool tracked = detail::track({&a, &b});
  auto n = detail::make_op(std::move(out), {a, b}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* bp = b.get();
    Node* np = n.get();
    n->backward_fn = [ap, bp, np]() {
      if (ap->requires_grad) {
        ap->ensure_grad();
        for (std::int64_t i = 0; i < np->grad.numel(); ++i) ap->grad[i] += np->grad[i];
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        detail::broadcast_iterate(np->value.shape(), bp->value.shape(),
                                  [&](std::int64_t oi, std::int64_t ii) { bp->grad[ii] += np->grad[oi]; });
      }
    };
  }
  return n;
}

inline Value mul_bcast(const Value& a, const Value& b) {
  detail::check_broadcastable(a->value, b->value, "mul_bcast");
  Tensor out = a->value;
  detail::broadcast_iterate(a->value.shape(), b->value.shape(),
                            [&](std::int64_t oi, std::int64_t ii) { out[oi] *= b->value[ii]; });
  const bool tracked = detail::track({&a, &b});
  auto n = detail::make_op(std::move(out), {a, b}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* bp = b.get();
    Node* np = n.get();
    n->backward_fn = [ap, bp, np]() {
      if (ap->requires_grad) {
        ap->ensure_grad();
        detail::broadcast_iterate(np->value.shape(), bp->value.shape(), [&](std::int64_t oi, std::int64_t ii) {
          ap->grad[oi] += np->grad[oi] * bp->value[ii];
        });
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        detail::broadcast_iterate(np->value.shape(), bp->value.shape(), [&](std::int64_t oi, std::int64_t ii) {
          bp->grad[ii] += np->grad[oi] * ap->value[oi];
        });
      }
    };
  }
  return n;
}

inline Value broadcast_to(const Value& x, const std::vector<int>& shape) {
  Tensor out(shape);
  detail::check_broadcastable(out, x->value, "broadcast_to");
  detail::broadcast_iterate(shape, x->value.shape(),
                            [&](std::int64_t oi, std::int64_t ii) { out[oi] = x->value[ii]; });
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np]() {
      xp->ensure_grad();
      detail::broadcast_iterate(np->value.shape(), xp->value.shape(),
                                [&](std::int64_t oi, std::int64_t ii) { xp->grad[ii] += np->grad[oi]; });
    };
  }
  return n;
}

inline Value detach(const Value& x) { return constant(x->value); }

// ---------------------------------------------------------------------------
// Shape movement
// ---------------------------------------------------------------------------

inline Value reshape(const Value& x, std::vector<int> shape) {
  require(Tensor::numel_of(shape) == x->value.numel(), ErrorCategory::invalid_argument,
          "reshape: element count mismatch");
  Tensor out(std::move(shape), x->value.vec());
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np]() {
      xp->ensure_grad();
      for (std::int64_t i = 0; i < np->grad.numel(); ++i) xp->grad[i] += np->grad[i];
    };
  }
  return n;
}

inline Value permute_axes(const Value& x, const std::vector<int>& perm) {
  const int r = x->value.rank();
  require(static_cast<int>(perm.size()) == r, ErrorCategory::invalid_argument, "permute_axes: bad perm");
  std::vector<int> out_shape(static_cast<size_t>(r));
  const auto in_str = strides_of(x->value.shape());
  std::vector<std::int64_t> strides(static_cast<size_t>(r));
  for (int d = 0; d < r; ++d) {
    out_shape[static_cast<size_t>(d)] = x->value.dim(perm[static_cast<size_t>(d)]);
    strides[static_cast<size_t>(d)] = in_str[static_cast<size_t>(perm[static_cast<size_t>(d)])];
  }
  Tensor out(out_shape);
  detail::strided_iterate(out_shape, strides, 0,
                          [&](std::int64_t oi, std::int64_t ii) { out[oi] = x->value[ii]; });
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    auto shp = out_shape;
    auto str = strides;
    n->backward_fn = [xp, np, shp, str]() {
      xp->ensure_grad();
      detail::strided_iterate(shp, str, 0,
                              [&](std::int64_t oi, std::int64_t ii) { xp->grad[ii] += np->grad[oi]; });
    };
  }
  return n;
}

inline Value slice(const Value& x, int axis, int start, int len) {
  const auto& shape = x->value.shape();
  require(axis >= 0 && axis < x->value.rank(), ErrorCategory::invalid_argument, "slice: bad axis");
  require(start >= 0 && len >= 0 && start + len <= shape[static_cast<size_t>(axis)],
          ErrorCategory::invalid_argument, "slice: out of range");
  auto out_shape = shape;
  out_shape[static_cast<size_t>(axis)] = len;
  const auto in_str = strides_of(shape);
  std::vector<std::int64_t> strides(in_str.begin(), in_str.end());
  const std::int64_t base = in_str[static_cast<size_t>(axis)] * start;
  Tensor out(out_shape);
  detail::strided_iterate(out_shape, strides, base,
                          [&](std::int64_t oi, std::int64_t ii) { out[oi] = x->value[ii]; });
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np, out_shape, strides, base]() {
      xp->ensure_grad();
      detail::strided_iterate(out_shape, strides, base,
                              [&](std::int64_t oi, std::int64_t ii) { xp->grad[ii] += np->grad[oi]; });
    };
  }
  return n;
}

inline Value concat(const std::vector<Value>& xs, int axis) {
  require(!xs.empty(), ErrorCategory::invalid_argument, "concat: empty input list");
  const int r = xs.front()->value.rank();
  require(axis >= 0 && axis < r, ErrorCategory::invalid_argument, "concat: bad axis");
  auto out_shape = xs.front()->value.shape();
  int total = 0;
  for (const auto& x : xs) {
    require(x->value.rank() == r, ErrorCategory::invalid_argument, "concat: rank mismatch");
    for (int d = 0; d < r; ++d)
      require(d == axis || x->value.dim(d) == out_shape[static_cast<size_t>(d)],
              ErrorCategory::invalid_argument, "concat: shape mismatch");
    total += x->value.dim(axis);
  }
  out_shape[static_cast<size_t>(axis)] = total;

  std::int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= out_shape[static_cast<size_t>(d)];
  for (int d = axis + 1; d < r; ++d) inner *= out_shape[static_cast<size_t>(d)];

  Tensor out(out_shape);
  {
    std::int64_t offset = 0;
    for (const auto& x : xs) {
      const std::int64_t len = x->value.dim(axis) * inner;
      for (std::int64_t o = 0; o < outer; ++o) {
        const double* src = x->value.data() + o * len;
        double* dst = out.data() + o * (total * inner) + offset;
        std::copy(src, src + len, dst);
      }
      offset += len;
    }
  }
  bool tracked = false;
  if (grad_mode())
    for (const auto& x : xs) tracked = tracked || x->requires_grad;
  auto n = detail::make_op(std::move(out), xs, [] {}, tracked);
  if (tracked) {
    std::vector<Node*> parts;
    for (const auto& x : xs) parts.push_back(x.get());
    Node* np = n.get();
    n->backward_fn = [parts, np, outer, inner, total, axis]() {
      std::int64_t offset = 0;
      for (Node* xp : parts) {
        const std::int64_t len = xp->value.dim(axis) * inner;
        if (xp->requires_grad) {
          xp->ensure_grad();
          for (std::int64_t o = 0; o < outer; ++o) {
            const double* src = np->grad.data() + o * (total * inner) + offset;
            double* dst = xp->grad.data() + o * len;
            for (std::int64_t i = 0; i < len; ++i) dst[i] += src[i];
          }
        }
        offset += len;
      }
    };
  }
  return n;
}

// Cyclic roll of the two spatial axes of a [B, H, W, C] tensor: output value
// at (h, w) comes from input (h - dh mod H, w - dw mod W).
inline Value roll_hw(const Value& x, int dh, int dw) {
  require(x->value.rank() == 4, ErrorCategory::invalid_argument, "roll_hw: expects rank-4 tensor");
  const int B = x->value.dim(0), H = x->value.dim(1), W = x->value.dim(2), C = x->value.dim(3);
  auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
  Tensor out(x->value.shape());
  for (int b = 0; b < B; ++b)
    for (int h = 0; h < H; ++h) {
      const int sh = wrap(h - dh, H);
      for (int w = 0; w < W; ++w) {
        const int sw = wrap(w - dw, W);
        const double* src = x->value.data() + ((static_cast<std::int64_t>(b) * H + sh) * W + sw) * C;
        double* dst = out.data() + ((static_cast<std::int64_t>(b) * H + h) * W + w) * C;
        std::copy(src, src + C, dst);
      }
    }
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np, B, H, W, C, dh, dw, wrap]() {
      xp->ensure_grad();
      for (int b = 0; b < B; ++b)
        for (int h = 0; h < H; ++h) {
          const int sh = wrap(h - dh, H);
          for (int w = 0; w < W; ++w) {
            const int sw = wrap(w - dw, W);
            const double* src = np->grad.data() + ((static_cast<std::int64_t>(b) * H + h) * W + w) * C;
            double* dst = xp->grad.data() + ((static_cast<std::int64_t>(b) * H + sh) * W + sw) * C;
            for (int c = 0; c < C; ++c) dst[c] += src[c];
          }
        }
    };
  }
  return n;
}

// [B, H, W, C] -> [B, H/p, W/p, p*p*C]; channel block (dy*p+dx) holds the
// sub-grid at offset (dy, dx). With p=2 this is exactly the parity split used
// by the token downsampling path.
inline Value space_to_depth(const Value& x, int p) {
  require(x->value.rank() == 4, ErrorCategory::invalid_argument, "space_to_depth: expects rank-4");
  const int B = x->value.dim(0), H = x->value.dim(1), W = x->value.dim(2), C = x->value.dim(3);
  require(p >= 1 && H % p == 0 && W % p == 0, ErrorCategory::invalid_argument,
          "space_to_depth: dims must be divisible by p");
  const int Ho = H / p, Wo = W / p;
  Tensor out({B, Ho, Wo, p * p * C});
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < Ho; ++i)
      for (int j = 0; j < Wo; ++j)
        for (int dy = 0; dy < p; ++dy)
          for (int dx = 0; dx < p; ++dx) {
            const double* src =
                x->value.data() + ((static_cast<std::int64_t>(b) * H + i * p + dy) * W + j * p + dx) * C;
            double* dst = out.data() + ((static_cast<std::int64_t>(b) * Ho + i) * Wo + j) * (p * p * C) +
                          (dy * p + dx) * C;
            std::copy(src, src + C, dst);
          }
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np, B, H, W, C, p, Ho, Wo]() {
      xp->ensure_grad();
      for (int b = 0; b < B; ++b)
        for (int i = 0; i < Ho; ++i)
          for (int j = 0; j < Wo; ++j)
            for (int dy = 0; dy < p; ++dy)
              for (int dx = 0; dx < p; ++dx) {
                const double* src = np->grad.data() +
                                    ((static_cast<std::int64_t>(b) * Ho + i) * Wo + j) * (p * p * C) +
                                    (dy * p + dx) * C;
                double* dst = xp->grad.data() +
                              ((static_cast<std::int64_t>(b) * H + i * p + dy) * W + j * p + dx) * C;
                for (int c = 0; c < C; ++c) dst[c] += src[c];
              }
    };
  }
  return n;
}

// Inverse of space_to_depth.
inline Value depth_to_space(const Value& x, int p) {
  require(x->value.rank() == 4, ErrorCategory::invalid_argument, "depth_to_space: expects rank-4");
  const int B = x->value.dim(0), Hi = x->value.dim(1), Wi = x->value.dim(2), Ci = x->value.dim(3);
  require(Ci % (p * p) == 0, ErrorCategory::invalid_argument, "depth_to_space: channels not divisible");
  const int C = Ci / (p * p), H = Hi * p, W = Wi * p;
  Tensor out({B, H, W, C});
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < Hi; ++i)
      for (int j = 0; j < Wi; ++j)
        for (int dy = 0; dy < p; ++dy)
          for (int dx = 0; dx < p; ++dx) {
            const double* src = x->value.data() + ((static_cast<std::int64_t>(b) * Hi + i) * Wi + j) * Ci +
                                (dy * p + dx) * C;
            double* dst =
                out.data() + ((static_cast<std::int64_t>(b) * H + i * p + dy) * W + j * p + dx) * C;
            std::copy(src, src + C, dst);
          }
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np, B, Hi, Wi, Ci, C, H, W, p]() {
      xp->ensure_grad();
      for (int b = 0; b < B; ++b)
        for (int i = 0; i < Hi; ++i)
          for (int j = 0; j < Wi; ++j)
            for (int dy = 0; dy < p; ++dy)
              for (int dx = 0; dx < p; ++dx) {
                const double* src =
                    np->grad.data() + ((static_cast<std::int64_t>(b) * H + i * p + dy) * W + j * p + dx) * C;
                double* dst = xp->grad.data() + ((static_cast<std::int64_t>(b) * Hi + i) * Wi + j) * Ci +
                              (dy * p + dx) * C;
                for (int c = 0; c < C; ++c) dst[c] += src[c];
              }
    };
  }
  return n;
}

// Row gather: out[i, :] = table[idx[i], :]. Backward scatter-adds into the
// table (relative-position bias lookup).
inline Value embedding_rows(const Value& table, std::vector<int> idx) {
  require(table->value.rank() == 2, ErrorCategory::invalid_argument, "embedding_rows: table must be 2-d");
  const int R = table->value.dim(0), C = table->value.dim(1);
  for (int i : idx)
    require(i >= 0 && i < R, ErrorCategory::invalid_argument, "embedding_rows: index out of range");
  Tensor out({static_cast<int>(idx.size()), C});
  for (size_t i = 0; i < idx.size(); ++i)
    std::copy(table->value.data() + static_cast<std::int64_t>(idx[i]) * C,
              table->value.data() + static_cast<std::int64_t>(idx[i] + 1) * C,
              out.data() + static_cast<std::int64_t>(i) * C);
  const bool tracked = detail::track({&table});
  auto n = detail::make_op(std::move(out), {table}, [] {}, tracked);
  if (tracked) {
    Node* tp = table.get();
    Node* np = n.get();
    n->backward_fn = [tp, np, idx = std::move(idx), C]() {
      tp->ensure_grad();
      for (size_t i = 0; i < idx.size(); ++i) {
        const double* src = np->grad.data() + static_cast<std::int64_t>(i) * C;
        double* dst = tp->grad.data() + static_cast<std::int64_t>(idx[i]) * C;
        for (int c = 0; c < C; ++c) dst[c] += src[c];
      }
    };
  }
  return n;
}

// ---------------------------------------------------------------------------
// Matrix products
// ---------------------------------------------------------------------------

// a: [batch..., M, K]. b: [K, N] (shared) or [batch..., K, N] (matching
// batch). With trans_b, b's last two dims are [N, K]. Returns [batch..., M, N].
inline Value matmul(const Value& a, const Value& b, bool trans_b = false) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  require(A.rank() >= 2 && B.rank() >= 2, ErrorCategory::invalid_argument, "matmul: rank too low");
  const int M = A.dim(A.rank() - 2);
  const int K = A.dim(A.rank() - 1);
  const int bK = trans_b ? B.dim(B.rank() - 1) : B.dim(B.rank() - 2);
  const int N = trans_b ? B.dim(B.rank() - 2) : B.dim(B.rank() - 1);
  require(bK == K, ErrorCategory::invalid_argument,
          "matmul: inner dim mismatch " + A.shape_str() + " vs " + B.shape_str());
  const bool shared_b = B.rank() == 2;
  std::int64_t batch = 1;
  for (int d = 0; d < A.rank() - 2; ++d) batch *= A.dim(d);
  if (!shared_b) {
    require(B.rank() == A.rank(), ErrorCategory::invalid_argument, "matmul: batch rank mismatch");
    for (int d = 0; d < A.rank() - 2; ++d)
      require(B.dim(d) == A.dim(d), ErrorCategory::invalid_argument, "matmul: batch dim mismatch");
  }

  std::vector<int> out_shape(A.shape().begin(), A.shape().end() - 1);
  out_shape.push_back(N);
  Tensor out(out_shape);

  const std::int64_t sa = static_cast<std::int64_t>(M) * K;
  const std::int64_t sb = shared_b ? 0 : static_cast<std::int64_t>(K) * N;
  const std::int64_t so = static_cast<std::int64_t>(M) * N;
  for (std::int64_t i = 0; i < batch; ++i) {
    detail::MapC Am(A.data() + i * sa, M, K);
    detail::MapM Om(out.data() + i * so, M, N);
    if (trans_b) {
      detail::MapC Bm(B.data() + i * sb, N, K);
      Om.noalias() = Am * Bm.transpose();
    } else {
      detail::MapC Bm(B.data() + i * sb, K, N);
      Om.noalias() = Am * Bm;
    }
  }

  const bool tracked = detail::track({&a, &b});
  auto n = detail::make_op(std::move(out), {a, b}, [] {}, tracked);
  if (tracked) {
    Node* ap = a.get();
    Node* bp = b.get();
    Node* np = n.get();
    n->backward_fn = [ap, bp, np, M, K, N, batch, shared_b, trans_b, sa, sb, so]() {
      for (std::int64_t i = 0; i < batch; ++i) {
        detail::MapC Gm(np->grad.data() + i * so, M, N);
        detail::MapC Am(ap->value.data() + i * sa, M, K);
        if (ap->requires_grad) {
          ap->ensure_grad();
          detail::MapM dA(ap->grad.data() + i * sa, M, K);
          if (trans_b) {
            detail::MapC Bm(bp->value.data() + i * sb, N, K);
            dA.noalias() += Gm * Bm;
          } else {
            detail::MapC Bm(bp->value.data() + i * sb, K, N);
            dA.noalias() += Gm * Bm.transpose();
          }
        }
        if (bp->requires_grad) {
          bp->ensure_grad();
          if (trans_b) {
            detail::MapM dB(bp->grad.data() + (shared_b ? 0 : i * sb), N, K);
            dB.noalias() += Gm.transpose() * Am;
          } else {
            detail::MapM dB(bp->grad.data() + (shared_b ? 0 : i * sb), K, N);
            dB.noalias() += Am.transpose() * Gm;
          }
        }
      }
    };
  }
  return n;
}

// ---------------------------------------------------------------------------
// Normalization, activations, reductions
// ---------------------------------------------------------------------------

inline Value layer_norm(const Value& x, const Value& gamma, const Value& beta, double eps = 1e-6) {
  const int C = x->value.dim(x->value.rank() - 1);
  require(gamma->value.numel() == C && beta->value.numel() == C, ErrorCategory::invalid_argument,
          "layer_norm: gamma/beta size mismatch");
  const std::int64_t rows = x->value.numel() / C;
  Tensor out(x->value.shape());
  Tensor xhat(x->value.shape());
  std::vector<double> inv_std(static_cast<size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = x->value.data() + r * C;
    double mean = 0.0;
    for (int c = 0; c < C; ++c) mean += xr[c];
    mean /= C;
    double var = 0.0;
    for (int c = 0; c < C; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= C;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(r)] = is;
    double* xh = xhat.data() + r * C;
    double* o = out.data() + r * C;
    for (int c = 0; c < C; ++c) {
      xh[c] = (xr[c] - mean) * is;
      o[c] = xh[c] * gamma->value[c] + beta->value[c];
    }
  }
  const bool tracked = detail::track({&x, &gamma, &beta});
  auto n = detail::make_op(std::move(out), {x, gamma, beta}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* gp = gamma.get();
    Node* bp = beta.get();
    Node* np = n.get();
    n->backward_fn = [xp, gp, bp, np, C, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)]() {
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* g = np->grad.data() + r * C;
        const double* xh = xhat.data() + r * C;
        if (gp->requires_grad) {
          gp->ensure_grad();
          for (int c = 0; c < C; ++c) gp->grad[c] += g[c] * xh[c];
        }
        if (bp->requires_grad) {
          bp->ensure_grad();
          for (int c = 0; c < C; ++c) bp->grad[c] += g[c];
        }
        if (xp->requires_grad) {
          xp->ensure_grad();
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int c = 0; c < C; ++c) {
            const double dxh = g[c] * gp->value[c];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xh[c];
          }
          mean_dxhat /= C;
          mean_dxhat_xhat /= C;
          double* dx = xp->grad.data() + r * C;
          const double is = inv_std[static_cast<size_t>(r)];
          for (int c = 0; c < C; ++c) {
            const double dxh = g[c] * gp->value[c];
            dx[c] += (dxh - mean_dxhat - xh[c] * mean_dxhat_xhat) * is;
          }
        }
      }
    };
  }
  return n;
}

inline Value softmax_last(const Value& x) {
  const int C = x->value.dim(x->value.rank() - 1);
  const std::int64_t rows = x->value.numel() / C;
  Tensor out(x->value.shape());
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = x->value.data() + r * C;
    double* o = out.data() + r * C;
    double mx = xr[0];
    for (int c = 1; c < C; ++c) mx = std::max(mx, xr[c]);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) {
      o[c] = std::exp(xr[c] - mx);
      sum += o[c];
    }
    for (int c = 0; c < C; ++c) o[c] /= sum;
  }
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np, C, rows]() {
      xp->ensure_grad();
      for (std::int64_t r = 0; r < rows; ++r) {
        const double* y = np->value.data() + r * C;
        const double* g = np->grad.data() + r * C;
        double dot = 0.0;
        for (int c = 0; c < C; ++c) dot += g[c] * y[c];
        double* dx = xp->grad.data() + r * C;
        for (int c = 0; c < C; ++c) dx[c] += y[c] * (g[c] - dot);
      }
    };
  }
  return n;
}

inline Value gelu(const Value& x) {
  Tensor out(x->value.shape());
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    const double v = x->value[i];
    out[i] = 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2));
  }
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np]() {
      xp->ensure_grad();
      constexpr double inv_sqrt_2pi = 0.3989422804014327;
      for (std::int64_t i = 0; i < np->grad.numel(); ++i) {
        const double v = xp->value[i];
        const double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
        xp->grad[i] += np->grad[i] * (cdf + v * pdf);
      }
    };
  }
  return n;
}

inline Value silu(const Value& x) {
  Tensor out(x->value.shape());
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    const double v = x->value[i];
    out[i] = v / (1.0 + std::exp(-v));
  }
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np]() {
      xp->ensure_grad();
      for (std::int64_t i = 0; i < np->grad.numel(); ++i) {
        const double v = xp->value[i];
        const double s = 1.0 / (1.0 + std::exp(-v));
        xp->grad[i] += np->grad[i] * s * (1.0 + v * (1.0 - s));
      }
    };
  }
  return n;
}

// Sums over one axis keeping it as size 1, which pairs with the broadcast ops.
inline Value reduce_sum_axis(const Value& x, int axis) {
  require(axis >= 0 && axis < x->value.rank(), ErrorCategory::invalid_argument, "reduce_sum_axis: bad axis");
  auto out_shape = x->value.shape();
  out_shape[static_cast<size_t>(axis)] = 1;
  Tensor out(out_shape);
  detail::broadcast_iterate(x->value.shape(), out_shape,
                            [&](std::int64_t xi, std::int64_t oi) { out[oi] += x->value[xi]; });
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(std::move(out), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    auto out_shape_copy = out_shape;
    n->backward_fn = [xp, np, out_shape_copy]() {
      xp->ensure_grad();
      detail::broadcast_iterate(xp->value.shape(), out_shape_copy,
                                [&](std::int64_t xi, std::int64_t oi) { xp->grad[xi] += np->grad[oi]; });
    };
  }
  return n;
}

inline Value sum_all(const Value& x) {
  double s = 0.0;
  for (std::int64_t i = 0; i < x->value.numel(); ++i) s += x->value[i];
  const bool tracked = detail::track({&x});
  auto n = detail::make_op(Tensor::scalar(s), {x}, [] {}, tracked);
  if (tracked) {
    Node* xp = x.get();
    Node* np = n.get();
    n->backward_fn = [xp, np]() {
      xp->ensure_grad();
      const double g = np->grad[0];
      for (std::int64_t i = 0; i < xp->grad.numel(); ++i) xp->grad[i] += g;
    };
  }
  return n;
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

inline void backward(const Value& root) {
  require(root->value.numel() == 1, ErrorCategory::invalid_argument, "backward: root must be scalar");
  require(root->requires_grad, ErrorCategory::invalid_argument, "backward: root does not require grad");

  // Iterative post-order DFS to get a topological order of the tracked graph.
  std::vector<Node*> topo;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next].get();
      ++next;
      if (child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if ((*it)->backward_fn) {
      (*it)->ensure_grad();
      (*it)->backward_fn();
    }
  }
}

}  // namespace graphdiff::nn
