#include <gtest/gtest.h>

#include <functional>

#include "graphdiff/nn/autodiff.hpp"

using namespace graphdiff;
using namespace graphdiff::nn;

namespace {

// Central finite differences against the reverse-mode gradient for a scalar
// function of the given parameters. Every parameter entry is checked.
void grad_check(const std::function<Value()>& fn, std::vector<Value> params, double h = 1e-5,
                double tol = 1e-7) {
  for (auto& p : params) p->zero_grad();
  Value loss = fn();
  backward(loss);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    for (std::int64_t i = 0; i < p->value.numel(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = fn()->value[0];
      p->value[i] = saved - h;
      const double down = fn()->value[0];
      p->value[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double ad = p->grad.numel() ? p->grad[i] : 0.0;
      const double denom = std::max({1.0, std::abs(fd), std::abs(ad)});
      ASSERT_LE(std::abs(fd - ad) / denom, tol)
          << "param " << pi << " index " << i << ": fd=" << fd << " ad=" << ad;
    }
  }
}

Value randn_param(std::vector<int> shape, Rng& rng) {
  return parameter(Tensor::randn(std::move(shape), rng));
}

}  // namespace

TEST(Autodiff, ElementwiseOps) {
  Rng rng(1);
  auto a = randn_param({2, 3}, rng);
  auto b = randn_param({2, 3}, rng);
  grad_check([&] { return sum_all(mul(add(a, b), sub(a, scale(b, 0.7)))); }, {a, b});
}

TEST(Autodiff, BroadcastAddMul) {
  Rng rng(2);
  auto x = randn_param({2, 4, 3}, rng);
  auto bias = randn_param({1, 1, 3}, rng);
  auto gate = randn_param({2, 1, 3}, rng);
  grad_check([&] { return sum_all(mul_bcast(add_bcast(x, bias), gate)); }, {x, bias, gate});
}

TEST(Autodiff, BroadcastTo) {
  Rng rng(3);
  auto x = randn_param({2, 1, 3}, rng);
  auto w = randn_param({2, 4, 3}, rng);
  grad_check([&] { return sum_all(mul(broadcast_to(x, {2, 4, 3}), w)); }, {x, w});
}

TEST(Autodiff, MatmulSharedWeight) {
  Rng rng(4);
  auto x = randn_param({3, 4, 5}, rng);  // [batch, M, K]
  auto w = randn_param({5, 2}, rng);
  auto probe = constant(Tensor::randn({3, 4, 2}, rng));
  grad_check([&] { return sum_all(mul(matmul(x, w), probe)); }, {x, w});
}

TEST(Autodiff, MatmulBatchedAndTransposed) {
  Rng rng(5);
  auto q = randn_param({2, 3, 4}, rng);
  auto k = randn_param({2, 3, 4}, rng);
  auto probe = constant(Tensor::randn({2, 3, 3}, rng));
  grad_check([&] { return sum_all(mul(matmul(q, k, /*trans_b=*/true), probe)); }, {q, k});
}

TEST(Autodiff, MatmulRejectsBadShapes) {
  Rng rng(6);
  auto a = randn_param({2, 3}, rng);
  auto b = randn_param({4, 2}, rng);
  EXPECT_THROW(matmul(a, b), Error);
}

TEST(Autodiff, ReshapePermuteSliceConcat) {
  Rng rng(7);
  auto x = randn_param({2, 3, 4}, rng);
  auto y = randn_param({2, 3, 2}, rng);
  auto probe = constant(Tensor::randn({3, 2, 6}, rng));
  grad_check(
      [&] {
        auto joined = concat({x, y}, 2);                    // [2,3,6]
        auto moved = permute_axes(joined, {1, 0, 2});       // [3,2,6]
        auto part = slice(moved, 2, 1, 4);                  // [3,2,4]
        auto flat = reshape(part, {3, 8});
        auto back = reshape(flat, {3, 2, 4});
        auto padded = concat({back, slice(moved, 2, 0, 2)}, 2);  // [3,2,6]
        return sum_all(mul(padded, probe));
      },
      {x, y});
}

TEST(Autodiff, RollAndSpaceDepth) {
  Rng rng(8);
  auto x = randn_param({2, 4, 4, 3}, rng);
  auto probe = constant(Tensor::randn({2, 4, 4, 3}, rng));
  grad_check(
      [&] {
        auto rolled = roll_hw(x, -1, 2);
        auto down = space_to_depth(rolled, 2);  // [2,2,2,12]
        auto up = depth_to_space(down, 2);      // back to [2,4,4,3]
        return sum_all(mul(up, probe));
      },
      {x});
}

TEST(Autodiff, RollRoundTripIsIdentity) {
  Rng rng(9);
  auto x = constant(Tensor::randn({1, 5, 7, 2}, rng));
  auto y = roll_hw(roll_hw(x, 3, -2), -3, 2);
  for (std::int64_t i = 0; i < x->value.numel(); ++i) EXPECT_EQ(y->value[i], x->value[i]);
}

TEST(Autodiff, SpaceDepthRoundTripBitExact) {
  Rng rng(10);
  auto x = constant(Tensor::randn({2, 6, 6, 5}, rng));
  auto y = depth_to_space(space_to_depth(x, 3), 3);
  for (std::int64_t i = 0; i < x->value.numel(); ++i) EXPECT_EQ(y->value[i], x->value[i]);
}

TEST(Autodiff, EmbeddingRows) {
  Rng rng(11);
  auto table = randn_param({5, 3}, rng);
  auto probe = constant(Tensor::randn({4, 3}, rng));
  grad_check([&] { return sum_all(mul(embedding_rows(table, {0, 2, 2, 4}), probe)); }, {table});
}

TEST(Autodiff, LayerNorm) {
  Rng rng(12);
  auto x = randn_param({3, 4, 6}, rng);
  auto gamma = parameter(Tensor::full({6}, 1.0));
  auto beta = parameter(Tensor::zeros({6}));
  // Nudge gamma/beta off their init so gradients are generic.
  for (int c = 0; c < 6; ++c) {
    gamma->value[c] += 0.1 * rng.normal();
    beta->value[c] += 0.1 * rng.normal();
  }
  auto probe = constant(Tensor::randn({3, 4, 6}, rng));
  grad_check([&] { return sum_all(mul(layer_norm(x, gamma, beta), probe)); }, {x, gamma, beta}, 1e-5,
             1e-6);
}

TEST(Autodiff, SoftmaxGeluSilu) {
  Rng rng(13);
  auto x = randn_param({2, 5}, rng);
  auto probe = constant(Tensor::randn({2, 5}, rng));
  grad_check([&] { return sum_all(mul(softmax_last(x), probe)); }, {x});
  grad_check([&] { return sum_all(mul(gelu(x), probe)); }, {x});
  grad_check([&] { return sum_all(mul(silu(x), probe)); }, {x});
}

TEST(Autodiff, SoftmaxRowsSumToOne) {
  Rng rng(14);
  auto x = constant(Tensor::randn({4, 7}, rng, 3.0));
  auto y = softmax_last(x);
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int c = 0; c < 7; ++c) s += y->value[r * 7 + c];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Autodiff, ReduceSumAxis) {
  Rng rng(15);
  auto x = randn_param({2, 3, 4}, rng);
  auto probe = constant(Tensor::randn({2, 1, 4}, rng));
  grad_check([&] { return sum_all(mul(reduce_sum_axis(x, 1), probe)); }, {x});
}

TEST(Autodiff, DetachBlocksGradient) {
  Rng rng(16);
  auto x = randn_param({3}, rng);
  x->zero_grad();
  auto loss = sum_all(mul(detach(x), x));
  backward(loss);
  // d/dx (c * x) = c with c = detach(x): gradient equals the detached values,
  // not 2x.
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x->grad[i], x->value[i]);
}

TEST(Autodiff, NoGradModeBuildsConstants) {
  Rng rng(17);
  auto x = randn_param({3}, rng);
  NoGradGuard guard;
  auto y = scale(x, 2.0);
  EXPECT_FALSE(y->requires_grad);
  EXPECT_TRUE(y->inputs.empty());
}

TEST(Autodiff, GradAccumulatesAcrossBackwardCalls) {
  auto x = parameter(Tensor::full({2}, 1.5));
  x->zero_grad();
  auto loss1 = sum_all(mul(x, x));
  backward(loss1);
  auto loss2 = sum_all(mul(x, x));
  backward(loss2);
  for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(x->grad[i], 2.0 * 2.0 * 1.5);
}

TEST(Autodiff, DiamondGraphGradient) {
  // The same node feeds two paths; gradients must add.
  auto x = parameter(Tensor::full({1}, 3.0));
  x->zero_grad();
  auto y = add(mul(x, x), scale(x, 4.0));  // x^2 + 4x -> dy/dx = 2x + 4 = 10
  backward(sum_all(y));
  EXPECT_DOUBLE_EQ(x->grad[0], 10.0);
}
