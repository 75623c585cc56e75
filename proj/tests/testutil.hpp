#pragma once

#include <gtest/gtest.h>

#include <functional>
#include <vector>

#include "graphdiff/nn/autodiff.hpp"

namespace graphdiff::testutil {

// Central finite differences vs reverse-mode gradients for a scalar-valued
// rebuildable function. Checks up to `max_per_tensor` entries of each
// parameter (all of them when the tensor is small enough).
inline void grad_check_sampled(const std::function<nn::Value()>& fn, std::vector<nn::Value> params,
                               int max_per_tensor = 6, double h = 1e-5, double tol = 1e-6,
                               std::uint64_t seed = 12345) {
  for (auto& p : params) p->zero_grad();
  nn::Value loss = fn();
  nn::backward(loss);
  Rng rng(seed);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    std::vector<std::int64_t> indices;
    if (p->value.numel() <= max_per_tensor) {
      for (std::int64_t i = 0; i < p->value.numel(); ++i) indices.push_back(i);
    } else {
      for (int k = 0; k < max_per_tensor; ++k)
        indices.push_back(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(p->value.numel()))));
    }
    for (std::int64_t i : indices) {
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

}  // namespace graphdiff::testutil
