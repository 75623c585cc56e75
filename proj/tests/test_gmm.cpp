#include <gtest/gtest.h>

#include <cmath>

#include "graphdiff/gmm.hpp"
#include "graphdiff/random.hpp"

using namespace graphdiff;

namespace {

GmmSpec random_spec(int centers, int dim, double sigma, Rng& rng) {
  GmmSpec spec;
  spec.sigma = sigma;
  for (int i = 0; i < centers; ++i) {
    std::vector<double> c(static_cast<size_t>(dim));
    for (double& v : c) v = rng.normal();
    spec.centers.push_back(std::move(c));
  }
  return spec;
}

}  // namespace

TEST(Gmm, SingleCenterDenoiserReturnsCenter) {
  GmmSpec spec;
  spec.centers = {{1.0, -2.0, 0.5}};
  spec.sigma = 0.7;
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
    const auto d = gmm_optimal_denoiser(x, spec);
    for (size_t k = 0; k < 3; ++k) EXPECT_NEAR(d[k], spec.centers[0][k], 1e-12);
  }
}

TEST(Gmm, MidpointBetweenTwoCentersDenoisesToMidpoint) {
  GmmSpec spec;
  spec.centers = {{1.0, 0.0}, {-1.0, 0.0}};
  spec.sigma = 0.5;
  const std::vector<double> x{0.0, 0.3};
  const auto d = gmm_optimal_denoiser(x, spec);
  EXPECT_NEAR(d[0], 0.0, 1e-12);
  EXPECT_NEAR(d[1], 0.0, 1e-12);
}

TEST(Gmm, ScoreMatchesFiniteDifferenceOfLogDensity) {
  Rng rng(99);
  const auto spec = random_spec(2, 6, 0.8, rng);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.normal();
    const auto score = gmm_score(x, spec);
    const double h = 1e-6;
    for (size_t k = 0; k < x.size(); ++k) {
      auto xp = x;
      auto xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (gmm_log_density(xp, spec) - gmm_log_density(xm, spec)) / (2.0 * h);
      const double denom = std::max({1.0, std::abs(fd), std::abs(score[k])});
      EXPECT_LE(std::abs(score[k] - fd) / denom, 1e-5);
    }
  }
}

TEST(Gmm, TweedieIdentity) {
  Rng rng(7);
  const auto spec = random_spec(3, 4, 1.3, rng);
  std::vector<double> x(4);
  for (double& v : x) v = rng.normal();
  const auto d = gmm_optimal_denoiser(x, spec);
  const auto s = gmm_score(x, spec);
  for (size_t k = 0; k < x.size(); ++k)
    EXPECT_NEAR(d[k], x[k] + spec.sigma * spec.sigma * s[k], 1e-10);
}

TEST(Gmm, DenoiserStaysInConvexHull) {
  Rng rng(13);
  const auto spec = random_spec(4, 3, 0.6, rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x{rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3)};
    const auto d = gmm_optimal_denoiser(x, spec);
    for (size_t k = 0; k < 3; ++k) {
      double lo = spec.centers[0][k], hi = spec.centers[0][k];
      for (const auto& c : spec.centers) {
        lo = std::min(lo, c[k]);
        hi = std::max(hi, c[k]);
      }
      EXPECT_GE(d[k], lo - 1e-12);
      EXPECT_LE(d[k], hi + 1e-12);
    }
  }
}

TEST(Gmm, SmallSigmaSnapsToNearestCenter) {
  GmmSpec spec;
  spec.centers = {{1.0, 1.0}, {-1.0, -1.0}};
  spec.sigma = 1e-3;
  const std::vector<double> x{0.9, 1.1};
  const auto d = gmm_optimal_denoiser(x, spec);
  EXPECT_NEAR(d[0], 1.0, 1e-6);
  EXPECT_NEAR(d[1], 1.0, 1e-6);
}

TEST(Gmm, InvalidSigmaRejected) {
  GmmSpec spec;
  spec.centers = {{0.0}};
  spec.sigma = 0.0;
  EXPECT_THROW(gmm_log_density({0.0}, spec), Error);
}

TEST(Gmm, ResponsibilitiesAreStableFarFromCenters) {
  GmmSpec spec;
  spec.centers = {{0.0}, {1.0}};
  spec.sigma = 0.01;
  // 1e6 sigma away: naive exponentials would underflow to 0/0.
  const std::vector<double> x{1e4};
  const auto r = gmm_responsibilities(x, spec);
  EXPECT_NEAR(r[0] + r[1], 1.0, 1e-12);
  EXPECT_GT(r[1], 0.999);
}
