#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "graphdiff/error.hpp"

namespace graphdiff {

// Deterministic random stream. All randomness in the library flows through
// explicitly passed Rng instances so every pipeline stage is reproducible
// from its seed. Gaussian draws use Box-Muller rather than
// std::normal_distribution so the stream does not depend on the standard
// library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    require(bound > 0, ErrorCategory::invalid_argument, "Rng::below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    require(lo <= hi, ErrorCategory::invalid_argument, "Rng::uniform_int: empty range");
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // State round-trips through a plain text blob (checkpoint payload).
  std::string save_state() const {
    std::ostringstream os;
    os << gen_ << " " << (have_spare_ ? 1 : 0);
    if (have_spare_) os << " " << std::hexfloat << spare_;
    return os.str();
  }

  void load_state(const std::string& blob) {
    std::istringstream is(blob);
    int spare_flag = 0;
    is >> gen_ >> spare_flag;
    require(!is.fail(), ErrorCategory::parse, "Rng::load_state: malformed state blob");
    have_spare_ = spare_flag != 0;
    if (have_spare_) {
      is >> spare_;
      require(!is.fail(), ErrorCategory::parse, "Rng::load_state: malformed spare value");
    } else {
      spare_ = 0.0;
    }
  }

  // Derives an independent child stream; used to give each sampler run or
  // worker its own stream without coupling draw orders.
  Rng fork() {
    Rng child(next_u64() ^ 0x9e3779b97f4a7c15ULL);
    child.next_u64();
    return child;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace graphdiff
