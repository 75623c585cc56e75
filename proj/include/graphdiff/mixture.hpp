#pragma once

#include <boost/rational.hpp>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graphdiff/error.hpp"
#include "graphdiff/random.hpp"

namespace graphdiff {

using Rational = boost::rational<long long>;

inline Rational frac(long long num, long long den) { return Rational(num, den); }

namespace detail {

template <class W>
struct WeightPolicy;

template <>
struct WeightPolicy<double> {
  static bool is_unit_sum(double s) { return std::abs(s - 1.0) <= 1e-12; }
  static bool is_nonnegative(double w) { return w >= 0.0; }
  static double halve(double w) { return 0.5 * w; }
  static double abs(double w) { return std::abs(w); }
};

template <>
struct WeightPolicy<Rational> {
  static bool is_unit_sum(const Rational& s) { return s == Rational(1); }
  static bool is_nonnegative(const Rational& w) { return w >= Rational(0); }
  static Rational halve(const Rational& w) { return w / 2; }
  static Rational abs(const Rational& w) { return w < Rational(0) ? -w : w; }
};

}  // namespace detail

// Finite mixture of point masses over an ordered atom type. Atoms are
// deduplicated (weights of equal atoms merged) and kept sorted; weights are
// nonnegative and sum to one (exactly for rational weights, to 1e-12 for
// doubles).
template <class Atom, class W>
class DiracMixture {
 public:
  DiracMixture() = default;

  static DiracMixture from_terms(const std::vector<std::pair<Atom, W>>& terms) {
    std::map<Atom, W> merged;
    for (const auto& [atom, w] : terms) {
      require(detail::WeightPolicy<W>::is_nonnegative(w), ErrorCategory::invalid_argument,
              "DiracMixture: negative weight");
      auto it = merged.find(atom);
      if (it == merged.end())
        merged.emplace(atom, w);
      else
        it->second = it->second + w;
    }
    require(!merged.empty(), ErrorCategory::invalid_argument, "DiracMixture: empty support");
    DiracMixture out;
    W sum{};
    for (auto& [atom, w] : merged) {
      out.atoms_.push_back(atom);
      out.weights_.push_back(w);
      sum = sum + w;
    }
    require(detail::WeightPolicy<W>::is_unit_sum(sum), ErrorCategory::invalid_argument,
            "DiracMixture: weights must sum to 1");
    return out;
  }

  static DiracMixture uniform(const std::vector<Atom>& atoms) {
    std::map<Atom, int> dedup;
    for (const auto& a : atoms) dedup[a] = 1;
    std::vector<std::pair<Atom, W>> terms;
    const auto count = static_cast<long long>(dedup.size());
    for (const auto& [a, _] : dedup) terms.emplace_back(a, make_uniform_weight(count));
    return from_terms(terms);
  }

  size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<W>& weights() const { return weights_; }

  W probability(const Atom& a) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || !(*it == a)) return W{};
    return weights_[static_cast<size_t>(it - atoms_.begin())];
  }

  bool operator==(const DiracMixture& other) const {
    return atoms_ == other.atoms_ && weights_ == other.weights_;
  }

 private:
  static W make_uniform_weight(long long count);

  std::vector<Atom> atoms_;
  std::vector<W> weights_;
};

template <class Atom, class W>
W DiracMixture<Atom, W>::make_uniform_weight(long long count) {
  if constexpr (std::is_same_v<W, Rational>)
    return Rational(1, count);
  else
    return W(1) / static_cast<W>(count);
}

// Two conventions for the distance between discrete mixtures:
//   unhalved - sum |p(a) - q(a)| over the union support (maximum value 2);
//   halved   - the probabilists' convention, half of that (maximum 1).
// The verification suite works in the unhalved convention so its reference
// constants can be checked verbatim; evaluation histograms use halved.
enum class TvConvention { unhalved, halved };

template <class Atom, class W>
W total_variation(const DiracMixture<Atom, W>& d1, const DiracMixture<Atom, W>& d2,
                  TvConvention convention = TvConvention::unhalved) {
  W sum{};
  size_t i = 0, j = 0;
  const auto& a1 = d1.atoms();
  const auto& a2 = d2.atoms();
  while (i < a1.size() || j < a2.size()) {
    if (j >= a2.size() || (i < a1.size() && a1[i] < a2[j])) {
      sum = sum + detail::WeightPolicy<W>::abs(d1.weights()[i]);
      ++i;
    } else if (i >= a1.size() || a2[j] < a1[i]) {
      sum = sum + detail::WeightPolicy<W>::abs(d2.weights()[j]);
      ++j;
    } else {
      sum = sum + detail::WeightPolicy<W>::abs(d1.weights()[i] - d2.weights()[j]);
      ++i;
      ++j;
    }
  }
  return convention == TvConvention::halved ? detail::WeightPolicy<W>::halve(sum) : sum;
}

// Draws an atom index from a double-weighted mixture.
template <class Atom>
size_t sample_index(const DiracMixture<Atom, double>& d, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    acc += d.weights()[i];
    if (u < acc) return i;
  }
  return d.size() - 1;
}

template <class Atom>
DiracMixture<Atom, double> to_double(const DiracMixture<Atom, Rational>& d) {
  std::vector<std::pair<Atom, double>> terms;
  for (size_t i = 0; i < d.size(); ++i)
    terms.emplace_back(d.atoms()[i], boost::rational_cast<double>(d.weights()[i]));
  return DiracMixture<Atom, double>::from_terms(terms);
}

}  // namespace graphdiff
